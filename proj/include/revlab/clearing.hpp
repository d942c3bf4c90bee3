#pragma once

#include <span>
#include <vector>

#include "revlab/grid.hpp"
#include "revlab/preferences.hpp"
#include "revlab/tensor.hpp"

namespace revlab {

struct MarketConfig {
    std::vector<AgentGroup> groups;
    double supply = 0.0;

    std::size_t k() const { return groups.size(); }
    /// True when all groups share preference, precision and wealth.
    bool homogeneous() const;
    std::vector<double> precisions() const;
};

/// Throws InvalidConfig for an empty market, negative supply or an invalid group.
void validate(const MarketConfig& cfg);

/// K groups with identical preference, precision and wealth.
MarketConfig homogeneous_market(const Preference& pref, double tau, std::size_t k = 3, double wealth = 1.0);

struct ClearingResult {
    double price = 0.5;
    double log_odds = 0.0;
    std::vector<double> demands;
    double residual = 0.0;
    int iterations = 0;
};

/// Search interval for the clearing price, in log-odds.
struct Bracket {
    double lo = -40.0;
    double hi = 40.0;
};

inline constexpr double kClearingTol = 1e-12;

/// Finds p with sum_k x_k(mu_k, p) = supply. Throws NoEquilibrium if the bracket holds no root.
ClearingResult clear_market(const MarketConfig& cfg, std::span<const double> mu, double tol = kClearingTol,
                            Bracket bracket = {});

/// Same as clear_market, with posteriors given directly in log-odds.
ClearingResult clear_log_odds(const MarketConfig& cfg, std::span<const double> posterior_log_odds,
                              double tol = kClearingTol, Bracket bracket = {});

/// Aggregate excess demand at price log-odds y for posterior log-odds l.
double excess_demand(const MarketConfig& cfg, std::span<const double> posterior_log_odds, double y);

/// Homogeneous-or-not CARA price: logit p = sum_k w_k tau_k u_k - supply / sum_j 1/alpha_j,
/// with w_k proportional to 1/alpha_k.
double cara_closed_form(std::span<const double> alpha, std::span<const double> tau, std::span<const double> u,
                        double supply = 0.0);

/// Log-utility price p = sum_k w_k logistic(tau_k u_k), w_k proportional to wealth.
double log_closed_form(std::span<const double> wealth, std::span<const double> tau, std::span<const double> u);

/// Equilibrium price on the G^3 lattice, stored in log-odds to keep extreme prices exact.
class PriceTensor {
public:
    PriceTensor() = default;
    explicit PriceTensor(std::size_t n, double log_odds = 0.0) : y_(n, log_odds) {}

    std::size_t size() const { return y_.size(); }
    double log_odds(std::size_t i, std::size_t j, std::size_t l) const { return y_(i, j, l); }
    double& log_odds(std::size_t i, std::size_t j, std::size_t l) { return y_(i, j, l); }
    double price(std::size_t i, std::size_t j, std::size_t l) const { return logistic(y_(i, j, l)); }
    const Tensor3& log_odds() const { return y_; }
    Tensor3& log_odds() { return y_; }

private:
    Tensor3 y_;
};

/// Clears the market at private posteriors on every cell of the G^3 lattice (K = 3).
PriceTensor no_learning_price_tensor(const MarketConfig& cfg, const SignalGrid& grid, double tol = kClearingTol);

/// Same for any K, flattened with the last group's index fastest. Returns log-odds prices.
std::vector<double> no_learning_lattice(const MarketConfig& cfg, const SignalGrid& grid, double tol = kClearingTol);

struct JensenGap {
    double exact;
    double leading;
};

/// Log-utility price minus logistic(T*/K) for homogeneous tau, with its cubic leading term
/// -(tau^3 / 48K)(U3 - U1^3 / K^2).
JensenGap jensen_gap(double tau, std::span<const double> u);

/// Clearing with a fraction lambda of each group informed (posterior mu_k) and the rest at the prior.
ClearingResult informed_share_clearing(const MarketConfig& cfg, double lambda, std::span<const double> mu_informed,
                                       double tol = kClearingTol);

}  // namespace revlab
