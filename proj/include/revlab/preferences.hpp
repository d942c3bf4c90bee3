#pragma once

#include <span>
#include <vector>

namespace revlab {

enum class PreferenceKind { Cara, Crra };

/// CARA with absolute risk aversion alpha, or CRRA with relative risk aversion gamma
/// (gamma == 1 is log utility).
class Preference {
public:
    static Preference cara(double alpha);
    static Preference crra(double gamma);

    PreferenceKind kind() const { return kind_; }
    bool is_cara() const { return kind_ == PreferenceKind::Cara; }
    bool is_log() const { return kind_ == PreferenceKind::Crra && param_ == 1.0; }
    /// alpha for CARA, gamma for CRRA.
    double parameter() const { return param_; }

    friend bool operator==(const Preference&, const Preference&) = default;

private:
    Preference(PreferenceKind kind, double param) : kind_(kind), param_(param) {}
    PreferenceKind kind_ = PreferenceKind::Crra;
    double param_ = 1.0;
};

struct AgentGroup {
    Preference pref = Preference::crra(1.0);
    double tau = 1.0;
    double wealth = 1.0;

    friend bool operator==(const AgentGroup&, const AgentGroup&) = default;
};

/// Throws InvalidConfig unless tau > 0 and wealth > 0.
void validate(const AgentGroup& group);

struct Demand {
    double x;
    bool saturated;
};

/// x = (logit mu - logit p) / alpha.
Demand demand_cara(double alpha, double mu, double p);

/// x = W (R - 1) / ((1 - p) + R p), R = exp((logit mu - logit p) / gamma).
Demand demand_crra(double gamma, double wealth, double mu, double p);

Demand demand(const AgentGroup& group, double mu, double p);

/// Demand as a function of the log-odds gap z = logit mu - logit p, with the price also
/// given in log-odds (y = logit p). Never saturates.
double demand_at_gap(const Preference& pref, double wealth, double gap, double y);

/// Derivative of demand_at_gap with respect to the gap.
double demand_gap_slope(const Preference& pref, double wealth, double gap, double y);

/// |gamma x / W - z| / max(1, |z|) with z the log-odds gap; shrinks like 1/gamma.
double cara_limit_check(double gamma, double wealth, double mu, double p);

/// Log of the ratio of the two sides of the first-order condition
/// mu (1-p) U'(W + (1-p) x) = (1-mu) p U'(W - p x).
double foc_residual(const Preference& pref, double wealth, double mu, double p, double x);

struct CurvatureReport {
    std::vector<double> second_differences;  // one per interior probe point
    double max_abs = 0.0;
    double min_abs = 0.0;
};

/// Divided second differences of demand against the log-odds gap on z_grid (>= 3 increasing points).
CurvatureReport linearity_probe(const Preference& pref, double wealth, double p, std::span<const double> z_grid);

/// Utility of terminal wealth; -inf outside the CRRA domain.
double utility(const Preference& pref, double w);

/// Inverse of utility().
double inverse_utility(const Preference& pref, double u);

}  // namespace revlab
