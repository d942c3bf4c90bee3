#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "revlab/clearing.hpp"
#include "revlab/grid.hpp"
#include "revlab/preferences.hpp"
#include "revlab/tensor.hpp"

namespace revlab {

class ReeProblem;
struct ReeSolution;

/// Certainty equivalent of holding x units at price log-odds y when the payoff has log-odds l.
/// Returns 0 for CRRA positions that ruin the agent in one state.
double certainty_equivalent_at(const Preference& pref, double wealth, double l, double y, double x);

/// Certainty equivalent of optimal trading at belief mu and price p. Equals the wealth iff mu == p.
double certainty_equivalent(const Preference& pref, double wealth, double mu, double p);

struct InformationOptions {
    std::size_t group = 0;   // the small group whose signal is valued
    double tau_extra = 0.0;  // > 0 values a fresh signal of this precision instead of the group's own
    double band = 1.0;       // contour extrapolation band, in grid spacings
};

struct CertaintyEquivalentReport {
    double ce_informed = 0.0;    // ex-ante mean certainty equivalent of trading on the signal
    double ce_uninformed = 0.0;  // same belief, trade chosen without the signal
    double v_info = 0.0;
    Tensor3 per_cell;            // nonnegative gain at every lattice cell
};

/// Value of a signal to a small group trading at the lattice prices. Both the informed and the
/// uninformed agent condition on the price through the level sets of the price tensor; the
/// uninformed trade is evaluated under the informed belief.
CertaintyEquivalentReport information_report(const MarketConfig& cfg, const SignalGrid& grid, const PriceTensor& prices,
                                             const InformationOptions& opts = {});

double value_of_information(const MarketConfig& cfg, const SignalGrid& grid, const PriceTensor& prices,
                            const InformationOptions& opts = {});

/// Value at a solved contour equilibrium.
double value_of_information(const ReeProblem& problem, const ReeSolution& solution, const InformationOptions& opts = {});

/// Lattice prices when a fraction lambda of every group trades on its signal and the rest holds the prior.
PriceTensor informed_share_prices(const MarketConfig& cfg, const SignalGrid& grid, double lambda);

double value_by_informed_share(const MarketConfig& cfg, const SignalGrid& grid, double lambda,
                               const InformationOptions& opts = {});

/// V(lambda) with memoised evaluations, shared across a cost ladder.
class InformationValueCurve {
public:
    InformationValueCurve(MarketConfig cfg, SignalGrid grid, InformationOptions opts = {});
    double operator()(double lambda);
    std::size_t evaluations() const { return cache_.size(); }

private:
    MarketConfig cfg_;
    SignalGrid grid_;
    InformationOptions opts_;
    std::map<double, double> cache_;
};

enum class AcquisitionBoundary { Interior, Corner0, Corner1 };

struct AcquisitionEquilibrium {
    double cost = 0.0;
    double lambda = 0.0;
    double value = 0.0;  // V at lambda
    AcquisitionBoundary boundary = AcquisitionBoundary::Corner0;
    bool monotone = true;  // false when V both rises and falls over the scan; no root is claimed then
};

struct AcquisitionOptions {
    double tol = 1e-8;           // on |V - c| at an interior root
    double lambda_floor = 1e-4;  // stands in for 0+
    std::size_t scan_points = 11;
    double slack = 1e-12;        // change between scan points treated as flat
};

/// Informed share at which the marginal acquirer is indifferent. Costs above every scanned value give
/// corner-0, costs below every scanned value give corner-1, anything in between is bisected.
AcquisitionEquilibrium gs_equilibrium(InformationValueCurve& curve, double cost, const AcquisitionOptions& opts = {});

AcquisitionEquilibrium gs_equilibrium(const MarketConfig& cfg, const SignalGrid& grid, double cost,
                                      const AcquisitionOptions& opts = {}, const InformationOptions& info = {});

const char* to_string(AcquisitionBoundary b);

}  // namespace revlab
