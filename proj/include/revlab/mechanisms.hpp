#pragma once

#include <string>
#include <utility>
#include <vector>

#include "revlab/clearing.hpp"
#include "revlab/metrics.hpp"
#include "revlab/preferences.hpp"
#include "revlab/ree.hpp"

namespace revlab {

enum class Learning { NoLearning, Ree };

struct MechanismConfig {
    std::string label;
    std::vector<Preference> prefs;  // one per group
    std::vector<double> tau;
    std::vector<double> wealth;     // empty means unit wealth
    Learning learning = Learning::NoLearning;
};

struct MechanismResult {
    std::string label;
    RegressionReport regression;
    SolveStatus status = SolveStatus::Strict;
};

MarketConfig to_market(const MechanismConfig& cfg);

/// Deficit of the configured equilibrium on a G-point grid.
MechanismResult run_mechanism(const MechanismConfig& cfg, std::size_t grid_size = 20, const SolverConfig& solver = {});

/// The decomposition rows: pure-jensen, het-gamma, het-tau, aligned, opposed, extreme-opposed, het-alpha-cara.
std::vector<MechanismConfig> standard_mechanisms();

struct OrderingVerdict {
    bool holds = true;
    std::vector<std::string> failures;
};

/// pure-jensen < het-tau < aligned < opposed < extreme-opposed, and het-gamma > het-tau.
/// Throws InvalidInput when one of the six labels is missing.
OrderingVerdict ordering_check(const std::vector<std::pair<std::string, double>>& deficits);

}  // namespace revlab
