#include "revlab/mechanisms.hpp"

#include <algorithm>

#include "revlab/errors.hpp"

namespace revlab {

MarketConfig to_market(const MechanismConfig& cfg) {
    if (cfg.prefs.size() != 3 || cfg.tau.size() != 3) throw InvalidConfig("mechanism rows have three groups");
    if (!cfg.wealth.empty() && cfg.wealth.size() != 3) throw InvalidConfig("wealth needs one entry per group");
    MarketConfig m;
    for (std::size_t k = 0; k < 3; ++k) m.groups.push_back({cfg.prefs[k], cfg.tau[k], cfg.wealth.empty() ? 1.0 : cfg.wealth[k]});
    validate(m);
    return m;
}

MechanismResult run_mechanism(const MechanismConfig& cfg, std::size_t grid_size, const SolverConfig& solver) {
    const MarketConfig market = to_market(cfg);
    const SignalGrid grid = make_grid(grid_size);
    MechanismResult out;
    out.label = cfg.label;
    if (cfg.learning == Learning::NoLearning) {
        out.regression = revelation_deficit(no_learning_price_tensor(market, grid), grid, cfg.tau,
                                            joint_weights(grid, cfg.tau));
        return out;
    }
    // heterogeneous risk aversion is reached by continuation from the mean-parameter market
    const bool mixed =
        std::any_of(cfg.prefs.begin(), cfg.prefs.end(), [&](const Preference& p) { return p != cfg.prefs[0]; });
    const ReeSolution sol =
        mixed ? solve_ree_continuation(market, grid, solver) : solve_ree(ReeProblem(market, grid, solver));
    out.regression = sol.regression;
    out.status = sol.diagnostics.status;
    return out;
}

std::vector<MechanismConfig> standard_mechanisms() {
    auto crra = [](double a, double b, double c) {
        return std::vector<Preference>{Preference::crra(a), Preference::crra(b), Preference::crra(c)};
    };
    return {
        {"pure-jensen", crra(2, 2, 2), {2, 2, 2}, {}, Learning::NoLearning},
        {"het-gamma", crra(1, 3, 10), {1, 1, 1}, {}, Learning::NoLearning},
        {"het-tau", crra(2, 2, 2), {1, 3, 10}, {}, Learning::NoLearning},
        {"aligned", crra(0.5, 2, 8), {10, 3, 1}, {}, Learning::NoLearning},
        {"opposed", crra(0.5, 2, 8), {1, 3, 10}, {}, Learning::NoLearning},
        {"extreme-opposed", crra(0.1, 10, 10), {0.1, 10, 10}, {}, Learning::NoLearning},
        {"het-alpha-cara",
         {Preference::cara(1), Preference::cara(3), Preference::cara(10)},
         {2, 2, 2},
         {},
         Learning::NoLearning},
    };
}

OrderingVerdict ordering_check(const std::vector<std::pair<std::string, double>>& deficits) {
    auto get = [&](const std::string& label) {
        const auto it = std::find_if(deficits.begin(), deficits.end(), [&](const auto& d) { return d.first == label; });
        if (it == deficits.end()) throw InvalidInput("missing mechanism row: " + label);
        return it->second;
    };
    OrderingVerdict v;
    auto require = [&](const char* lo, const char* hi) {
        if (!(get(lo) < get(hi))) {
            v.holds = false;
            v.failures.push_back(std::string(lo) + " < " + hi);
        }
    };
    require("pure-jensen", "het-tau");
    require("het-tau", "aligned");
    require("aligned", "opposed");
    require("opposed", "extreme-opposed");
    require("het-tau", "het-gamma");
    return v;
}

}  // namespace revlab
