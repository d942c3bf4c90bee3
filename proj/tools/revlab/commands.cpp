#include "commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "revlab/clearing.hpp"
#include "revlab/econ.hpp"
#include "revlab/errors.hpp"
#include "revlab/grid.hpp"
#include "revlab/mechanisms.hpp"
#include "revlab/metrics.hpp"
#include "revlab/ree.hpp"

namespace revlab::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> broadcast(const std::vector<double>& v, std::size_t k, const char* name) {
    if (v.size() == k) return v;
    if (v.size() == 1) return std::vector<double>(k, v.front());
    throw InvalidConfig(std::string("--") + name + " needs one value or one per group");
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += format_cell(v[i]);
    }
    return out;
}

bool is_cara(const Options& o) { return o.preference == "cara"; }

const std::vector<double>& risk_parameters(const Options& o) { return is_cara(o) ? o.alpha : o.gamma; }

MarketConfig market(const Options& o, std::size_t k) {
    const auto risk = broadcast(risk_parameters(o), k, is_cara(o) ? "alpha" : "gamma");
    const auto tau = broadcast(o.tau, k, "tau");
    const auto wealth = broadcast(o.wealth, k, "wealth");
    MarketConfig cfg;
    cfg.supply = o.supply;
    for (std::size_t a = 0; a < k; ++a) {
        const Preference pref = is_cara(o) ? Preference::cara(risk[a]) : Preference::crra(risk[a]);
        cfg.groups.push_back(AgentGroup{pref, tau[a], wealth[a]});
    }
    validate(cfg);
    return cfg;
}

MarketConfig market3(const Options& o) {
    if (o.k != 3) throw InvalidConfig("this experiment runs on the three-group lattice; --k must be 3");
    return market(o, 3);
}

Options with_crra(Options o, double gamma) {
    o.preference = "crra";
    o.gamma = {gamma};
    return o;
}

Options with_cara(Options o) {
    o.preference = "cara";
    return o;
}

SolverConfig solver(const Options& o) {
    SolverConfig s;
    s.damping = o.damping;
    s.anderson_memory = o.anderson;
    s.max_iter = o.max_iter;
    s.strict_tol = o.tol;
    s.threads = o.threads;
    validate(s);
    return s;
}

struct Solved {
    ReeProblem problem;
    ReeSolution solution;
};

Solved solve(const Options& o, const MarketConfig& cfg, std::size_t g, const IterationCallback& cb = {}) {
    ReeProblem problem(cfg, make_grid(g), solver(o));
    ReeSolution sol;
    const bool mixed = std::any_of(cfg.groups.begin(), cfg.groups.end(),
                                   [&](const AgentGroup& a) { return a.pref != cfg.groups.front().pref; });
    if (o.seed_posterior == "no-learning" && mixed && o.continuation > 0) {
        sol = solve_ree_continuation(cfg, problem.grid(), problem.solver(), o.continuation, cb);
    } else if (o.seed_posterior == "no-learning") {
        sol = solve_ree(problem, SeedKind::NoLearning, nullptr, cb);
    } else if (o.seed_posterior == "full-revelation") {
        sol = solve_ree(problem, SeedKind::FullRevelation, nullptr, cb);
    } else {
        std::ifstream in(o.seed_posterior);
        if (!in) throw InvalidConfig("cannot open checkpoint " + o.seed_posterior);
        const BeliefState seed = load_checkpoint(in, problem);
        sol = solve_ree(problem, SeedKind::Custom, &seed, cb);
    }
    return {std::move(problem), std::move(sol)};
}

bool diverged(const ReeSolution& s) { return s.diagnostics.status == SolveStatus::Diverged; }

Cell status_cell(const ReeSolution& s) { return to_string(s.diagnostics.status); }

// --- single runs -----------------------------------------------------------

CommandResult no_learning(const Options& o) {
    const MarketConfig cfg = market(o, o.k);
    const RegressionReport r = no_learning_deficit(cfg, make_grid(o.grid));
    Table t{"no-learning", {"preference", is_cara(o) ? "alpha" : "gamma", "tau", "G", "K", "deficit", "slope", "intercept"}};
    t.record = true;
    t.add({o.preference, join(risk_parameters(o)), join(o.tau), static_cast<long long>(o.grid),
           static_cast<long long>(o.k), r.deficit, r.slope, r.intercept});
    return {t};
}

CommandResult ree(const Options& o) {
    const auto [problem, sol] = solve(o, market3(o), o.grid);
    if (!o.checkpoint.empty()) {
        std::ofstream out(o.checkpoint);
        if (!out) throw InvalidConfig("cannot write checkpoint " + o.checkpoint);
        save_checkpoint(out, problem, sol);
    }
    Table t{"ree",
            {"preference", is_cara(o) ? "alpha" : "gamma", "tau", "G", "deficit", "slope", "residual",
             "mono_violations", "status", "iterations"}};
    t.record = true;
    t.add({o.preference, join(risk_parameters(o)), join(o.tau), static_cast<long long>(o.grid), sol.regression.deficit,
           sol.regression.slope, Sci{sol.diagnostics.residual_inf},
           static_cast<long long>(sol.diagnostics.mono_violations), status_cell(sol),
           static_cast<long long>(sol.iterations)});
    return {t, diverged(sol)};
}

CommandResult volume(const Options& o) {
    const MarketConfig cfg = market3(o);
    const double v0 = expected_volume_no_learning(cfg, make_grid(o.grid));
    const auto [problem, sol] = solve(o, cfg, o.grid);
    Table t{"volume", {"preference", is_cara(o) ? "alpha" : "gamma", "tau", "G", "no_learning_volume", "ree_volume", "status"}};
    t.record = true;
    t.add({o.preference, join(risk_parameters(o)), join(o.tau), static_cast<long long>(o.grid), v0,
           expected_volume(problem, sol), status_cell(sol)});
    return {t, diverged(sol)};
}

const std::vector<double> kLambdaLadder{1e-4, 0.1, 0.25, 0.5, 0.75, 1.0};

CommandResult value_info(const Options& o) {
    const MarketConfig cfg = market3(o);
    const SignalGrid grid = make_grid(o.grid);
    InformationValueCurve curve(cfg, grid);
    Table t{"value-info", {"lambda", "V"}};
    for (double l : o.lambda.empty() ? kLambdaLadder : o.lambda) t.add({l, curve(l)});
    return {t};
}

CommandResult gs(const Options& o) {
    const MarketConfig cfg = market3(o);
    InformationValueCurve curve(cfg, make_grid(o.grid));
    std::vector<double> costs = o.cost;
    if (costs.empty()) costs.push_back(0.5 * (curve(AcquisitionOptions{}.lambda_floor) + curve(1.0)));
    Table t{"gs", {"cost", "lambda", "V", "boundary", "monotone"}};
    for (double c : costs) {
        const AcquisitionEquilibrium eq = gs_equilibrium(curve, c);
        t.add({c, eq.lambda, eq.value, std::string(to_string(eq.boundary)), std::string(eq.monotone ? "yes" : "no")});
    }
    return {t};
}

CommandResult curvature(const Options& o) {
    const auto [problem, sol] = solve(o, market3(o), o.grid);
    const SignalGrid& grid = problem.grid();
    std::size_t own = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::abs(grid[i] - 1.0) < std::abs(grid[own] - 1.0)) own = i;
    std::vector<double> levels;
    for (int i = 1; i < 20; ++i) levels.push_back(0.05 * i);
    const CurvatureSummary s = contour_curvature_report(sol.prices, grid, own, levels, problem.solver().band);
    Table t{"curvature", {"price", "crossings", "min_second_difference", "max_second_difference", "sign", "note"}};
    for (const auto& l : s.levels)
        t.add({l.level, static_cast<long long>(l.crossings), l.min_second_difference, l.max_second_difference,
               static_cast<long long>(l.sign), l.note});
    t.add({s.critical_level, 0LL, kNaN, kNaN, 0LL, std::string("critical level")});
    return {t, diverged(sol)};
}

// --- tables ------------------------------------------------------------------

CommandResult table_smooth(const Options& o) {
    const std::array<double, 3> taus{0.5, 1.0, 2.0};
    const SignalGrid grid = make_grid(o.grid);
    Table t{"table-smooth", {"gamma", "tau=0.5", "tau=1.0", "tau=2.0"}};
    auto row = [&](Options base, Cell label) {
        std::vector<Cell> r{std::move(label)};
        for (double tau : taus) {
            base.tau = {tau};
            r.push_back(no_learning_deficit(market3(base), grid).deficit);
        }
        t.add(std::move(r));
    };
    for (double g : {0.1, 0.3, 0.5, 1.0, 3.0, 10.0}) row(with_crra(o, g), g);
    row(with_cara(o), std::string("CARA"));
    return {t};
}

CommandResult table_gladder(const Options& o) {
    const MarketConfig cfg = market3(o);
    Table t{"table-gladder", {"G", "1-R^2", "slope", "||F||_inf", "status"}};
    bool bad = false;
    for (std::size_t g : {10, 12, 15, 18, 20}) {
        const auto [problem, sol] = solve(o, cfg, g);
        bad = bad || diverged(sol);
        t.add({static_cast<long long>(g), sol.regression.deficit, sol.regression.slope, Sci{sol.diagnostics.residual_inf},
               status_cell(sol)});
    }
    return {t, bad};
}

CommandResult table_ree_gamma(const Options& o) {
    Table t{"table-ree-gamma", {"gamma", "1-R^2", "slope on T*", "||F||_inf", "status"}};
    bool bad = false;
    for (double g : {0.1, 0.3, 0.5, 1.0, 2.0, 4.0}) {
        const auto [problem, sol] = solve(o, market3(with_crra(o, g)), o.grid);
        bad = bad || diverged(sol);
        t.add({g, sol.regression.deficit, sol.regression.slope, Sci{sol.diagnostics.residual_inf}, status_cell(sol)});
    }
    return {t, bad};
}

CommandResult table_posteriors(const Options& o) {
    const std::array<double, 3> u{1.0, -1.0, 1.0};
    const MarketConfig crra = market3(with_crra(o, o.gamma.front()));
    const MarketConfig cara = market3(with_cara(o));

    std::array<double, 3> prior{};
    std::vector<double> private_lo(3);
    for (std::size_t k = 0; k < 3; ++k) {
        private_lo[k] = loglik_ratio(crra.groups[k].tau, u[k]);
        prior[k] = logistic(private_lo[k]);
    }
    const double p_nl = clear_log_odds(crra, private_lo).price;

    const auto [crra_problem, crra_sol] = solve(o, crra, o.grid);
    const AgentView ree = posteriors_at(crra_problem, crra_sol, u);
    const auto [cara_problem, cara_sol] = solve(o, cara, o.grid);
    const AgentView fr = posteriors_at(cara_problem, cara_sol, u);

    Table t{"table-posteriors", {"quantity", "Prior", "No-learning", "CRRA REE", "CARA / FR"}};
    t.add({std::string("mu1"), prior[0], prior[0], ree.mu1, fr.mu1});
    t.add({std::string("mu2"), prior[1], prior[1], ree.mu2, fr.mu2});
    t.add({std::string("mu3"), prior[2], prior[2], ree.mu3, fr.mu3});
    t.add({std::string("price"), std::string("--"), p_nl, ree.price, fr.price});
    return {t, diverged(crra_sol) || diverged(cara_sol)};
}

const std::map<std::string, std::string>& channels() {
    static const std::map<std::string, std::string> c{
        {"pure-jensen", "pure Jensen gap"},
        {"het-gamma", "+ het. CRRA risk aversion"},
        {"het-tau", "+ het. precision"},
        {"aligned", "low-gamma = high-tau (stabilising)"},
        {"opposed", "low-gamma = low-tau (destabilising)"},
        {"extreme-opposed", "endogenous noise trader"},
        {"het-alpha-cara", "het. CARA, REE to FR"},
    };
    return c;
}

CommandResult table_mechanisms(const Options& o) {
    Table t{"table-mechanisms", {"Configuration", "1-R^2", "Channel"}};
    bool bad = false;
    for (MechanismConfig m : standard_mechanisms()) {
        const std::string channel = channels().at(m.label);
        t.add({m.label + " (no-learning)", run_mechanism(m, o.grid, solver(o)).regression.deficit, channel});
        if (m.label == "het-alpha-cara") {
            m.learning = Learning::Ree;
            const MechanismResult r = run_mechanism(m, o.grid, solver(o));
            bad = bad || r.status == SolveStatus::Diverged;
            t.add({m.label + " (REE)", r.regression.deficit, channel});
        }
    }
    return {t, bad};
}

// --- figures -------------------------------------------------------------------

std::string series_name(const char* prefix, double v) { return std::string(prefix) + format_cell(v); }

void figure_knife_edge(const Options& o, Table& t) {
    const SignalGrid grid = make_grid(15);
    const std::vector<double> taus{0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0};
    auto sweep = [&](Options base, const std::string& label) {
        for (double tau : taus) {
            base.tau = {tau};
            t.add({tau, no_learning_deficit(market3(base), grid).deficit, label});
        }
    };
    for (double g : {0.5, 1.0, 4.0}) sweep(with_crra(o, g), series_name("gamma=", g));
    sweep(with_cara(o), "CARA");
}

bool figure_ree_panels(const Options& o, Table& t) {
    bool bad = false;
    for (double g : {0.5, 1.0, 4.0}) {
        for (double tau : {0.5, 1.0, 2.0}) {
            Options run = with_crra(o, g);
            run.tau = {tau};
            const auto [problem, sol] = solve(run, market3(run), o.grid);
            bad = bad || diverged(sol);
            t.add({tau, sol.regression.deficit, series_name("a:gamma=", g)});
        }
    }
    for (double g : {0.5, 1.0, 2.0, 4.0}) {
        Options run = with_crra(o, g);
        run.tau = {2.0};
        const MarketConfig cfg = market3(run);
        const auto [problem, sol] = solve(run, cfg, o.grid);
        bad = bad || diverged(sol);
        t.add({g, sol.regression.deficit, std::string("b:ree")});
        t.add({g, no_learning_deficit(cfg, make_grid(o.grid)).deficit, std::string("b:no-learning")});
    }
    return bad;
}

bool figure_volume(const Options& o, Table& t) {
    bool bad = false;
    for (double g : {0.1, 0.25, 0.5, 1.4, 2.0}) {
        const auto [problem, sol] = solve(o, market3(with_crra(o, g)), o.grid);
        bad = bad || diverged(sol);
        t.add({g, expected_volume(problem, sol), std::string("CRRA")});
    }
    const auto [problem, sol] = solve(o, market3(with_cara(o)), o.grid);
    t.add({kInf, expected_volume(problem, sol), std::string("CARA")});
    return bad || diverged(sol);
}

void figure_value_info(const Options& o, Table& t) {
    const SignalGrid grid = make_grid(o.grid);
    auto sweep = [&](const Options& run, const std::string& label) {
        InformationValueCurve curve(market3(run), grid);
        for (double l : o.lambda.empty() ? kLambdaLadder : o.lambda) t.add({l, curve(l), label});
    };
    for (double g : {0.5, 1.0, 2.0, 4.0}) sweep(with_crra(o, g), series_name("gamma=", g));
    sweep(with_cara(o), "CARA");
}

void figure_gs(const Options& o, Table& t) {
    // net value V - c of a signal valued at full participation, on one cost axis shared by every series
    const SignalGrid grid = make_grid(o.grid);
    std::vector<std::pair<std::string, double>> values;
    for (double g : {0.5, 1.0, 2.0})
        values.emplace_back(series_name("gamma=", g), value_by_informed_share(market3(with_crra(o, g)), grid, 1.0));
    values.emplace_back("CARA", value_by_informed_share(market3(with_cara(o)), grid, 1.0));
    double top = 0.0;
    for (const auto& v : values) top = std::max(top, v.second);
    const double span = top > 0.0 ? 1.2 * top : 1e-3;
    for (const auto& [label, v] : values)
        for (int i = 0; i <= 12; ++i) {
            const double c = span * i / 12.0;
            t.add({c, v - c, label});
        }
}

bool figure_mechanisms(const Options& o, Table& t) {
    bool bad = false;
    long long row = 0;
    for (MechanismConfig m : standard_mechanisms()) {
        const MechanismResult r = run_mechanism(m, o.grid, solver(o));
        bad = bad || r.status == SolveStatus::Diverged;
        t.add({static_cast<double>(row++), r.regression.deficit, m.label});
    }
    return bad;
}

bool figure_convergence(const Options& o, Table& t) {
    std::vector<IterationRecord> records;
    const auto [problem, sol] = solve(o, market3(o), o.grid, [&](const IterationRecord& r) { records.push_back(r); });
    for (const auto& r : records) t.add({static_cast<double>(r.iteration), r.residual, r.phase});
    return diverged(sol);
}

CommandResult figure(const Options& o) {
    Table t{"figure-" + o.figure, {"x", "y", "series"}};
    bool bad = false;
    if (o.figure == "knife-edge")
        figure_knife_edge(o, t);
    else if (o.figure == "ree-panels")
        bad = figure_ree_panels(o, t);
    else if (o.figure == "volume")
        bad = figure_volume(o, t);
    else if (o.figure == "value-info")
        figure_value_info(o, t);
    else if (o.figure == "gs")
        figure_gs(o, t);
    else if (o.figure == "mechanisms")
        bad = figure_mechanisms(o, t);
    else if (o.figure == "convergence")
        bad = figure_convergence(o, t);
    else
        throw InvalidConfig("unknown figure id " + o.figure);
    return {t, bad};
}

}  // namespace

const std::vector<CommandSpec>& commands() {
    static const std::vector<CommandSpec> c{
        {"no-learning", "deficit and regression of the private-signal equilibrium", no_learning},
        {"ree", "solve the rational-expectations equilibrium", ree},
        {"table-smooth", "no-learning deficit across gamma and tau", table_smooth},
        {"table-gladder", "REE deficit as the grid is refined", table_gladder},
        {"table-posteriors", "posteriors and price at u = (1, -1, 1)", table_posteriors},
        {"table-mechanisms", "deficit by heterogeneity channel", table_mechanisms},
        {"table-ree-gamma", "REE deficit and slope across gamma", table_ree_gamma},
        {"volume", "expected trade volume with and without learning", volume},
        {"value-info", "value of information against the informed share", value_info},
        {"gs", "informed share at which acquisition breaks even", gs},
        {"curvature", "curvature of price contours in one own-signal slice", curvature},
        {"figure", "data series behind a figure", figure},
    };
    return c;
}

const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids{"knife-edge", "ree-panels", "volume", "value-info",
                                              "gs", "mechanisms", "convergence"};
    return ids;
}

}  // namespace revlab::cli
