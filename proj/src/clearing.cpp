#include "revlab/clearing.hpp"

#include <cmath>
#include <numeric>

#include "revlab/errors.hpp"
#include "revlab/root.hpp"

namespace revlab {

bool MarketConfig::homogeneous() const {
    for (const auto& g : groups)
        if (!(g == groups.front())) return false;
    return true;
}

std::vector<double> MarketConfig::precisions() const {
    std::vector<double> tau;
    tau.reserve(groups.size());
    for (const auto& g : groups) tau.push_back(g.tau);
    return tau;
}

void validate(const MarketConfig& cfg) {
    if (cfg.groups.empty()) throw InvalidConfig("market needs at least one agent group");
    if (!(cfg.supply >= 0.0) || !std::isfinite(cfg.supply)) throw InvalidConfig("supply must be nonnegative");
    for (const auto& g : cfg.groups) validate(g);
}

MarketConfig homogeneous_market(const Preference& pref, double tau, std::size_t k, double wealth) {
    MarketConfig cfg;
    cfg.groups.assign(k, AgentGroup{pref, tau, wealth});
    validate(cfg);
    return cfg;
}

double excess_demand(const MarketConfig& cfg, std::span<const double> posterior_log_odds, double y) {
    double z = -cfg.supply;
    for (std::size_t k = 0; k < cfg.groups.size(); ++k) {
        const auto& g = cfg.groups[k];
        z += demand_at_gap(g.pref, g.wealth, posterior_log_odds[k] - y, y);
    }
    return z;
}

ClearingResult clear_log_odds(const MarketConfig& cfg, std::span<const double> posterior_log_odds, double tol,
                              Bracket bracket) {
    if (posterior_log_odds.size() != cfg.groups.size())
        throw InvalidInput("one posterior per agent group is required");
    auto f = [&](double y) { return excess_demand(cfg, posterior_log_odds, y); };
    const double flo = f(bracket.lo);
    const double fhi = f(bracket.hi);
    if (flo < -tol || fhi > tol) throw NoEquilibrium("excess demand does not change sign on the price bracket");
    const RootResult r = brent_root(f, bracket.lo, bracket.hi, flo, fhi, tol);

    ClearingResult out;
    out.log_odds = r.x;
    out.price = logistic(r.x);
    out.iterations = r.iterations;
    out.demands.reserve(cfg.groups.size());
    for (std::size_t k = 0; k < cfg.groups.size(); ++k) {
        const auto& g = cfg.groups[k];
        out.demands.push_back(demand_at_gap(g.pref, g.wealth, posterior_log_odds[k] - r.x, r.x));
    }
    out.residual = std::abs(r.fx);
    return out;
}

ClearingResult clear_market(const MarketConfig& cfg, std::span<const double> mu, double tol, Bracket bracket) {
    std::vector<double> l(mu.size());
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (!(mu[k] > 0.0 && mu[k] < 1.0)) throw InvalidInput("posteriors must lie in (0,1)");
        l[k] = logit(mu[k]);
    }
    return clear_log_odds(cfg, l, tol, bracket);
}

double cara_closed_form(std::span<const double> alpha, std::span<const double> tau, std::span<const double> u,
                        double supply) {
    if (alpha.size() != tau.size() || tau.size() != u.size()) throw InvalidInput("length mismatch");
    double tolerance_sum = 0.0;
    double y = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        tolerance_sum += 1.0 / alpha[k];
        y += tau[k] * u[k] / alpha[k];
    }
    return logistic((y - supply) / tolerance_sum);
}

double log_closed_form(std::span<const double> wealth, std::span<const double> tau, std::span<const double> u) {
    if (wealth.size() != tau.size() || tau.size() != u.size()) throw InvalidInput("length mismatch");
    double total = 0.0;
    double p = 0.0;
    for (std::size_t k = 0; k < wealth.size(); ++k) {
        total += wealth[k];
        p += wealth[k] * logistic(tau[k] * u[k]);
    }
    return p / total;
}

std::vector<double> no_learning_lattice(const MarketConfig& cfg, const SignalGrid& grid, double tol) {
    validate(cfg);
    const std::size_t k = cfg.k();
    const std::size_t g = grid.size();
    std::size_t cells = 1;
    for (std::size_t i = 0; i < k; ++i) cells *= g;

    // private posterior log-odds per group and node
    std::vector<std::vector<double>> l(k, std::vector<double>(g));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t i = 0; i < g; ++i) l[a][i] = loglik_ratio(cfg.groups[a].tau, grid[i]);

    std::vector<double> out(cells);
    std::vector<std::size_t> idx(k, 0);
    std::vector<double> post(k);
    for (std::size_t c = 0; c < cells; ++c) {
        for (std::size_t a = 0; a < k; ++a) post[a] = l[a][idx[a]];
        out[c] = clear_log_odds(cfg, post, tol).log_odds;
        for (std::size_t a = k; a-- > 0;) {
            if (++idx[a] < g) break;
            idx[a] = 0;
        }
    }
    return out;
}

PriceTensor no_learning_price_tensor(const MarketConfig& cfg, const SignalGrid& grid, double tol) {
    if (cfg.k() != 3) throw InvalidConfig("price tensor requires exactly three agent groups");
    PriceTensor out(grid.size());
    out.log_odds().data() = no_learning_lattice(cfg, grid, tol);
    return out;
}

JensenGap jensen_gap(double tau, std::span<const double> u) {
    if (u.empty()) throw InvalidInput("jensen_gap needs at least one signal");
    const double k = static_cast<double>(u.size());
    double u1 = 0.0, u3 = 0.0, mean_tanh = 0.0;
    for (double x : u) {
        u1 += x;
        u3 += x * x * x;
        mean_tanh += std::tanh(0.5 * tau * x);
    }
    mean_tanh /= k;
    // logistic(z) - 1/2 = tanh(z/2)/2 keeps the small difference free of cancellation
    const double exact = 0.5 * (mean_tanh - std::tanh(0.5 * tau * u1 / k));
    const double leading = -(tau * tau * tau / (48.0 * k)) * (u3 - u1 * u1 * u1 / (k * k));
    return {exact, leading};
}

ClearingResult informed_share_clearing(const MarketConfig& cfg, double lambda, std::span<const double> mu_informed,
                                       double tol) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidConfig("informed share must lie in [0,1]");
    if (mu_informed.size() != cfg.groups.size()) throw InvalidInput("one posterior per agent group is required");
    if (lambda == 1.0) return clear_market(cfg, mu_informed, tol);

    // each group splits into an informed mass lambda and an uninformed mass 1 - lambda at the prior
    MarketConfig split;
    split.supply = cfg.supply;
    std::vector<double> l;
    for (std::size_t k = 0; k < cfg.groups.size(); ++k) {
        AgentGroup informed = cfg.groups[k];
        AgentGroup uninformed = cfg.groups[k];
        if (lambda > 0.0) {
            informed.wealth *= lambda;
            split.groups.push_back(informed);
            l.push_back(logit(mu_informed[k]));
        }
        uninformed.wealth *= 1.0 - lambda;
        split.groups.push_back(uninformed);
        l.push_back(0.0);
    }
    // CARA demand does not scale with wealth, so mass weights enter through the risk tolerance
    for (std::size_t k = 0, s = 0; k < cfg.groups.size(); ++k) {
        if (!cfg.groups[k].pref.is_cara()) {
            s += lambda > 0.0 ? 2 : 1;
            continue;
        }
        const double alpha = cfg.groups[k].pref.parameter();
        if (lambda > 0.0) split.groups[s++].pref = Preference::cara(alpha / lambda);
        split.groups[s++].pref = Preference::cara(alpha / (1.0 - lambda));
    }
    ClearingResult r = clear_log_odds(split, l, tol);

    // report per-group mass-weighted demand
    ClearingResult out = r;
    out.demands.assign(cfg.groups.size(), 0.0);
    for (std::size_t k = 0, s = 0; k < cfg.groups.size(); ++k) {
        if (lambda > 0.0) out.demands[k] += r.demands[s++];
        out.demands[k] += r.demands[s++];
    }
    return out;
}

}  // namespace revlab
