#include "revlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "revlab/errors.hpp"
#include "revlab/isotonic.hpp"

namespace revlab {

RegressionReport weighted_regression(std::span<const double> x, std::span<const double> y,
                                     std::span<const double> w) {
    if (x.size() != y.size() || x.size() != w.size()) throw InvalidInput("regression inputs differ in length");
    double sw = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        mx += w[i] * x[i];
        my += w[i] * y[i];
    }
    if (!(sw > 0.0)) throw DegenerateRegression("regression weights sum to zero");
    mx /= sw;
    my /= sw;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += w[i] * dx * dx;
        syy += w[i] * dy * dy;
        sxy += w[i] * dx * dy;
    }
    const double scale = std::numeric_limits<double>::epsilon() * sw;
    if (sxx <= scale * (1.0 + mx * mx)) throw DegenerateRegression("regressor has zero variance");
    if (syy <= scale * (1.0 + my * my)) throw DegenerateRegression("response has zero variance");

    RegressionReport r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    r.r2 = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    r.deficit = 1.0 - r.r2;
    r.n_cells = x.size();
    return r;
}

RegressionReport revelation_deficit(const PriceTensor& prices, const SignalGrid& grid, std::span<const double> tau,
                                    const Tensor3& weights) {
    const std::size_t g = grid.size();
    if (tau.size() != 3) throw InvalidInput("revelation deficit needs three precisions");
    if (prices.size() != g || weights.size() != g) throw InvalidInput("price tensor and weights must match the grid");
    std::vector<double> x(g * g * g), y(g * g * g);
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            for (std::size_t l = 0; l < g; ++l) {
                const std::size_t c = (i * g + j) * g + l;
                x[c] = tau[0] * grid[i] + tau[1] * grid[j] + tau[2] * grid[l];
                y[c] = prices.log_odds(i, j, l);
            }
    return weighted_regression(x, y, weights.data());
}

RegressionReport no_learning_deficit(const MarketConfig& cfg, const SignalGrid& grid) {
    const std::vector<double> y = no_learning_lattice(cfg, grid);
    const std::size_t k = cfg.k();
    const std::size_t g = grid.size();
    std::vector<double> x(y.size()), w(y.size());
    std::vector<std::size_t> idx(k, 0);
    for (std::size_t c = 0; c < y.size(); ++c) {
        double t = 0.0, l0 = 0.0, l1 = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            const double tau = cfg.groups[a].tau;
            const double u = grid[idx[a]];
            t += tau * u;
            l0 += log_signal_density(0, tau, u);
            l1 += log_signal_density(1, tau, u);
        }
        x[c] = t;
        w[c] = 0.5 * (std::exp(l0) + std::exp(l1));
        for (std::size_t a = k; a-- > 0;) {
            if (++idx[a] < g) break;
            idx[a] = 0;
        }
    }
    return weighted_regression(x, y, w);
}

double trade_volume(std::span<const double> x) {
    double v = 0.0;
    for (double xi : x) v += std::abs(xi);
    return 0.5 * v;
}

double expected_volume(const MarketConfig& cfg, const PriceTensor& prices, const std::vector<Tensor3>& posteriors,
                       const Tensor3& weights) {
    if (posteriors.size() != cfg.k()) throw InvalidInput("one posterior tensor per group is required");
    const auto& y = prices.log_odds().data();
    const auto& w = weights.data();
    double total = 0.0;
    std::vector<double> x(cfg.k());
    for (std::size_t c = 0; c < y.size(); ++c) {
        for (std::size_t k = 0; k < cfg.k(); ++k) {
            const auto& g = cfg.groups[k];
            x[k] = demand_at_gap(g.pref, g.wealth, posteriors[k].data()[c] - y[c], y[c]);
        }
        total += w[c] * trade_volume(x);
    }
    return total;
}

std::vector<Tensor3> private_posterior_tensors(const MarketConfig& cfg, const SignalGrid& grid) {
    if (cfg.k() != 3) throw InvalidConfig("posterior tensors require three groups");
    const std::size_t g = grid.size();
    std::vector<Tensor3> out(3, Tensor3(g));
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            for (std::size_t l = 0; l < g; ++l) {
                out[0](i, j, l) = loglik_ratio(cfg.groups[0].tau, grid[i]);
                out[1](i, j, l) = loglik_ratio(cfg.groups[1].tau, grid[j]);
                out[2](i, j, l) = loglik_ratio(cfg.groups[2].tau, grid[l]);
            }
    return out;
}

double expected_volume_no_learning(const MarketConfig& cfg, const SignalGrid& grid) {
    const PriceTensor prices = no_learning_price_tensor(cfg, grid);
    return expected_volume(cfg, prices, private_posterior_tensors(cfg, grid), joint_weights(grid, cfg.precisions()));
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Strict: return "strict";
        case SolveStatus::Fallback: return "fallback";
        case SolveStatus::Diverged: return "diverged";
    }
    return "unknown";
}

std::size_t monotonicity_violations(const PosteriorTable& table, double slack) {
    std::size_t bad = 0;
    const std::size_t nu = table.u_size(), np = table.p_size();
    std::vector<double> line;
    for (std::size_t iu = 0; iu < nu; ++iu) {
        line.assign(table.values().begin() + iu * np, table.values().begin() + (iu + 1) * np);
        bad += count_decreases(line, slack);
    }
    line.resize(nu);
    for (std::size_t ip = 0; ip < np; ++ip) {
        for (std::size_t iu = 0; iu < nu; ++iu) line[iu] = table.log_odds(iu, ip);
        bad += count_decreases(line, slack);
    }
    return bad;
}

DiagnosticsReport diagnostics(std::span<const double> residual, const PosteriorTable& table, double strict_tol) {
    DiagnosticsReport r;
    for (double e : residual) {
        if (std::isnan(e)) continue;
        r.residual_inf = std::max(r.residual_inf, std::abs(e));
    }
    r.mono_violations = monotonicity_violations(table);
    if (!std::isfinite(r.residual_inf))
        r.status = SolveStatus::Diverged;
    else if (r.residual_inf < strict_tol && r.mono_violations == 0)
        r.status = SolveStatus::Strict;
    else
        r.status = SolveStatus::Fallback;
    return r;
}

}  // namespace revlab
