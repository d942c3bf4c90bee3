#include "revlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "revlab/errors.hpp"

namespace revlab {

SignalGrid make_grid(std::size_t g, double u_max) {
    if (g < 2) throw InvalidConfig("signal grid needs at least 2 points");
    if (!(u_max > 0.0) || !std::isfinite(u_max)) throw InvalidConfig("signal grid half-width must be positive");
    SignalGrid grid;
    grid.u_max_ = u_max;
    grid.spacing_ = 2.0 * u_max / static_cast<double>(g - 1);
    grid.nodes_.resize(g);
    for (std::size_t i = 0; i < g; ++i) grid.nodes_[i] = -u_max + grid.spacing_ * static_cast<double>(i);
    grid.nodes_.back() = u_max;
    // exact zero at the centre node for odd g
    if (g % 2 == 1) grid.nodes_[g / 2] = 0.0;
    return grid;
}

double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

FlaggedValue logit_flagged(double p) {
    bool saturated = false;
    if (!(p >= kLogitEpsilon)) {
        p = kLogitEpsilon;
        saturated = true;
    } else if (p > 1.0 - kLogitEpsilon) {
        p = 1.0 - kLogitEpsilon;
        saturated = true;
    }
    return {std::log(p) - std::log1p(-p), saturated};
}

double logit(double p) { return logit_flagged(p).value; }

double log_signal_density(int state, double tau, double u) {
    const double d = u - static_cast<double>(state) + 0.5;
    return 0.5 * std::log(tau / (2.0 * std::numbers::pi)) - 0.5 * tau * d * d;
}

double signal_density(int state, double tau, double u) { return std::exp(log_signal_density(state, tau, u)); }

double loglik_ratio(double tau, double u) { return tau * u; }

double sufficient_statistic(std::span<const double> tau, std::span<const double> u) {
    if (tau.size() != u.size()) throw InvalidInput("precision and signal vectors differ in length");
    double t = 0.0;
    for (std::size_t k = 0; k < tau.size(); ++k) t += tau[k] * u[k];
    return t;
}

double private_posterior(double tau, double u) { return logistic(tau * u); }

Tensor3 joint_weights(const SignalGrid& grid, std::span<const double> tau) {
    if (tau.size() != 3) throw InvalidInput("joint weights are defined for three signals");
    const std::size_t g = grid.size();
    std::vector<double> f0[3], f1[3];
    for (int k = 0; k < 3; ++k) {
        f0[k].resize(g);
        f1[k].resize(g);
        for (std::size_t i = 0; i < g; ++i) {
            f0[k][i] = signal_density(0, tau[k], grid[i]);
            f1[k][i] = signal_density(1, tau[k], grid[i]);
        }
    }
    Tensor3 w(g);
    double total = 0.0;
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            for (std::size_t l = 0; l < g; ++l) {
                const double v = 0.5 * f1[0][i] * f1[1][j] * f1[2][l] + 0.5 * f0[0][i] * f0[1][j] * f0[2][l];
                w(i, j, l) = v;
                total += v;
            }
    for (double& v : w.data()) v /= total;
    return w;
}

std::vector<double> marginal_weights(const SignalGrid& grid, double tau) {
    std::vector<double> w(grid.size());
    double total = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        w[i] = 0.5 * (signal_density(0, tau, grid[i]) + signal_density(1, tau, grid[i]));
        total += w[i];
    }
    for (double& v : w) v /= total;
    return w;
}

}  // namespace revlab
