#include "revlab/preferences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "revlab/errors.hpp"
#include "revlab/grid.hpp"

namespace revlab {

Preference Preference::cara(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidConfig("CARA risk aversion must be positive and finite");
    return {PreferenceKind::Cara, alpha};
}

Preference Preference::crra(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidConfig("CRRA risk aversion must be positive and finite");
    return {PreferenceKind::Crra, gamma};
}

void validate(const AgentGroup& group) {
    if (!(group.tau > 0.0) || !std::isfinite(group.tau)) throw InvalidConfig("signal precision must be positive");
    if (!(group.wealth > 0.0) || !std::isfinite(group.wealth)) throw InvalidConfig("wealth must be positive");
}

double demand_at_gap(const Preference& pref, double wealth, double gap, double y) {
    if (pref.is_cara()) return gap / pref.parameter();
    // x = W (R - 1) / (q + R p) with R = exp(gap / gamma), p = logistic(y), q = 1 - p
    const double p = logistic(y);
    const double q = logistic(-y);
    const double d = gap / pref.parameter();
    if (d > 0.0) {
        const double e = std::exp(-d);
        return wealth * (1.0 - e) / (q * e + p);
    }
    const double e = std::exp(d);
    return wealth * (e - 1.0) / (q + e * p);
}

double demand_gap_slope(const Preference& pref, double wealth, double gap, double y) {
    if (pref.is_cara()) return 1.0 / pref.parameter();
    // dx/dz = (W / gamma) R / (q + R p)^2
    const double p = logistic(y);
    const double q = logistic(-y);
    const double g = pref.parameter();
    const double d = gap / g;
    if (d > 0.0) {
        const double e = std::exp(-d);
        const double den = q * e + p;
        return wealth / g * e / (den * den);
    }
    const double e = std::exp(d);
    const double den = q + e * p;
    return wealth / g * e / (den * den);
}

namespace {

struct Gap {
    double z;
    bool saturated;
};

Gap log_odds_gap(double mu, double p) {
    const auto lm = logit_flagged(mu);
    const auto lp = logit_flagged(p);
    return {lm.value - lp.value, lm.saturated || lp.saturated};
}

}  // namespace

Demand demand_cara(double alpha, double mu, double p) {
    const Gap g = log_odds_gap(mu, p);
    return {g.z / alpha, g.saturated};
}

Demand demand_crra(double gamma, double wealth, double mu, double p) {
    const auto pref = Preference::crra(gamma);
    const Gap g = log_odds_gap(mu, p);
    if (pref.is_log() && !g.saturated) return {wealth * (mu - p) / (p * (1.0 - p)), false};
    return {demand_at_gap(pref, wealth, g.z, logit(p)), g.saturated};
}

Demand demand(const AgentGroup& group, double mu, double p) {
    if (group.pref.is_cara()) return demand_cara(group.pref.parameter(), mu, p);
    return demand_crra(group.pref.parameter(), group.wealth, mu, p);
}

double cara_limit_check(double gamma, double wealth, double mu, double p) {
    const Gap g = log_odds_gap(mu, p);
    const double x = demand_crra(gamma, wealth, mu, p).x;
    return std::abs(gamma * x / wealth - g.z) / std::max(1.0, std::abs(g.z));
}

double foc_residual(const Preference& pref, double wealth, double mu, double p, double x) {
    // log mu + log(1-p) + log U'(W + (1-p)x) - [log(1-mu) + log p + log U'(W - p x)]
    auto log_marginal = [&](double w) {
        if (pref.is_cara()) return -pref.parameter() * w;
        return -pref.parameter() * std::log(w);
    };
    const double up = wealth + (1.0 - p) * x;
    const double down = wealth - p * x;
    if (!pref.is_cara() && (up <= 0.0 || down <= 0.0)) return std::numeric_limits<double>::infinity();
    const double lhs = std::log(mu) + std::log1p(-p) + log_marginal(up);
    const double rhs = std::log1p(-mu) + std::log(p) + log_marginal(down);
    return std::abs(lhs - rhs);
}

CurvatureReport linearity_probe(const Preference& pref, double wealth, double p, std::span<const double> z_grid) {
    if (z_grid.size() < 3) throw InvalidInput("linearity probe needs at least three points");
    for (std::size_t k = 1; k < z_grid.size(); ++k)
        if (!(z_grid[k] > z_grid[k - 1])) throw InvalidInput("linearity probe points must increase");
    std::vector<double> x(z_grid.size());
    const double y = logit(p);
    for (std::size_t k = 0; k < z_grid.size(); ++k) x[k] = demand_at_gap(pref, wealth, z_grid[k], y);
    CurvatureReport report;
    report.min_abs = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < z_grid.size(); ++k) {
        const double left = (x[k] - x[k - 1]) / (z_grid[k] - z_grid[k - 1]);
        const double right = (x[k + 1] - x[k]) / (z_grid[k + 1] - z_grid[k]);
        const double d2 = 2.0 * (right - left) / (z_grid[k + 1] - z_grid[k - 1]);
        report.second_differences.push_back(d2);
        report.max_abs = std::max(report.max_abs, std::abs(d2));
        report.min_abs = std::min(report.min_abs, std::abs(d2));
    }
    return report;
}

double utility(const Preference& pref, double w) {
    if (pref.is_cara()) return -std::exp(-pref.parameter() * w);
    if (w <= 0.0) return -std::numeric_limits<double>::infinity();
    if (pref.is_log()) return std::log(w);
    const double g = pref.parameter();
    return std::pow(w, 1.0 - g) / (1.0 - g);
}

double inverse_utility(const Preference& pref, double u) {
    if (pref.is_cara()) return -std::log(-u) / pref.parameter();
    if (pref.is_log()) return std::exp(u);
    const double g = pref.parameter();
    return std::pow(u * (1.0 - g), 1.0 / (1.0 - g));
}

}  // namespace revlab
