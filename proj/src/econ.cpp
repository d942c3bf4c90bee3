#include "revlab/econ.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "revlab/errors.hpp"
#include "revlab/ree.hpp"

namespace revlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lse2(double a, double b) {
    const double m = std::max(a, b);
    if (m == -kInf || m == kInf) return m;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log(logistic(z)) without overflow
double log_logistic(double z) { return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

double log_or_minus_inf(double w) { return w > 0.0 ? std::log(w) : -kInf; }

std::array<std::size_t, 3> cell_of(std::size_t k, std::size_t own, std::size_t a, std::size_t b) {
    if (k == 0) return {own, a, b};
    if (k == 1) return {a, own, b};
    return {a, b, own};
}

std::array<std::size_t, 2> others(std::size_t k) {
    if (k == 0) return {1, 2};
    if (k == 1) return {0, 2};
    return {0, 1};
}

}  // namespace

double certainty_equivalent_at(const Preference& pref, double wealth, double l, double y, double x) {
    const double p = logistic(y), q = logistic(-y);
    const double lm = log_logistic(l), ln = log_logistic(-l);
    if (pref.is_cara()) {
        const double a = pref.parameter();
        return wealth - lse2(lm - a * q * x, ln + a * p * x) / a;
    }
    const double g = pref.parameter();
    const double w1 = log_or_minus_inf(wealth + q * x);
    const double w0 = log_or_minus_inf(wealth - p * x);
    if (pref.is_log()) {
        if (w1 == -kInf || w0 == -kInf) return 0.0;
        return std::exp(logistic(l) * w1 + logistic(-l) * w0);
    }
    const double e = 1.0 - g;
    return std::exp(lse2(lm + e * w1, ln + e * w0) / e);
}

double certainty_equivalent(const Preference& pref, double wealth, double mu, double p) {
    if (!(mu > 0.0 && mu < 1.0) || !(p > 0.0 && p < 1.0)) throw InvalidInput("belief and price must lie in (0,1)");
    if (!(wealth > 0.0)) throw InvalidInput("wealth must be positive");
    const double l = logit(mu), y = logit(p);
    return certainty_equivalent_at(pref, wealth, l, y, demand_at_gap(pref, wealth, l - y, y));
}

CertaintyEquivalentReport information_report(const MarketConfig& cfg, const SignalGrid& grid, const PriceTensor& prices,
                                             const InformationOptions& opts) {
    validate(cfg);
    if (cfg.k() != 3) throw InvalidConfig("the value of information is defined on the three-group lattice");
    const std::size_t g = grid.size();
    if (prices.size() != g) throw InvalidInput("price tensor does not match the grid");
    if (opts.group > 2) throw InvalidInput("group index out of range");
    if (!(opts.tau_extra >= 0.0)) throw InvalidConfig("extra precision must be nonnegative");

    const std::size_t k = opts.group;
    const AgentGroup& grp = cfg.groups[k];
    const auto tau = cfg.precisions();
    const auto [a, b] = others(k);
    const Tensor3 w = joint_weights(grid, tau);

    // own slices of group k, one per own signal node
    std::vector<std::vector<double>> slices(g, std::vector<double>(g * g));
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t r = 0; r < g; ++r)
            for (std::size_t c = 0; c < g; ++c) {
                const auto cell = cell_of(k, i, r, c);
                slices[i][r * g + c] = prices.log_odds(cell[0], cell[1], cell[2]);
            }

    // state-conditional quadrature weights of a fresh signal
    std::vector<double> lq0, lq1;
    if (opts.tau_extra > 0.0) {
        std::vector<double> d0(g), d1(g);
        for (std::size_t m = 0; m < g; ++m) {
            d0[m] = log_signal_density(0, opts.tau_extra, grid[m]);
            d1[m] = log_signal_density(1, opts.tau_extra, grid[m]);
        }
        double z0 = -kInf, z1 = -kInf;
        for (std::size_t m = 0; m < g; ++m) {
            z0 = lse2(z0, d0[m]);
            z1 = lse2(z1, d1[m]);
        }
        for (std::size_t m = 0; m < g; ++m) {
            lq0.push_back(d0[m] - z0);
            lq1.push_back(d1[m] - z1);
        }
    }

    CertaintyEquivalentReport rep;
    rep.per_cell = Tensor3(g);
    double total = 0.0;
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            for (std::size_t l = 0; l < g; ++l) {
                const std::array<std::size_t, 3> idx{i, j, l};
                const std::size_t own = idx[k];
                const double y = prices.log_odds(i, j, l);

                // Bayes over the level set of the observed price, with and without the own signal
                double m0 = -kInf, m1 = -kInf, lp = 0.0;
                for (std::size_t s = 0; s < g; ++s) {
                    const ContourTrace t = trace_contour(slices[s], grid, y, opts.band);
                    if (t.empty()) continue;
                    const ContourMass cm = contour_mass(t, grid, tau[a], tau[b]);
                    m0 = lse2(m0, log_signal_density(0, tau[k], grid[s]) + cm.log_a0);
                    m1 = lse2(m1, log_signal_density(1, tau[k], grid[s]) + cm.log_a1);
                    if (s == own) lp = loglik_ratio(tau[k], grid[s]) + cm.log_a1 - cm.log_a0;
                }
                const double lm = m1 - m0;

                double informed = 0.0, uninformed = 0.0;
                if (opts.tau_extra > 0.0) {
                    // lp is the belief without the fresh signal; integrate over its realisations
                    const double x0 = demand_at_gap(grp.pref, grp.wealth, lp - y, y);
                    const double lpm = log_logistic(lp), lpn = log_logistic(-lp);
                    for (std::size_t m = 0; m < g; ++m) {
                        const double prob = std::exp(lse2(lpm + lq1[m], lpn + lq0[m]));
                        const double ls = lp + lq1[m] - lq0[m];
                        const double xs = demand_at_gap(grp.pref, grp.wealth, ls - y, y);
                        informed += prob * certainty_equivalent_at(grp.pref, grp.wealth, ls, y, xs);
                        uninformed += prob * certainty_equivalent_at(grp.pref, grp.wealth, ls, y, x0);
                    }
                } else {
                    const double xp = demand_at_gap(grp.pref, grp.wealth, lp - y, y);
                    const double xm = demand_at_gap(grp.pref, grp.wealth, lm - y, y);
                    informed = certainty_equivalent_at(grp.pref, grp.wealth, lp, y, xp);
                    uninformed = certainty_equivalent_at(grp.pref, grp.wealth, lp, y, xm);
                }
                const double gain = std::max(0.0, informed - uninformed);
                rep.per_cell(i, j, l) = gain;
                rep.ce_informed += w(i, j, l) * informed;
                rep.ce_uninformed += w(i, j, l) * uninformed;
                total += w(i, j, l) * gain;
            }
    rep.v_info = total;
    return rep;
}

double value_of_information(const MarketConfig& cfg, const SignalGrid& grid, const PriceTensor& prices,
                            const InformationOptions& opts) {
    return information_report(cfg, grid, prices, opts).v_info;
}

double value_of_information(const ReeProblem& problem, const ReeSolution& solution, const InformationOptions& opts) {
    InformationOptions o = opts;
    o.band = problem.solver().band;
    return value_of_information(problem.market(), problem.grid(), solution.prices, o);
}

PriceTensor informed_share_prices(const MarketConfig& cfg, const SignalGrid& grid, double lambda) {
    validate(cfg);
    if (cfg.k() != 3) throw InvalidConfig("informed-share prices are defined on the three-group lattice");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidConfig("informed share must lie in [0,1]");
    const std::size_t g = grid.size();
    const auto tau = cfg.precisions();
    PriceTensor out(g);
    std::vector<double> mu(3);
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            for (std::size_t l = 0; l < g; ++l) {
                mu[0] = private_posterior(tau[0], grid[i]);
                mu[1] = private_posterior(tau[1], grid[j]);
                mu[2] = private_posterior(tau[2], grid[l]);
                out.log_odds(i, j, l) = informed_share_clearing(cfg, lambda, mu).log_odds;
            }
    return out;
}

double value_by_informed_share(const MarketConfig& cfg, const SignalGrid& grid, double lambda,
                               const InformationOptions& opts) {
    return value_of_information(cfg, grid, informed_share_prices(cfg, grid, lambda), opts);
}

InformationValueCurve::InformationValueCurve(MarketConfig cfg, SignalGrid grid, InformationOptions opts)
    : cfg_(std::move(cfg)), grid_(std::move(grid)), opts_(opts) {
    validate(cfg_);
}

double InformationValueCurve::operator()(double lambda) {
    auto it = cache_.find(lambda);
    if (it != cache_.end()) return it->second;
    const double v = value_by_informed_share(cfg_, grid_, lambda, opts_);
    cache_.emplace(lambda, v);
    return v;
}

AcquisitionEquilibrium gs_equilibrium(InformationValueCurve& curve, double cost, const AcquisitionOptions& opts) {
    if (!(cost > 0.0)) throw InvalidConfig("acquisition cost must be positive");
    if (!(opts.lambda_floor > 0.0 && opts.lambda_floor < 1.0)) throw InvalidConfig("lambda floor must lie in (0,1)");
    if (opts.scan_points < 2) throw InvalidConfig("the monotonicity scan needs at least two points");

    AcquisitionEquilibrium eq;
    eq.cost = cost;

    // monotonicity scan over [floor, 1]; V may fall or rise with the informed share, but not both
    bool rises = false, falls = false;
    double prev = curve(opts.lambda_floor);
    for (std::size_t n = 1; n < opts.scan_points; ++n) {
        const double lam = static_cast<double>(n) / static_cast<double>(opts.scan_points - 1);
        const double v = curve(std::max(lam, opts.lambda_floor));
        if (v > prev + opts.slack) rises = true;
        if (v < prev - opts.slack) falls = true;
        prev = v;
    }
    eq.monotone = !(rises && falls);
    if (!eq.monotone) {
        eq.lambda = std::numeric_limits<double>::quiet_NaN();
        eq.value = std::numeric_limits<double>::quiet_NaN();
        return eq;
    }
    const double v0 = curve(opts.lambda_floor);
    const double v1 = curve(1.0);
    if (cost >= std::max(v0, v1)) {
        eq.boundary = AcquisitionBoundary::Corner0;
        eq.lambda = 0.0;
        eq.value = v0;
        return eq;
    }
    if (cost <= std::min(v0, v1)) {
        eq.boundary = AcquisitionBoundary::Corner1;
        eq.lambda = 1.0;
        eq.value = v1;
        return eq;
    }

    // bisection on the sign change of V - c between the floor and 1
    const bool above_at_floor = v0 > cost;
    double lo = opts.lambda_floor, hi = 1.0;
    double mid = 0.5 * (lo + hi), v = curve(mid);
    for (int it = 0; it < 200 && std::abs(v - cost) > opts.tol && hi - lo > 1e-15; ++it) {
        if ((v > cost) == above_at_floor)
            lo = mid;
        else
            hi = mid;
        mid = 0.5 * (lo + hi);
        v = curve(mid);
    }
    eq.boundary = AcquisitionBoundary::Interior;
    eq.lambda = mid;
    eq.value = v;
    return eq;
}

AcquisitionEquilibrium gs_equilibrium(const MarketConfig& cfg, const SignalGrid& grid, double cost,
                                      const AcquisitionOptions& opts, const InformationOptions& info) {
    InformationValueCurve curve(cfg, grid, info);
    return gs_equilibrium(curve, cost, opts);
}

const char* to_string(AcquisitionBoundary b) {
    switch (b) {
        case AcquisitionBoundary::Interior: return "interior";
        case AcquisitionBoundary::Corner0: return "corner-0";
        case AcquisitionBoundary::Corner1: return "corner-1";
    }
    return "unknown";
}

}  // namespace revlab
