#include "revlab/ree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "detail/parallel.hpp"
#include "revlab/errors.hpp"
#include "revlab/isotonic.hpp"
#include "revlab/root.hpp"

namespace revlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_sum_exp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

// Indices of the two groups other than k, in increasing order.
std::array<std::size_t, 2> others(std::size_t k) {
    if (k == 0) return {1, 2};
    if (k == 1) return {0, 2};
    return {0, 1};
}

// Cell index of a lattice point given the own group, own index and the two peer indices.
std::array<std::size_t, 3> cell_of(std::size_t k, std::size_t own, std::size_t a, std::size_t b) {
    if (k == 0) return {own, a, b};
    if (k == 1) return {a, own, b};
    return {a, b, own};
}

// Piecewise-linear value of one table row (fixed u node) at price log-odds y, held flat beyond the
// price axis so that aggregate excess demand keeps its sign at the ends of the clearing bracket.
double row_value(const PosteriorTable& t, std::size_t iu, double y) {
    const auto& ys = t.p_log_odds();
    const std::size_t n = ys.size();
    if (n == 1 || y <= ys.front()) return t.log_odds(iu, 0);
    if (y >= ys.back()) return t.log_odds(iu, n - 1);
    auto it = std::upper_bound(ys.begin(), ys.end(), y);
    std::size_t m = it == ys.begin() ? 0 : static_cast<std::size_t>(it - ys.begin()) - 1;
    m = std::min(m, n - 2);
    const double a = (y - ys[m]) / (ys[m + 1] - ys[m]);
    return (1.0 - a) * t.log_odds(iu, m) + a * t.log_odds(iu, m + 1);
}

// Price levels that this signal can never see carry no information of their own. They are filled
// from the traced levels (held flat beyond the traced range, linear across interior gaps) so that
// they neither pin the monotone projection nor distort clearing near the edge of the range.
void fill_untraced(PosteriorTable& t, std::size_t iu, const std::vector<std::size_t>& traced) {
    const std::size_t gp = t.p_size();
    if (traced.empty() || traced.size() == gp) return;
    const auto& y = t.p_log_odds();
    for (std::size_t ip = 0; ip < traced.front(); ++ip) t.log_odds(iu, ip) = t.log_odds(iu, traced.front());
    for (std::size_t ip = traced.back() + 1; ip < gp; ++ip) t.log_odds(iu, ip) = t.log_odds(iu, traced.back());
    for (std::size_t m = 0; m + 1 < traced.size(); ++m) {
        const std::size_t a = traced[m], b = traced[m + 1];
        for (std::size_t ip = a + 1; ip < b; ++ip) {
            const double w = (y[ip] - y[a]) / (y[b] - y[a]);
            t.log_odds(iu, ip) = (1.0 - w) * t.log_odds(iu, a) + w * t.log_odds(iu, b);
        }
    }
}

}  // namespace

void validate(const SolverConfig& s) {
    if (!(s.damping > 0.0 && s.damping <= 1.0)) throw InvalidConfig("damping must lie in (0,1]");
    if (!(s.picard_tol > 0.0) || !(s.strict_tol > 0.0)) throw InvalidConfig("tolerances must be positive");
    if (s.max_iter == 0) throw InvalidConfig("max_iter must be positive");
    if (s.price_grid_size == 1) throw InvalidConfig("price grid needs at least two nodes");
    if (!(s.price_margin >= 0.0) || !(s.price_half_width >= 0.0)) throw InvalidConfig("price range must be nonnegative");
    if (!(s.band >= 0.0)) throw InvalidConfig("extrapolation band must be nonnegative");
    if (s.krylov_restart == 0) throw InvalidConfig("Krylov restart must be positive");
    if (s.threads == 0) throw InvalidConfig("thread count must be positive");
}

std::size_t ContourTrace::max_sweep_count() const {
    std::size_t n[2] = {0, 0};
    for (const auto& c : crossings) ++n[c.axis];
    return std::max(n[0], n[1]);
}

// ---------------------------------------------------------------------------------------------
// Contour tracing

namespace {

// Crossings of one sweep line with the level; appends off-grid coordinates.
void sweep_line(const double* v, std::size_t stride, const SignalGrid& grid, double level, double band, int axis,
                std::size_t line, std::vector<Crossing>& out) {
    const std::size_t g = grid.size();
    const double h = grid.spacing();
    bool found = false;
    for (std::size_t m = 0; m + 1 < g; ++m) {
        const double a = v[m * stride] - level;
        const double b = v[(m + 1) * stride] - level;
        if (a == 0.0) {
            out.push_back({axis, line, grid[m], 1.0});
            found = true;
        } else if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) {
            out.push_back({axis, line, grid[m] + h * a / (a - b), 1.0});
            found = true;
        }
    }
    if (v[(g - 1) * stride] == level) {
        out.push_back({axis, line, grid[g - 1], 1.0});
        found = true;
    }
    if (found || band <= 0.0) return;

    // extrapolate from the end segments
    const double v0 = v[0], v1 = v[stride];
    if (v1 != v0) {
        const double t = (level - v0) / (v1 - v0);
        if (t < 0.0 && t >= -band) {
            out.push_back({axis, line, grid[0] + t * h, 1.0});
            return;
        }
    }
    const double w0 = v[(g - 2) * stride], w1 = v[(g - 1) * stride];
    if (w1 != w0) {
        const double t = (level - w0) / (w1 - w0);
        if (t > 1.0 && t <= 1.0 + band) out.push_back({axis, line, grid[g - 2] + t * h, 1.0});
    }
}

}  // namespace

ContourTrace trace_contour(std::span<const double> slice, const SignalGrid& grid, double level, double band) {
    const std::size_t g = grid.size();
    if (slice.size() != g * g) throw InvalidInput("slice must be G x G");
    ContourTrace t;
    t.level = level;
    // pass 1: rows j fixed, solve for the column coordinate u_l
    for (std::size_t j = 0; j < g; ++j) sweep_line(slice.data() + j * g, 1, grid, level, band, 0, j, t.crossings);
    // pass 2: columns l fixed, solve for the row coordinate u_j
    for (std::size_t l = 0; l < g; ++l) sweep_line(slice.data() + l, g, grid, level, band, 1, l, t.crossings);
    return t;
}

ContourMass contour_mass(const ContourTrace& trace, const SignalGrid& grid, double tau_j, double tau_l) {
    if (trace.empty()) throw InvalidInput("contour mass needs a non-empty trace");
    std::vector<double> t0, t1;
    t0.reserve(trace.crossings.size());
    t1.reserve(trace.crossings.size());
    for (const auto& c : trace.crossings) {
        const double uj = c.axis == 0 ? grid[c.line] : c.coordinate;
        const double ul = c.axis == 0 ? c.coordinate : grid[c.line];
        // each sweep contributes half of the average; a sweep without crossings contributes nothing
        const double base = std::log(0.5 * c.weight) + log_signal_density(0, tau_j, uj) + log_signal_density(0, tau_l, ul);
        t0.push_back(base);
        t1.push_back(base + tau_j * uj + tau_l * ul);
    }
    return {log_sum_exp(t0), log_sum_exp(t1)};
}

double contour_posterior(const ContourTrace& trace, const SignalGrid& grid, double own_u, double tau_own,
                         double tau_j, double tau_l) {
    if (trace.empty()) throw InvalidInput("contour posterior needs a non-empty trace");
    const ContourMass m = contour_mass(trace, grid, tau_j, tau_l);
    return loglik_ratio(tau_own, own_u) + m.log_a1 - m.log_a0;
}

// ---------------------------------------------------------------------------------------------
// Problem setup

ReeProblem::ReeProblem(MarketConfig cfg, SignalGrid grid, SolverConfig solver)
    : cfg_(std::move(cfg)), grid_(std::move(grid)), solver_(solver) {
    validate(cfg_);
    validate(solver_);
    if (cfg_.k() != 3) throw InvalidConfig("the contour equilibrium is defined for three groups");
    if (grid_.size() < 3) throw InvalidConfig("the contour equilibrium needs at least three grid nodes");
    tau_ = cfg_.precisions();
    shared_ = cfg_.homogeneous();
    method_ = solver_.method;
    if (method_ == ReeMethod::Auto) {
        const bool all_cara = std::all_of(cfg_.groups.begin(), cfg_.groups.end(),
                                          [](const AgentGroup& g) { return g.pref.is_cara(); });
        method_ = all_cara ? ReeMethod::PriceTensor : ReeMethod::PosteriorFunction;
    }
    weights_ = joint_weights(grid_, tau_);

    double lo, hi;
    if (solver_.price_half_width > 0.0) {
        lo = -solver_.price_half_width;
        hi = solver_.price_half_width;
    } else {
        const auto seed = no_learning_lattice(cfg_, grid_);
        const auto [mn, mx] = std::minmax_element(seed.begin(), seed.end());
        const double mid = 0.5 * (*mn + *mx);
        const double half = std::max(0.5 * (*mx - *mn) * (1.0 + solver_.price_margin), 1e-3);
        lo = mid - half;
        hi = mid + half;
    }
    const std::size_t gp = solver_.price_grid_size ? solver_.price_grid_size : grid_.size();
    price_nodes_.resize(gp);
    for (std::size_t m = 0; m < gp; ++m) {
        const double t = static_cast<double>(m) / static_cast<double>(gp - 1);
        if (solver_.spacing == PriceSpacing::UniformLogit) {
            price_nodes_[m] = lo + t * (hi - lo);
        } else {
            const double plo = logistic(lo), phi = logistic(hi);
            price_nodes_[m] = logit(plo + t * (phi - plo));
        }
    }
}

BeliefState ReeProblem::no_learning_seed() const {
    BeliefState s;
    const std::size_t roles = shared_ ? 1 : 3;
    for (std::size_t k = 0; k < roles; ++k) {
        PosteriorTable t(grid_.nodes(), price_nodes_);
        for (std::size_t iu = 0; iu < grid_.size(); ++iu)
            for (std::size_t ip = 0; ip < price_nodes_.size(); ++ip) t.log_odds(iu, ip) = loglik_ratio(tau_[k], grid_[iu]);
        s.tables.push_back(std::move(t));
    }
    return s;
}

BeliefState ReeProblem::full_revelation_seed() const {
    BeliefState s;
    const std::size_t roles = shared_ ? 1 : 3;
    for (std::size_t k = 0; k < roles; ++k) {
        PosteriorTable t(grid_.nodes(), price_nodes_);
        for (std::size_t iu = 0; iu < grid_.size(); ++iu)
            for (std::size_t ip = 0; ip < price_nodes_.size(); ++ip) t.log_odds(iu, ip) = price_nodes_[ip];
        s.tables.push_back(std::move(t));
    }
    return s;
}

std::size_t ReeProblem::unknowns() const { return (shared_ ? 1 : 3) * grid_.size() * price_nodes_.size(); }

std::vector<double> ReeProblem::flatten(const BeliefState& s) const {
    std::vector<double> x;
    x.reserve(unknowns());
    for (const auto& t : s.tables) x.insert(x.end(), t.values().begin(), t.values().end());
    return x;
}

BeliefState ReeProblem::unflatten(std::span<const double> x) const {
    if (x.size() != unknowns()) throw InvalidInput("belief vector has the wrong length");
    BeliefState s;
    const std::size_t per = grid_.size() * price_nodes_.size();
    for (std::size_t k = 0; k * per < x.size(); ++k) {
        PosteriorTable t(grid_.nodes(), price_nodes_);
        std::copy(x.begin() + k * per, x.begin() + (k + 1) * per, t.values().begin());
        s.tables.push_back(std::move(t));
    }
    return s;
}

// ---------------------------------------------------------------------------------------------
// Lattice clearing

PriceTensor ReeProblem::clear_lattice(const BeliefState& beliefs, const PriceTensor* warm_start,
                                      std::size_t* failed) const {
    const std::size_t g = grid_.size();
    PriceTensor out(g);
    std::vector<std::size_t> fails(g, 0);
    auto table_for = [&](std::size_t k) -> const PosteriorTable& { return beliefs.tables[shared_ ? 0 : k]; };

    detail::parallel_for(g, solver_.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t j = 0; j < g; ++j)
                for (std::size_t l = 0; l < g; ++l) {
                    const std::array<std::size_t, 3> idx{i, j, l};
                    auto f = [&](double y) {
                        double z = -cfg_.supply;
                        for (std::size_t k = 0; k < 3; ++k) {
                            const auto& grp = cfg_.groups[k];
                            z += demand_at_gap(grp.pref, grp.wealth, row_value(table_for(k), idx[k], y) - y, y);
                        }
                        return z;
                    };
                    const Bracket full;
                    double lo = full.lo, hi = full.hi;
                    if (warm_start) {
                        const double y0 = warm_start->log_odds(i, j, l);
                        lo = std::max(full.lo, y0 - 0.25);
                        hi = std::min(full.hi, y0 + 0.25);
                    }
                    double flo = f(lo), fhi = f(hi);
                    double step = 0.5;
                    while ((flo < 0.0 && lo > full.lo) || (fhi > 0.0 && hi < full.hi)) {
                        if (flo < 0.0 && lo > full.lo) {
                            lo = std::max(full.lo, lo - step);
                            flo = f(lo);
                        }
                        if (fhi > 0.0 && hi < full.hi) {
                            hi = std::min(full.hi, hi + step);
                            fhi = f(hi);
                        }
                        step *= 2.0;
                    }
                    if (flo < 0.0 || fhi > 0.0) {
                        ++fails[i];
                        out.log_odds(i, j, l) = flo < 0.0 ? full.lo : full.hi;
                        continue;
                    }
                    out.log_odds(i, j, l) = brent_root(f, lo, hi, flo, fhi, kClearingTol).x;
                }
    });

    std::size_t total = 0;
    for (auto n : fails) total += n;
    if (failed) *failed = total;
    if (static_cast<double>(total) > 0.05 * static_cast<double>(g * g * g))
        throw AbortedIteration("more than 5% of lattice cells failed to clear");
    return shared_ ? symmetrise(out) : out;
}

MapResult ReeProblem::apply(const BeliefState& beliefs, const PriceTensor* warm_start) const {
    MapResult r;
    r.prices = clear_lattice(beliefs, warm_start, &r.failed_cells);
    r.next = beliefs;
    r.residual.assign(unknowns(), kNaN);
    contour_update(r.prices, r.next, &beliefs, &r.residual);
    return r;
}

BeliefState ReeProblem::beliefs_from_prices(const PriceTensor& prices) const {
    if (prices.size() != grid_.size()) throw InvalidInput("price tensor does not match the grid");
    BeliefState s = no_learning_seed();
    contour_update(prices, s, nullptr, nullptr);
    return s;
}

void ReeProblem::contour_update(const PriceTensor& prices, BeliefState& next, const BeliefState* current,
                                std::vector<double>* residual) const {
    const std::size_t g = grid_.size();
    const std::size_t gp = price_nodes_.size();
    const std::size_t roles = shared_ ? 1 : 3;
    for (std::size_t k = 0; k < roles; ++k) {
        const auto [a, b] = others(k);
        PosteriorTable& nxt = next.tables[k];
        detail::parallel_for(g, solver_.threads, [&](std::size_t begin, std::size_t end) {
            std::vector<double> slice(g * g);
            for (std::size_t iu = begin; iu < end; ++iu) {
                for (std::size_t j = 0; j < g; ++j)
                    for (std::size_t l = 0; l < g; ++l) {
                        const auto c = cell_of(k, iu, j, l);
                        slice[j * g + l] = prices.log_odds(c[0], c[1], c[2]);
                    }
                std::vector<std::size_t> traced;
                for (std::size_t ip = 0; ip < gp; ++ip) {
                    const ContourTrace trace = trace_contour(slice, grid_, price_nodes_[ip], solver_.band);
                    if (trace.empty()) continue;
                    const double v = contour_posterior(trace, grid_, grid_[iu], tau_[k], tau_[a], tau_[b]);
                    nxt.log_odds(iu, ip) = v;
                    traced.push_back(ip);
                    if (residual && current && trace.max_sweep_count() >= 2)
                        (*residual)[(k * g + iu) * gp + ip] = v - current->tables[k].log_odds(iu, ip);
                }
                fill_untraced(nxt, iu, traced);
            }
        });
    }
}

std::vector<Tensor3> ReeProblem::contour_cell_posteriors(const PriceTensor& prices) const {
    const std::size_t g = grid_.size();
    if (prices.size() != g) throw InvalidInput("price tensor does not match the grid");
    std::vector<Tensor3> out(3, Tensor3(g));
    // slices of group k at own index i are shared by every cell with that own index
    for (std::size_t k = 0; k < 3; ++k) {
        const auto [a, b] = others(k);
        detail::parallel_for(g, solver_.threads, [&](std::size_t begin, std::size_t end) {
            std::vector<double> slice(g * g);
            for (std::size_t own = begin; own < end; ++own) {
                for (std::size_t r = 0; r < g; ++r)
                    for (std::size_t c = 0; c < g; ++c) {
                        const auto cell = cell_of(k, own, r, c);
                        slice[r * g + c] = prices.log_odds(cell[0], cell[1], cell[2]);
                    }
                for (std::size_t r = 0; r < g; ++r)
                    for (std::size_t c = 0; c < g; ++c) {
                        const auto cell = cell_of(k, own, r, c);
                        // the cell lies on its own level set, so the trace is never empty
                        const ContourTrace trace = trace_contour(slice, grid_, slice[r * g + c], solver_.band);
                        out[k](cell[0], cell[1], cell[2]) =
                            contour_posterior(trace, grid_, grid_[own], tau_[k], tau_[a], tau_[b]);
                    }
            }
        });
    }
    return out;
}

double ReeProblem::contour_posterior_at(const PriceTensor& prices, std::size_t k, double own_u, double level) const {
    const std::size_t g = grid_.size();
    if (prices.size() != g || k > 2) throw InvalidInput("price tensor or group index does not match the problem");
    const double t = std::clamp((own_u - grid_.u_min()) / grid_.spacing(), 0.0, static_cast<double>(g - 1));
    const std::size_t lo = std::min(static_cast<std::size_t>(t), g - 2);
    const double w = t - static_cast<double>(lo);
    std::vector<double> slice(g * g);
    for (std::size_t r = 0; r < g; ++r)
        for (std::size_t c = 0; c < g; ++c) {
            const auto c0 = cell_of(k, lo, r, c), c1 = cell_of(k, lo + 1, r, c);
            slice[r * g + c] = (1.0 - w) * prices.log_odds(c0[0], c0[1], c0[2]) + w * prices.log_odds(c1[0], c1[1], c1[2]);
        }
    const ContourTrace trace = trace_contour(slice, grid_, level, solver_.band);
    if (trace.empty()) throw InvalidInput("price level is not attained on the agent's slice");
    const auto [a, b] = others(k);
    return contour_posterior(trace, grid_, own_u, tau_[k], tau_[a], tau_[b]);
}

PriceTensor ReeProblem::price_map(const PriceTensor& prices) const {
    const std::size_t g = grid_.size();
    const std::vector<Tensor3> post = contour_cell_posteriors(prices);
    PriceTensor out(g);
    detail::parallel_for(g, solver_.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> l(3);
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t j = 0; j < g; ++j)
                for (std::size_t m = 0; m < g; ++m) {
                    for (std::size_t k = 0; k < 3; ++k) l[k] = post[k](i, j, m);
                    out.log_odds(i, j, m) = clear_log_odds(cfg_, l).log_odds;
                }
    });
    return shared_ ? symmetrise(out) : out;
}

std::vector<Tensor3> ReeProblem::cell_posteriors(const BeliefState& beliefs, const PriceTensor& prices) const {
    const std::size_t g = grid_.size();
    std::vector<Tensor3> out(3, Tensor3(g));
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            for (std::size_t l = 0; l < g; ++l) {
                const std::array<std::size_t, 3> idx{i, j, l};
                const double y = prices.log_odds(i, j, l);
                for (std::size_t k = 0; k < 3; ++k)
                    out[k](i, j, l) = row_value(beliefs.tables[shared_ ? 0 : k], idx[k], y);
            }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Projections

PosteriorTable project_monotone(const PosteriorTable& table, std::span<const double> u_weights) {
    const std::size_t nu = table.u_size(), np = table.p_size();
    if (!u_weights.empty() && u_weights.size() != nu) throw InvalidInput("u weights must match the table");
    PosteriorTable out = table;
    std::vector<double> line;
    for (int round = 0; round < 10; ++round) {
        for (std::size_t iu = 0; iu < nu; ++iu) {
            line.assign(out.values().begin() + iu * np, out.values().begin() + (iu + 1) * np);
            if (count_decreases(line) == 0) continue;
            const auto fixed = isotonic_regression(line);
            std::copy(fixed.begin(), fixed.end(), out.values().begin() + iu * np);
        }
        line.resize(nu);
        for (std::size_t ip = 0; ip < np; ++ip) {
            for (std::size_t iu = 0; iu < nu; ++iu) line[iu] = out.log_odds(iu, ip);
            if (count_decreases(line) == 0) continue;
            const auto fixed = isotonic_regression(line, u_weights);
            for (std::size_t iu = 0; iu < nu; ++iu) out.log_odds(iu, ip) = fixed[iu];
        }
        if (monotonicity_violations(out) == 0) break;
    }
    return out;
}

PriceTensor symmetrise(const PriceTensor& prices) {
    const std::size_t g = prices.size();
    PriceTensor out(g);
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            for (std::size_t l = 0; l < g; ++l) {
                // fixed summation order over the sorted index triple keeps the result exactly symmetric
                std::array<std::size_t, 3> s{i, j, l};
                std::sort(s.begin(), s.end());
                const auto& [a, b, c] = s;
                const double sum = prices.log_odds(a, b, c) + prices.log_odds(a, c, b) + prices.log_odds(b, a, c) +
                                   prices.log_odds(b, c, a) + prices.log_odds(c, a, b) + prices.log_odds(c, b, a);
                out.log_odds(i, j, l) = sum / 6.0;
            }
    return out;
}

PriceTensor symmetrise(const PriceTensor& prices, const MarketConfig& cfg) {
    if (!cfg.homogeneous()) throw InvalidConfig("symmetrisation requires homogeneous groups");
    return symmetrise(prices);
}

}  // namespace revlab
