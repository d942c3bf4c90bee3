#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "revlab/errors.hpp"
#include "revlab/ree.hpp"
#include "revlab/root.hpp"

namespace revlab {

namespace {

using Vec = std::vector<double>;

double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double norm_inf(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Evaluation of the fixed-point map at a flattened iterate.
struct Evaluation {
    Vec x;
    Vec f;        // Phi(x) - x, zero on inactive cells
    Vec residual; // same with NaN on inactive cells
    double norm = std::numeric_limits<double>::infinity();
    PriceTensor prices;
};

class MapEvaluator {
public:
    explicit MapEvaluator(const ReeProblem& p) : p_(p) {
        const auto tau = p.market().precisions();
        for (std::size_t k = 0; k < (p.shared_table() ? 1u : 3u); ++k) u_weights_.push_back(marginal_weights(p.grid(), tau[k]));
        flip_ = p.solver().state_symmetry && p.market().supply == 0.0 && symmetric_axis(p.price_nodes());
        tensor_ = p.method() == ReeMethod::PriceTensor;
    }

    bool on_prices() const { return tensor_; }

    Evaluation operator()(const Vec& x, const PriceTensor* warm) const {
        Evaluation e;
        e.x = x;
        if (tensor_) {
            PriceTensor cur(p_.grid().size());
            cur.log_odds().data() = x;
            e.prices = p_.price_map(cur);
            const Vec& next = e.prices.log_odds().data();
            e.f.resize(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) e.f[i] = next[i] - x[i];
            e.residual = e.f;
            e.norm = norm_inf(e.f);
            return e;
        }
        MapResult r = p_.apply(p_.unflatten(x), warm);
        const Vec next = p_.flatten(r.next);
        e.f.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) e.f[i] = next[i] - x[i];
        e.residual = std::move(r.residual);
        e.norm = norm_inf(e.f);
        e.prices = std::move(r.prices);
        return e;
    }

    Vec project(const Vec& x) const {
        if (tensor_) return x;
        BeliefState s = p_.unflatten(x);
        for (std::size_t k = 0; k < s.tables.size(); ++k) {
            s.tables[k] = project_monotone(s.tables[k], u_weights_[k]);
            if (flip_) s.tables[k] = antisymmetrise(s.tables[k]);
        }
        return p_.flatten(s);
    }

private:
    static bool symmetric_axis(const Vec& y) {
        for (std::size_t i = 0; i < y.size(); ++i)
            if (std::abs(y[i] + y[y.size() - 1 - i]) > 1e-9 * (1.0 + std::abs(y[i]))) return false;
        return true;
    }

    // Average of the table and its image under the state flip (u, y, mu) -> (-u, -y, -mu).
    static PosteriorTable antisymmetrise(const PosteriorTable& t) {
        PosteriorTable out = t;
        const std::size_t nu = t.u_size(), np = t.p_size();
        for (std::size_t iu = 0; iu < nu; ++iu)
            for (std::size_t ip = 0; ip < np; ++ip)
                out.log_odds(iu, ip) = 0.5 * (t.log_odds(iu, ip) - t.log_odds(nu - 1 - iu, np - 1 - ip));
        return out;
    }

    const ReeProblem& p_;
    std::vector<Vec> u_weights_;
    bool flip_ = false;
    bool tensor_ = false;
};

// Least-squares coefficients gamma minimising |f - dF gamma| via regularised normal equations.
Vec least_squares(const std::deque<Vec>& dF, const Vec& f) {
    const std::size_t m = dF.size();
    std::vector<Vec> a(m, Vec(m));
    Vec rhs(m);
    double trace = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= i; ++j) a[i][j] = a[j][i] = dot(dF[i], dF[j]);
        rhs[i] = dot(dF[i], f);
        trace += a[i][i];
    }
    const double reg = 1e-12 * (trace > 0.0 ? trace : 1.0);
    for (std::size_t i = 0; i < m; ++i) a[i][i] += reg;
    // Gaussian elimination with partial pivoting
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < m; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        std::swap(rhs[c], rhs[piv]);
        if (a[c][c] == 0.0) continue;
        for (std::size_t r = c + 1; r < m; ++r) {
            const double q = a[r][c] / a[c][c];
            for (std::size_t k = c; k < m; ++k) a[r][k] -= q * a[c][k];
            rhs[r] -= q * rhs[c];
        }
    }
    Vec g(m, 0.0);
    for (std::size_t c = m; c-- > 0;) {
        double s = rhs[c];
        for (std::size_t k = c + 1; k < m; ++k) s -= a[c][k] * g[k];
        g[c] = a[c][c] != 0.0 ? s / a[c][c] : 0.0;
    }
    return g;
}

// Restarted GMRES for J d = b with J given as a matrix-free product.
template <class Apply>
Vec gmres(Apply&& jv, const Vec& b, double rel_tol, std::size_t restart, std::size_t max_iter) {
    const std::size_t n = b.size();
    Vec x(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return x;
    std::size_t used = 0;
    while (used < max_iter) {
        Vec r = b;
        if (used > 0) {
            const Vec ax = jv(x);
            for (std::size_t i = 0; i < n; ++i) r[i] -= ax[i];
        }
        const double beta = norm2(r);
        if (beta <= rel_tol * bnorm) break;
        const std::size_t m = std::min(restart, max_iter - used);
        std::vector<Vec> v(1, r);
        for (double& e : v[0]) e /= beta;
        std::vector<Vec> h(m + 1, Vec(m, 0.0));
        Vec cs(m), sn(m), s(m + 1, 0.0);
        s[0] = beta;
        std::size_t k = 0;
        for (; k < m; ++k) {
            Vec w = jv(v[k]);
            ++used;
            for (std::size_t i = 0; i <= k; ++i) {
                h[i][k] = dot(w, v[i]);
                for (std::size_t t = 0; t < n; ++t) w[t] -= h[i][k] * v[i][t];
            }
            h[k + 1][k] = norm2(w);
            for (std::size_t i = 0; i < k; ++i) {
                const double tmp = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = tmp;
            }
            const double den = std::hypot(h[k][k], h[k + 1][k]);
            cs[k] = den > 0.0 ? h[k][k] / den : 1.0;
            sn[k] = den > 0.0 ? h[k + 1][k] / den : 0.0;
            h[k][k] = den;
            h[k + 1][k] = 0.0;
            s[k + 1] = -sn[k] * s[k];
            s[k] = cs[k] * s[k];
            const bool done = std::abs(s[k + 1]) <= rel_tol * bnorm;
            Vec next = w;
            const double hn = norm2(w);
            if (hn > 0.0)
                for (double& e : next) e /= hn;
            v.push_back(std::move(next));
            if (done || hn == 0.0) {
                ++k;
                break;
            }
        }
        // back substitution on the k x k upper triangle
        Vec y(k, 0.0);
        for (std::size_t i = k; i-- > 0;) {
            double t = s[i];
            for (std::size_t j = i + 1; j < k; ++j) t -= h[i][j] * y[j];
            y[i] = h[i][i] != 0.0 ? t / h[i][i] : 0.0;
        }
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t t = 0; t < n; ++t) x[t] += y[i] * v[i][t];
        if (std::abs(s[k]) <= rel_tol * bnorm) break;
    }
    return x;
}

DiagnosticsReport combined_diagnostics(const ReeProblem& p, const BeliefState& s, const Vec& residual,
                                       double strict_tol) {
    DiagnosticsReport out;
    const std::size_t per = p.grid().size() * p.price_nodes().size();
    for (std::size_t k = 0; k < s.tables.size(); ++k) {
        const auto d = diagnostics(std::span<const double>(residual).subspan(k * per, per), s.tables[k], strict_tol);
        out.residual_inf = std::max(out.residual_inf, d.residual_inf);
        out.mono_violations += d.mono_violations;
    }
    if (!std::isfinite(out.residual_inf))
        out.status = SolveStatus::Diverged;
    else if (out.residual_inf < strict_tol && out.mono_violations == 0)
        out.status = SolveStatus::Strict;
    else
        out.status = SolveStatus::Fallback;
    return out;
}

// Adjacent decreases of the price along each signal axis.
std::size_t tensor_decreases(const PriceTensor& p) {
    const std::size_t g = p.size();
    std::size_t n = 0;
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            for (std::size_t l = 0; l < g; ++l) {
                const double y = p.log_odds(i, j, l);
                if (i + 1 < g && p.log_odds(i + 1, j, l) < y) ++n;
                if (j + 1 < g && p.log_odds(i, j + 1, l) < y) ++n;
                if (l + 1 < g && p.log_odds(i, j, l + 1) < y) ++n;
            }
    return n;
}

}  // namespace

ReeSolution solve_ree(const ReeProblem& problem, SeedKind seed, const BeliefState* custom_seed,
                      const IterationCallback& on_iteration) {
    const SolverConfig& cfg = problem.solver();
    MapEvaluator phi(problem);

    BeliefState start;
    switch (seed) {
        case SeedKind::NoLearning: start = problem.no_learning_seed(); break;
        case SeedKind::FullRevelation: start = problem.full_revelation_seed(); break;
        case SeedKind::Custom:
            if (!custom_seed) throw InvalidInput("custom seed requested without a belief state");
            start = *custom_seed;
            break;
    }

    ReeSolution sol;
    auto record = [&](std::size_t it, double res, const char* phase) {
        sol.history.push_back({it, res, phase});
        if (on_iteration) on_iteration(sol.history.back());
    };

    Vec x0;
    if (!phi.on_prices()) {
        x0 = problem.flatten(start);
    } else if (seed == SeedKind::FullRevelation) {
        const auto tau = problem.market().precisions();
        const auto& grid = problem.grid();
        PriceTensor fr(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t j = 0; j < grid.size(); ++j)
                for (std::size_t l = 0; l < grid.size(); ++l)
                    fr.log_odds(i, j, l) = tau[0] * grid[i] + tau[1] * grid[j] + tau[2] * grid[l];
        x0 = fr.log_odds().data();
    } else if (seed == SeedKind::NoLearning) {
        x0 = no_learning_price_tensor(problem.market(), problem.grid()).log_odds().data();
    } else if (start.lattice_prices.size() == problem.grid().size()) {
        x0 = start.lattice_prices.log_odds().data();
    } else {
        x0 = problem.clear_lattice(start).log_odds().data();
    }
    Evaluation cur = phi(x0, nullptr);
    Evaluation best = cur;
    record(0, cur.norm, "seed");

    std::deque<Vec> dX, dF;
    std::size_t rises = 0;
    bool diverged = false;
    std::size_t it = 0;

    // damped Picard with Anderson mixing; in the polishing pass a run of rises ends the pass instead
    auto mixing = [&](bool polish) {
        const auto handing_off = [&] { return !polish && cfg.newton && cur.norm < cfg.picard_tol; };
        while (it < cfg.max_iter && cur.norm >= cfg.strict_tol && !handing_off()) {
            ++it;
            Vec x(cur.x.size());
            const bool mix = cfg.anderson_memory > 0 && !dF.empty();
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = cur.x[i] + cfg.damping * cur.f[i];
            if (mix) {
                const Vec gam = least_squares(dF, cur.f);
                for (std::size_t m = 0; m < gam.size(); ++m)
                    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= gam[m] * (dX[m][i] + cfg.damping * dF[m][i]);
            }
            x = phi.project(x);
            Evaluation nxt = phi(x, &cur.prices);
            if (cfg.anderson_memory > 0) {
                Vec ddx(x.size()), ddf(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) {
                    ddx[i] = nxt.x[i] - cur.x[i];
                    ddf[i] = nxt.f[i] - cur.f[i];
                }
                dX.push_back(std::move(ddx));
                dF.push_back(std::move(ddf));
                if (dX.size() > cfg.anderson_memory) {
                    dX.pop_front();
                    dF.pop_front();
                }
                if (nxt.norm > 2.0 * cur.norm) {
                    dX.clear();
                    dF.clear();
                }
            }
            rises = nxt.norm > cur.norm ? rises + 1 : 0;
            cur = std::move(nxt);
            record(it, cur.norm, mix ? "anderson" : "picard");
            if (cur.norm < best.norm) best = cur;
            if (!std::isfinite(cur.norm) || rises >= cfg.oscillation_window) {
                diverged = !polish;
                break;
            }
        }
    };
    mixing(false);

    // Newton-Krylov polishing
    if (!diverged && cfg.newton && best.norm < cfg.picard_tol) {
        cur = best;
        for (std::size_t nit = 0; nit < cfg.newton_max_iter && it < cfg.max_iter && cur.norm >= cfg.strict_tol; ++nit) {
            ++it;
            const double xnorm = norm2(cur.x);
            // F(x) = x - Phi(x) = -f
            auto jv = [&](const Vec& v) {
                const double vn = norm2(v);
                Vec out(v.size(), 0.0);
                if (vn == 0.0) return out;
                const double h = 1e-7 * (1.0 + xnorm) / vn;
                Vec xp(v.size());
                for (std::size_t i = 0; i < v.size(); ++i) xp[i] = cur.x[i] + h * v[i];
                const Evaluation e = phi(xp, &cur.prices);
                for (std::size_t i = 0; i < v.size(); ++i) out[i] = (-e.f[i] + cur.f[i]) / h;
                return out;
            };
            const double eta = std::min(0.1, std::max(1e-4, cur.norm));
            const Vec d = gmres(jv, cur.f, eta, cfg.krylov_restart, cfg.krylov_max_iter);
            bool accepted = false;
            double lambda = 1.0;
            for (std::size_t bt = 0; bt <= cfg.max_backtracks; ++bt, lambda *= 0.5) {
                Vec x(cur.x.size());
                for (std::size_t i = 0; i < x.size(); ++i) x[i] = cur.x[i] + lambda * d[i];
                Evaluation trial = phi(phi.project(x), &cur.prices);
                if (trial.norm < cur.norm) {
                    cur = std::move(trial);
                    accepted = true;
                    break;
                }
            }
            record(it, cur.norm, "newton");
            if (cur.norm < best.norm) best = cur;
            if (!accepted) break;
        }
        // a stalled Newton step near the roundoff floor is finished off by plain mixing
        if (best.norm >= cfg.strict_tol) {
            cur = best;
            dX.clear();
            dF.clear();
            rises = 0;
            mixing(true);
        }
    }

    sol.iterations = it;
    sol.prices = best.prices;
    if (phi.on_prices()) {
        sol.beliefs = problem.beliefs_from_prices(sol.prices);
        sol.beliefs.lattice_prices = sol.prices;
        sol.diagnostics.residual_inf = best.norm;
        sol.diagnostics.mono_violations = tensor_decreases(sol.prices);
        if (!std::isfinite(best.norm))
            sol.diagnostics.status = SolveStatus::Diverged;
        else
            sol.diagnostics.status = best.norm < cfg.strict_tol ? SolveStatus::Strict : SolveStatus::Fallback;
    } else {
        sol.beliefs = problem.unflatten(best.x);
        sol.beliefs.lattice_prices = sol.prices;
        sol.diagnostics = combined_diagnostics(problem, sol.beliefs, best.residual, cfg.strict_tol);
    }
    if (diverged && sol.diagnostics.status != SolveStatus::Strict) sol.diagnostics.status = SolveStatus::Diverged;
    sol.regression = revelation_deficit(sol.prices, problem.grid(), problem.market().precisions(), problem.weights());
    return sol;
}

ReeSolution solve_ree_continuation(const MarketConfig& cfg, const SignalGrid& grid, const SolverConfig& solver,
                                  std::size_t steps, const IterationCallback& on_iteration) {
    validate(cfg);
    if (steps == 0) throw InvalidConfig("continuation needs at least one step");
    const bool cara = cfg.groups.front().pref.is_cara();
    double log_mean = 0.0;
    for (const auto& g : cfg.groups) {
        if (g.pref.is_cara() != cara) throw InvalidConfig("continuation needs a single preference family");
        log_mean += std::log(g.pref.parameter());
    }
    log_mean /= static_cast<double>(cfg.k());

    auto stage_market = [&](double t) {
        MarketConfig m = cfg;
        for (auto& g : m.groups) {
            const double v = std::exp((1.0 - t) * log_mean + t * std::log(g.pref.parameter()));
            g.pref = cara ? Preference::cara(v) : Preference::crra(v);
        }
        return m;
    };

    ReeSolution sol;
    std::vector<IterationRecord> history;
    std::size_t iterations = 0;
    for (std::size_t s = 0; s <= steps; ++s) {
        const ReeProblem problem(stage_market(static_cast<double>(s) / static_cast<double>(steps)), grid, solver);
        if (s == 0) {
            sol = solve_ree(problem, SeedKind::NoLearning, nullptr, on_iteration);
        } else {
            BeliefState seed = sol.beliefs;
            if (!problem.shared_table() && seed.tables.size() == 1) seed.tables.assign(3, seed.tables.front());
            sol = solve_ree(problem, SeedKind::Custom, &seed, on_iteration);
        }
        history.insert(history.end(), sol.history.begin(), sol.history.end());
        iterations += sol.iterations;
    }
    sol.history = std::move(history);
    sol.iterations = iterations;
    return sol;
}

AgentView posteriors_at(const ReeProblem& problem, const ReeSolution& solution, std::span<const double> u) {
    if (u.size() != 3) throw InvalidInput("posteriors_at needs a signal triple");
    const auto& cfg = problem.market();
    if (problem.method() == ReeMethod::PriceTensor) {
        const auto& grid = problem.grid();
        const std::size_t g = grid.size();
        std::array<std::size_t, 3> lo{};
        std::array<double, 3> w{};
        for (std::size_t k = 0; k < 3; ++k) {
            const double t = std::clamp((u[k] - grid.u_min()) / grid.spacing(), 0.0, static_cast<double>(g - 1));
            lo[k] = std::min(static_cast<std::size_t>(t), g - 2);
            w[k] = t - static_cast<double>(lo[k]);
        }
        double y = 0.0;
        for (int c = 0; c < 8; ++c) {
            double wt = 1.0;
            std::array<std::size_t, 3> idx{};
            for (std::size_t k = 0; k < 3; ++k) {
                const bool up = (c >> k) & 1;
                wt *= up ? w[k] : 1.0 - w[k];
                idx[k] = lo[k] + (up ? 1 : 0);
            }
            if (wt != 0.0) y += wt * solution.prices.log_odds(idx[0], idx[1], idx[2]);
        }
        const auto& P = solution.prices;
        return {logistic(problem.contour_posterior_at(P, 0, u[0], y)),
                logistic(problem.contour_posterior_at(P, 1, u[1], y)),
                logistic(problem.contour_posterior_at(P, 2, u[2], y)), logistic(y)};
    }
    auto table = [&](std::size_t k) -> const PosteriorTable& {
        return solution.beliefs.tables[problem.shared_table() ? 0 : k];
    };
    auto f = [&](double y) {
        double z = -cfg.supply;
        for (std::size_t k = 0; k < 3; ++k) {
            const auto& g = cfg.groups[k];
            z += demand_at_gap(g.pref, g.wealth, table(k).interpolate(u[k], y) - y, y);
        }
        return z;
    };
    const Bracket b;
    const double flo = f(b.lo), fhi = f(b.hi);
    if (flo < 0.0 || fhi > 0.0) throw NoEquilibrium("no clearing price at the requested signals");
    const double y = brent_root(f, b.lo, b.hi, flo, fhi, kClearingTol).x;
    return {logistic(table(0).interpolate(u[0], y)), logistic(table(1).interpolate(u[1], y)),
            logistic(table(2).interpolate(u[2], y)), logistic(y)};
}

CurvatureSummary contour_curvature_report(const PriceTensor& prices, const SignalGrid& grid, std::size_t own_index,
                                          std::span<const double> levels, double band) {
    const std::size_t g = grid.size();
    if (prices.size() != g || own_index >= g) throw InvalidInput("slice index outside the lattice");
    std::vector<double> slice(g * g);
    for (std::size_t j = 0; j < g; ++j)
        for (std::size_t l = 0; l < g; ++l) slice[j * g + l] = prices.log_odds(own_index, j, l);

    constexpr double flat = 1e-8;
    CurvatureSummary out;
    for (double p : levels) {
        LevelCurvature lc{p, 0, 0.0, 0.0, 0, ""};
        const ContourTrace t = trace_contour(slice, grid, logit(p), band);
        // u_l as a function of u_j from the row sweep, one crossing per row
        std::vector<std::pair<std::size_t, double>> pts;
        for (const auto& c : t.crossings)
            if (c.axis == 0) pts.emplace_back(c.line, c.coordinate);
        std::sort(pts.begin(), pts.end());
        lc.crossings = pts.size();
        std::vector<double> d2;
        for (std::size_t m = 1; m + 1 < pts.size(); ++m) {
            if (pts[m - 1].first + 1 != pts[m].first || pts[m].first + 1 != pts[m + 1].first) continue;
            const double h = grid.spacing();
            d2.push_back((pts[m + 1].second - 2.0 * pts[m].second + pts[m - 1].second) / (h * h));
        }
        if (d2.empty()) {
            lc.note = "skipped: fewer than three consecutive crossings";
            out.levels.push_back(lc);
            continue;
        }
        lc.min_second_difference = *std::min_element(d2.begin(), d2.end());
        lc.max_second_difference = *std::max_element(d2.begin(), d2.end());
        if (lc.max_second_difference <= flat && lc.min_second_difference >= -flat)
            lc.sign = 0;
        else if (lc.min_second_difference > -flat)
            lc.sign = 1;
        else if (lc.max_second_difference < flat)
            lc.sign = -1;
        else
            lc.sign = 2;
        out.levels.push_back(lc);
    }
    for (std::size_t m = 1; m < out.levels.size(); ++m) {
        const int a = out.levels[m - 1].sign, b = out.levels[m].sign;
        if ((a == 1 && b == -1) || (a == -1 && b == 1)) {
            out.critical_level = 0.5 * (out.levels[m - 1].level + out.levels[m].level);
            break;
        }
    }
    return out;
}

double expected_volume(const ReeProblem& problem, const ReeSolution& solution) {
    if (problem.method() == ReeMethod::PriceTensor)
        return expected_volume(problem.market(), solution.prices, problem.contour_cell_posteriors(solution.prices),
                               problem.weights());
    return expected_volume(problem.market(), solution.prices, problem.cell_posteriors(solution.beliefs, solution.prices),
                           problem.weights());
}

namespace {
constexpr const char* kCheckpointMagic = "revlab-checkpoint";
constexpr int kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(std::ostream& out, const ReeProblem& problem, const ReeSolution& solution) {
    out.precision(17);
    out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
    out << "tables " << solution.beliefs.tables.size() << " u " << problem.grid().size() << " p "
        << problem.price_nodes().size() << '\n';
    out << "u_nodes";
    for (double u : problem.grid().nodes()) out << ' ' << u;
    out << "\np_nodes";
    for (double y : problem.price_nodes()) out << ' ' << y;
    out << '\n';
    for (const auto& t : solution.beliefs.tables) {
        out << "table";
        for (double v : t.values()) out << ' ' << v;
        out << '\n';
    }
    out << "prices";
    for (double y : solution.prices.log_odds().data()) out << ' ' << y;
    out << '\n';
    out << "iterations " << solution.iterations << '\n';
    out << "history " << solution.history.size() << '\n';
    for (const auto& h : solution.history) out << h.iteration << ' ' << h.residual << ' ' << h.phase << '\n';
}

BeliefState load_checkpoint(std::istream& in, const ReeProblem& problem, std::vector<IterationRecord>* history) {
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != kCheckpointMagic) throw InvalidInput("not a checkpoint file");
    if (version != kCheckpointVersion) throw InvalidInput("unsupported checkpoint version");
    std::size_t tables = 0, nu = 0, np = 0;
    std::string t1, t2, t3;
    if (!(in >> t1 >> tables >> t2 >> nu >> t3 >> np) || t1 != "tables" || t2 != "u" || t3 != "p")
        throw InvalidInput("malformed checkpoint header");
    if (nu != problem.grid().size() || np != problem.price_nodes().size() ||
        tables != (problem.shared_table() ? 1u : 3u))
        throw InvalidInput("checkpoint lattice does not match the problem");

    auto read_row = [&](const char* tag, std::size_t n) {
        if (!(in >> word) || word != tag) throw InvalidInput(std::string("checkpoint missing ") + tag);
        Vec v(n);
        for (double& x : v)
            if (!(in >> x)) throw InvalidInput("truncated checkpoint");
        return v;
    };
    const Vec u = read_row("u_nodes", nu);
    const Vec y = read_row("p_nodes", np);
    for (std::size_t i = 0; i < nu; ++i)
        if (std::abs(u[i] - problem.grid()[i]) > 1e-12) throw InvalidInput("checkpoint signal grid differs");
    for (std::size_t i = 0; i < np; ++i)
        if (std::abs(y[i] - problem.price_nodes()[i]) > 1e-9) throw InvalidInput("checkpoint price grid differs");
    Vec all;
    for (std::size_t k = 0; k < tables; ++k) {
        const Vec t = read_row("table", nu * np);
        all.insert(all.end(), t.begin(), t.end());
    }
    const std::size_t g = problem.grid().size();
    PriceTensor prices(g);
    prices.log_odds().data() = read_row("prices", g * g * g);
    std::size_t iterations = 0, n = 0;
    if (!(in >> word >> iterations) || word != "iterations") throw InvalidInput("checkpoint missing iterations");
    if (!(in >> word >> n) || word != "history") throw InvalidInput("checkpoint missing history");
    if (history) {
        history->clear();
        for (std::size_t i = 0; i < n; ++i) {
            IterationRecord r;
            if (!(in >> r.iteration >> r.residual >> r.phase)) throw InvalidInput("truncated checkpoint history");
            history->push_back(r);
        }
    }
    BeliefState s = problem.unflatten(all);
    s.lattice_prices = std::move(prices);
    return s;
}

}  // namespace revlab
