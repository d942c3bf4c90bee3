#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "revlab/clearing.hpp"
#include "revlab/errors.hpp"
#include "revlab/metrics.hpp"

using namespace revlab;

namespace {

struct Fit {
    double slope, r2;
};

Fit naive_fit(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
    long double sw = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
        sxx += w[i] * x[i] * x[i];
        syy += w[i] * y[i] * y[i];
        sxy += w[i] * x[i] * y[i];
    }
    const long double cxx = sxx - sx * sx / sw, cyy = syy - sy * sy / sw, cxy = sxy - sx * sy / sw;
    return {static_cast<double>(cxy / cxx), static_cast<double>(cxy * cxy / (cxx * cyy))};
}

// No-learning deficit on a small lattice, with clearing by bisection in probability space.
double deficit_oracle(double gamma, double tau, std::size_t g) {
    const double step = 8.0 / static_cast<double>(g - 1);
    std::vector<double> x, y, w;
    auto dens = [&](int v, double u) { return std::exp(-0.5 * tau * (u - v + 0.5) * (u - v + 0.5)); };
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            for (std::size_t l = 0; l < g; ++l) {
                const double u[3] = {-4 + step * i, -4 + step * j, -4 + step * l};
                double mu[3];
                for (int k = 0; k < 3; ++k) mu[k] = 1.0 / (1.0 + std::exp(-tau * u[k]));
                auto excess = [&](double p) {
                    double s = 0;
                    for (double m : mu) {
                        const double r = std::pow(m * (1 - p) / ((1 - m) * p), 1.0 / gamma);
                        s += (r - 1) / ((1 - p) + r * p);
                    }
                    return s;
                };
                double lo = 1e-14, hi = 1 - 1e-14;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (excess(mid) > 0 ? lo : hi) = mid;
                }
                const double p = 0.5 * (lo + hi);
                x.push_back(tau * (u[0] + u[1] + u[2]));
                y.push_back(std::log(p / (1 - p)));
                w.push_back(0.5 * dens(1, u[0]) * dens(1, u[1]) * dens(1, u[2]) +
                            0.5 * dens(0, u[0]) * dens(0, u[1]) * dens(0, u[2]));
            }
    return 1.0 - naive_fit(x, y, w).r2;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("weighted regression agrees with the normal equations") {
    const std::vector<double> x{0.1, 0.5, 1.2, 2.0, 3.1, 4.4};
    const std::vector<double> y{1.0, 1.9, 2.1, 4.5, 5.0, 9.2};
    const std::vector<double> w{1.0, 0.5, 2.0, 1.0, 0.3, 1.7};
    const RegressionReport r = weighted_regression(x, y, w);
    const Fit f = naive_fit(x, y, w);
    CHECK(r.slope == doctest::Approx(f.slope).epsilon(1e-12));
    CHECK(r.r2 == doctest::Approx(f.r2).epsilon(1e-12));
    CHECK(r.deficit == doctest::Approx(1.0 - f.r2).epsilon(1e-12));
    CHECK(r.n_cells == 6);
}

TEST_CASE("exact line has zero deficit") {
    const std::vector<double> x{-2, -1, 0, 1, 2}, w{1, 2, 3, 2, 1};
    std::vector<double> y;
    for (double v : x) y.push_back(0.4 * v - 1.0);
    const RegressionReport r = weighted_regression(x, y, w);
    CHECK(r.deficit < 1e-14);
    CHECK(r.slope == doctest::Approx(0.4));
    CHECK(r.intercept == doctest::Approx(-1.0));
}

TEST_CASE("degenerate regressions throw") {
    const std::vector<double> x{1, 1, 1}, y{1, 2, 3}, w{1, 1, 1}, zero{0, 0, 0};
    CHECK_THROWS_AS(weighted_regression(x, y, w), DegenerateRegression);
    CHECK_THROWS_AS(weighted_regression(y, x, w), DegenerateRegression);
    CHECK_THROWS_AS(weighted_regression(y, y, zero), DegenerateRegression);
    const std::vector<double> short_y{1, 2};
    CHECK_THROWS_AS(weighted_regression(x, short_y, w), InvalidInput);
}

TEST_CASE("no-learning deficit matches an independent lattice oracle") {
    for (double gamma : {0.5, 2.0}) {
        const MarketConfig cfg = homogeneous_market(Preference::crra(gamma), 2.0);
        const SignalGrid g = make_grid(6);
        const double oracle = deficit_oracle(gamma, 2.0, 6);
        CHECK(no_learning_deficit(cfg, g).deficit == doctest::Approx(oracle).epsilon(1e-8));
        const auto tau = cfg.precisions();
        CHECK(revelation_deficit(no_learning_price_tensor(cfg, g), g, tau, joint_weights(g, tau)).deficit ==
              doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("no-learning deficits on the 20-point grid") {
    // frozen after agreement with the lattice oracle above at G = 6
    struct Row {
        double gamma, tau, deficit;
    };
    const Row rows[] = {{0.5, 2.0, 0.0619959}, {1.0, 2.0, 0.0294887}, {0.1, 0.5, 0.146346}, {3.0, 2.0, 0.00571734}};
    const SignalGrid g = make_grid(20);
    for (const Row& r : rows) {
        const double d = no_learning_deficit(homogeneous_market(Preference::crra(r.gamma), r.tau), g).deficit;
        CHECK(d == doctest::Approx(r.deficit).epsilon(1e-5));
    }
    CHECK(no_learning_deficit(homogeneous_market(Preference::cara(1.0), 2.0), g).deficit < 1e-10);
}

TEST_CASE("no-learning deficit works for other group counts") {
    const SignalGrid g = make_grid(6);
    for (std::size_t k : {2u, 4u}) {
        const RegressionReport r = no_learning_deficit(homogeneous_market(Preference::crra(0.5), 2.0, k), g);
        CHECK(r.n_cells == static_cast<std::size_t>(std::pow(6.0, static_cast<double>(k))));
        CHECK(r.deficit > 0.0);
        CHECK(r.deficit < 0.2);
    }
    CHECK(no_learning_deficit(homogeneous_market(Preference::cara(2.0), 1.0, 5), g).deficit < 1e-10);
}

TEST_CASE("full revelation has zero deficit and zero volume under CARA") {
    const MarketConfig cfg = homogeneous_market(Preference::cara(1.0), 2.0);
    const SignalGrid g = make_grid(8);
    PriceTensor fr(8);
    std::vector<Tensor3> post(3, Tensor3(8));
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            for (std::size_t l = 0; l < 8; ++l) {
                const double t = 2.0 * (g[i] + g[j] + g[l]);
                fr.log_odds(i, j, l) = t;
                for (auto& p : post) p(i, j, l) = t;
            }
    const auto tau = cfg.precisions();
    const Tensor3 w = joint_weights(g, tau);
    const RegressionReport r = revelation_deficit(fr, g, tau, w);
    CHECK(r.deficit < 1e-14);
    CHECK(r.slope == doctest::Approx(1.0));
    CHECK(expected_volume(cfg, fr, post, w) < 1e-14);
    CHECK(expected_volume_no_learning(cfg, g) > 0.1);
}

TEST_CASE("trade volume is half the gross position") {
    const std::vector<double> x{4.0 / 3, -8.0 / 3, 4.0 / 3};
    CHECK(trade_volume(x) == doctest::Approx(8.0 / 3));
}

TEST_CASE("diagnostics classify residuals") {
    PosteriorTable t({-1.0, 0.0, 1.0}, {-1.0, 1.0});
    t.log_odds(0, 0) = -2;
    t.log_odds(0, 1) = -1;
    t.log_odds(1, 0) = 0;
    t.log_odds(1, 1) = 1;
    t.log_odds(2, 0) = 2;
    t.log_odds(2, 1) = 3;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::vector<double> tiny{1e-14, nan, -5e-13};
    const DiagnosticsReport ok = diagnostics(tiny, t);
    CHECK(ok.status == SolveStatus::Strict);
    CHECK(ok.residual_inf == doctest::Approx(5e-13));
    const std::vector<double> big{1e-3};
    CHECK(diagnostics(big, t).status == SolveStatus::Fallback);
    const std::vector<double> bad{INFINITY};
    CHECK(diagnostics(bad, t).status == SolveStatus::Diverged);
    t.log_odds(2, 1) = -5;
    CHECK(monotonicity_violations(t) == 2);
    CHECK(diagnostics(tiny, t).status == SolveStatus::Fallback);
    CHECK(to_string(SolveStatus::Strict) == "strict");
}

}
