#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "revlab/econ.hpp"
#include "revlab/errors.hpp"

using namespace revlab;

namespace {

// Certainty equivalent by golden-section search on expected utility over the solvency interval.
double ce_oracle(double gamma, double w, double mu, double p) {
    auto eu = [&](double x) {
        const double w1 = w + (1 - p) * x, w0 = w - p * x;
        if (gamma == 1.0) return mu * std::log(w1) + (1 - mu) * std::log(w0);
        return (mu * std::pow(w1, 1 - gamma) + (1 - mu) * std::pow(w0, 1 - gamma)) / (1 - gamma);
    };
    double a = -w / (1 - p) * (1 - 1e-12), b = w / p * (1 - 1e-12);
    const double r = (std::sqrt(5.0) - 1) / 2;
    for (int i = 0; i < 200; ++i) {
        const double c = b - r * (b - a), d = a + r * (b - a);
        if (eu(c) > eu(d))
            b = d;
        else
            a = c;
    }
    const double u = eu(0.5 * (a + b));
    if (gamma == 1.0) return std::exp(u);
    return std::pow(u * (1 - gamma), 1 / (1 - gamma));
}

PriceTensor fr_prices(const SignalGrid& g, double tau) {
    PriceTensor p(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j)
            for (std::size_t l = 0; l < g.size(); ++l) p.log_odds(i, j, l) = tau * (g[i] + g[j] + g[l]);
    return p;
}

}  // namespace

TEST_SUITE("econ") {

TEST_CASE("log utility certainty equivalent at W=1, mu=0.8, p=0.5") {
    // x = 1.2, terminal wealth 1.6 or 0.4
    const double oracle = std::exp(0.8 * std::log(1.6) + 0.2 * std::log(0.4));
    CHECK(oracle == doctest::Approx(1.212573).epsilon(1e-6));
    CHECK(certainty_equivalent(Preference::crra(1.0), 1.0, 0.8, 0.5) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("CRRA certainty equivalents match direct maximisation") {
    for (double gamma : {0.5, 1.0, 2.0, 5.0})
        for (double mu : {0.2, 0.6, 0.9})
            for (double p : {0.3, 0.5, 0.75}) {
                const double ce = certainty_equivalent(Preference::crra(gamma), 1.5, mu, p);
                CHECK(ce == doctest::Approx(ce_oracle(gamma, 1.5, mu, p)).epsilon(1e-9));
                CHECK(ce >= 1.5 - 1e-12);
            }
}

TEST_CASE("CARA certainty equivalent adds relative entropy over alpha") {
    for (double alpha : {0.5, 2.0})
        for (double mu : {0.1, 0.7})
            for (double p : {0.4, 0.85}) {
                const double kl = p * std::log(p / mu) + (1 - p) * std::log((1 - p) / (1 - mu));  // price measured against belief
                CHECK(certainty_equivalent(Preference::cara(alpha), 1.0, mu, p) ==
                      doctest::Approx(1.0 + kl / alpha).epsilon(1e-12));
            }
}

TEST_CASE("no trade when belief equals price") {
    for (const Preference& pref : {Preference::cara(1.0), Preference::crra(0.5), Preference::crra(1.0)})
        CHECK(certainty_equivalent(pref, 2.0, 0.35, 0.35) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("certainty equivalent of a fixed position") {
    const double w = 1.0, mu = 0.7, p = 0.4, x = 0.8;
    const double w1 = w + (1 - p) * x, w0 = w - p * x;
    const double cara = -std::log(mu * std::exp(-2.0 * w1) + (1 - mu) * std::exp(-2.0 * w0)) / 2.0;
    CHECK(certainty_equivalent_at(Preference::cara(2.0), w, logit(mu), logit(p), x) == doctest::Approx(cara).epsilon(1e-12));
    const double crra = 1.0 / (mu / w1 + (1 - mu) / w0);
    CHECK(certainty_equivalent_at(Preference::crra(2.0), w, logit(mu), logit(p), x) == doctest::Approx(crra).epsilon(1e-12));
    CHECK(certainty_equivalent_at(Preference::crra(2.0), w, logit(mu), logit(p), 10.0) == 0.0);
}

TEST_CASE("certainty equivalent rejects boundary beliefs") {
    CHECK_THROWS_AS(certainty_equivalent(Preference::crra(1.0), 1.0, 1.0, 0.5), InvalidInput);
    CHECK_THROWS_AS(certainty_equivalent(Preference::crra(1.0), 1.0, 0.5, 0.0), InvalidInput);
    CHECK_THROWS_AS(certainty_equivalent(Preference::crra(1.0), 0.0, 0.5, 0.5), InvalidInput);
}

TEST_CASE("own signal is worthless at fully revealing CARA prices") {
    for (double tau : {1.0, 2.0}) {
        const SignalGrid g = make_grid(12);
        const MarketConfig cfg = homogeneous_market(Preference::cara(1.0), tau);
        const CertaintyEquivalentReport r = information_report(cfg, g, fr_prices(g, tau));
        CHECK(std::abs(r.v_info) < 1e-10);
        InformationOptions fresh;
        fresh.tau_extra = 2.0;
        CHECK(value_of_information(cfg, g, fr_prices(g, tau), fresh) > 1e-3);
    }
}

TEST_CASE("own signal has value under CRRA and the gain is pointwise nonnegative") {
    const SignalGrid g = make_grid(10);
    const MarketConfig cfg = homogeneous_market(Preference::crra(0.5), 2.0);
    const CertaintyEquivalentReport r = information_report(cfg, g, informed_share_prices(cfg, g, 1.0));
    CHECK(r.v_info > 0.0);
    CHECK(r.v_info == doctest::Approx(r.ce_informed - r.ce_uninformed).epsilon(1e-12));
    for (double v : r.per_cell.data()) CHECK(v >= -1e-12);
    InformationOptions bad;
    bad.group = 3;
    CHECK_THROWS_AS(information_report(cfg, g, informed_share_prices(cfg, g, 1.0), bad), InvalidInput);
}

TEST_CASE("informed-share prices span the prior and full participation") {
    const SignalGrid g = make_grid(6);
    const MarketConfig cfg = homogeneous_market(Preference::crra(2.0), 2.0);
    const PriceTensor none = informed_share_prices(cfg, g, 0.0);
    for (double y : none.log_odds().data()) CHECK(std::abs(y) < 1e-10);
    const PriceTensor all = informed_share_prices(cfg, g, 1.0);
    const PriceTensor nl = no_learning_price_tensor(cfg, g);
    for (std::size_t c = 0; c < all.log_odds().data().size(); ++c)
        CHECK(all.log_odds().data()[c] == doctest::Approx(nl.log_odds().data()[c]).epsilon(1e-10));
    CHECK_THROWS_AS(informed_share_prices(cfg, g, -0.1), InvalidConfig);
}

TEST_CASE("acquisition equilibrium: corners and an interior root") {
    const SignalGrid g = make_grid(8);
    InformationValueCurve curve(homogeneous_market(Preference::crra(1.0), 2.0), g);
    const AcquisitionOptions opts;
    const double v0 = curve(opts.lambda_floor), v1 = curve(1.0);
    REQUIRE(v0 > v1);

    const AcquisitionEquilibrium high = gs_equilibrium(curve, 2.0 * v0);
    CHECK(high.boundary == AcquisitionBoundary::Corner0);
    CHECK(high.lambda == 0.0);
    const AcquisitionEquilibrium low = gs_equilibrium(curve, 0.5 * v1);
    CHECK(low.boundary == AcquisitionBoundary::Corner1);
    CHECK(low.lambda == 1.0);

    const double c = 0.5 * (v0 + v1);
    const AcquisitionEquilibrium mid = gs_equilibrium(curve, c);
    CHECK(mid.boundary == AcquisitionBoundary::Interior);
    CHECK(mid.monotone);
    CHECK(std::abs(mid.value - c) < 1e-6);
    CHECK(std::abs(curve(mid.lambda) - c) < 1e-6);
    CHECK(mid.lambda > 0.0);
    CHECK(mid.lambda < 1.0);

    const AcquisitionEquilibrium dearer = gs_equilibrium(curve, c + 0.25 * (v0 - v1));
    CHECK(dearer.lambda <= mid.lambda);
    CHECK_THROWS_AS(gs_equilibrium(curve, 0.0), InvalidConfig);
    CHECK(std::string(to_string(AcquisitionBoundary::Interior)) == "interior");
}

}
