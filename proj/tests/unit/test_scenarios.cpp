#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "riskbound/error.hpp"
#include "riskbound/random.hpp"
#include "riskbound/scenarios.hpp"

using namespace riskbound;
using doctest::Approx;

namespace {

void check_oracle_against_mc(const Scenario& sc, const std::vector<std::size_t>& members, std::uint64_t seed) {
    const auto mc = monte_carlo_risks(sc, members, 1'000'000, seed);
    for (std::size_t i = 0; i < members.size(); ++i) {
        const double truth = sc.oracle.true_risk(members[i]);
        INFO(sc.name << " member " << members[i] << " truth " << truth << " mc " << mc[i].mean);
        CHECK(std::abs(mc[i].mean - truth) <= 4.0 * mc[i].stderr_ + 1e-12);
    }
}

}  // namespace

TEST_CASE("oracle self-consistency by Monte Carlo") {
    check_oracle_against_mc(cube_scenario(7), {0, 3, 7}, 1);

    const auto reg = finite_dim_regression(3, 256, 2);
    check_oracle_against_mc(reg, {0, 31, 62, 124}, 2);

    TsybakovParams tp;
    tp.half_grid = 8;
    const auto ts = tsybakov_scenario(tp);
    check_oracle_against_mc(ts, {0, 4, 8, 12, 16}, 3);

    const auto fs = finite_support_scenario(9, 6, 4);
    check_oracle_against_mc(fs, {0, 1, 2, 3, 4, 5}, 5);
}

TEST_CASE("cube truth") {
    const auto sc = cube_scenario(15);
    CHECK(sc.cls.size() == 16);
    for (std::size_t j = 0; j < 16; ++j) {
        CHECK(sc.oracle.true_risk(j) == 0.5);
        for (std::size_t k = 0; k < 16; ++k) CHECK(sc.oracle.second_moment(j, k) == (j == k ? 0.0 : 0.5));
    }
    CHECK(sc.truth.at("excess") == 0.0);
}

TEST_CASE("cube delta_n sits above the non-inclusion threshold") {
    const auto sc = cube_scenario(15);
    BoundConstants c;
    c.t = 1.0;
    const auto prof = oracle_profiles(sc, 256, 100, 9);
    const auto r = delta_family(BoundInputs{prof.phi, prof.D, std::nullopt, std::nullopt, 256.0}, c);
    CHECK(r.delta_n >= 0.25 * std::sqrt(std::log(15.0) / 256.0));
}

TEST_CASE("tsybakov truth and cell count") {
    TsybakovParams tp;
    tp.kappa = 1.0;
    tp.rho = 0.5;
    const auto sc = tsybakov_scenario(tp);
    CHECK(sc.truth.at("beta") == Approx(2.0 / 3.0));
    CHECK(sc.truth.at("expected_slope") == Approx(-2.0 / 3.0));
    CHECK(sc.cls.size() == 2 * tp.half_grid + 1);
    for (std::size_t n : {64u, 256u, 1024u, 4096u})
        CHECK(tsybakov_cells(1.0, 0.5, n) == static_cast<std::size_t>(std::lround(std::pow(n, 1.0 / 3.0))));
    // The 0-1 loss class has the symmetric-difference metric.
    for (std::size_t j = 0; j < sc.cls.size(); j += 7) CHECK(sc.oracle.second_moment(j, j) == 0.0);
    const auto many = tsybakov_rate_scenario(1.0, 0.5, 1024);
    CHECK(many.truth.at("cells") == 10.0);
    CHECK(static_cast<bool>(many.erm_excess));
    CHECK_THROWS_AS((void)many.oracle.true_risk(0), Error);
}

TEST_CASE("legendre basis is orthonormal") {
    const int m = 4000;
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) {
                const double x = (i + 0.5) / m;
                s += legendre_basis(a, x) * legendre_basis(b, x);
            }
            CHECK(s / m == Approx(a == b ? 1.0 : 0.0).epsilon(1e-5).scale(1.0));
        }
}

TEST_CASE("regression risk by quadrature equals noise plus distance") {
    RegressionParams p;
    const auto coefs = regression_coefficients(p);
    REQUIRE(coefs.size() == 125);
    for (std::size_t j = 0; j < coefs.size(); j += 11) {
        double dist = 0.0;
        for (std::size_t k = 0; k < coefs[j].size(); ++k) dist += std::pow(coefs[j][k] - p.g_star[k], 2);
        CHECK(regression_risk_quadrature(p.g_star, coefs[j]) == Approx(kRegressionNoiseVariance + dist).epsilon(1e-10));
    }
    const auto sc = finite_dim_regression(p);
    for (std::size_t j = 0; j < sc.cls.size(); j += 17) {
        double dist = 0.0;
        for (std::size_t k = 0; k < coefs[j].size(); ++k) dist += std::pow(coefs[j][k] - p.g_star[k], 2);
        CHECK(sc.oracle.true_risk(j) == Approx(kRegressionNoiseVariance + dist).epsilon(1e-12));
    }
}

TEST_CASE("fast empirical risks agree with direct evaluation") {
    const auto reg = finite_dim_regression(2, 64, 1);
    const auto cube = cube_scenario(5);
    for (const Scenario* sc : {&reg, &cube}) {
        REQUIRE(static_cast<bool>(sc->fast_risks));
        Rng rng(17);
        const auto s = sc->oracle.sampler(50, rng);
        const auto fast = sc->fast_risks(s);
        const auto slow = empirical_risks(sc->cls, s);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t j = 0; j < fast.size(); ++j) CHECK(fast[j] == Approx(slow[j]).epsilon(1e-10));
    }
}

TEST_CASE("nested regression family") {
    const auto ns = nested_regression();
    CHECK(ns.k_star == 2);
    REQUIRE(ns.family.classes.size() == 4);
    const std::size_t sizes[] = {3, 9, 27, 81};
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(ns.family.classes[k].size() == sizes[k]);
        CHECK(ns.index[k].size() == sizes[k]);
        if (k > 0)
            for (std::size_t i : ns.index[k - 1])
                CHECK(std::find(ns.index[k].begin(), ns.index[k].end(), i) != ns.index[k].end());
    }
    auto best = [&](std::size_t k) {
        double m = kInfinity;
        for (std::size_t i : ns.index[k]) m = std::min(m, ns.full.oracle.true_risk(i));
        return m;
    };
    CHECK(best(0) > best(1) + 1e-4);
    CHECK(best(1) == Approx(kRegressionNoiseVariance).epsilon(1e-12));
    CHECK(best(3) == Approx(best(1)).epsilon(1e-12));
}

TEST_CASE("fit_slope and quantile") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 - 0.75 * v);
    const auto f = fit_slope(x, y);
    CHECK(f.slope == Approx(-0.75).epsilon(1e-12));
    CHECK(f.intercept == Approx(3.0).epsilon(1e-12));
    CHECK(f.half_width == Approx(0.0).scale(1.0));

    const std::vector<double> noisy{3.0, 1.4, 0.9, -0.2, -1.0};
    const auto g = fit_slope(x, noisy);
    CHECK(g.half_width > 0.0);
    CHECK(std::abs(g.slope + 0.95) < g.half_width);

    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == Approx(2.5));
    CHECK_THROWS_AS((void)quantile({}, 0.5), Error);
}

TEST_CASE("experiment plans are validated") {
    ExperimentPlan p;
    p.n_sweep = {64, 128};
    CHECK_NOTHROW(p.validate());
    p.n_sweep = {128, 64};
    CHECK_THROWS_AS(p.validate(), Error);
    p.n_sweep = {64, 128};
    p.replicates = 1;
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("experiments are deterministic given the seed") {
    ExperimentPlan p;
    p.n_sweep = {32, 64, 128, 256};
    p.replicates = 10;
    p.seed = 21;
    auto factory = [](std::size_t n) { return finite_dim_regression(2, n, 2); };
    const auto a = run_rate_experiment(factory, p);
    const auto b = run_rate_experiment(factory, p);
    CHECK(a.excess == b.excess);
    CHECK(a.slope == b.slope);
    const auto sc = cube_scenario(3);
    const auto pa = phi_n(sc.cls, sc.oracle, 64, 1.0, 30, 4);
    const auto pb = phi_n(sc.cls, sc.oracle, 64, 1.0, 30, 4);
    CHECK(pa.mean == pb.mean);
}

TEST_CASE("root-n scaled excess shrinks on a parametric class") {
    ExperimentPlan p;
    p.n_sweep = {64, 128, 256, 512, 1024, 2048};
    p.replicates = 50;
    p.seed = 3;
    const auto r = run_rate_experiment([](std::size_t n) { return finite_dim_regression(3, n, 6); }, p);
    REQUIRE_FALSE(r.degenerate);
    for (std::size_t i = r.n.size() / 2 + 1; i < r.n.size(); ++i)
        CHECK(std::sqrt(static_cast<double>(r.n[i])) * r.mean[i] <
              std::sqrt(static_cast<double>(r.n[i - 1])) * r.mean[i - 1]);
}

TEST_CASE("small cube experiment") {
    const auto r = run_prop2_experiment({3, 7}, 256, 1.0, 40, 2, 100);
    REQUIRE(r.rows.size() == 2);
    for (const auto& row : r.rows) {
        CHECK(row.min_excess_members == row.N + 1);
        CHECK(row.delta_n >= row.threshold);
    }
    CHECK(r.delta_monotone);
}
