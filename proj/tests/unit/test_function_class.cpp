#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "riskbound/error.hpp"
#include "riskbound/function_class.hpp"
#include "riskbound/random.hpp"
#include "riskbound/scenarios.hpp"

using namespace riskbound;
using doctest::Approx;

namespace {

Sample points_1d(const std::vector<double>& xs) {
    Sample s;
    for (double x : xs) s.points.push_back({{x}, 0.0});
    return s;
}

// x uniform on {1/4, 3/4}; members I(x >= 1/2) and 0.
OracleDistribution half_oracle() {
    OracleDistribution o;
    o.sampler = [](std::size_t n, Rng& rng) {
        Sample s;
        for (std::size_t i = 0; i < n; ++i) s.points.push_back({{rng.bernoulli(0.5) ? 0.75 : 0.25}, 0.0});
        return s;
    };
    o.true_risk = [](std::size_t j) { return j == 0 ? 0.5 : 0.0; };
    o.second_moment = [](std::size_t j, std::size_t k) { return j == k ? 0.0 : 0.5; };
    return o;
}

FunctionClass half_class() {
    return FunctionClass({[](const Point& p) { return p.x[0] >= 0.5 ? 1.0 : 0.0; }, [](const Point&) { return 0.0; }},
                         {"step", "zero"}, true);
}

}  // namespace

TEST_CASE("evaluate examples") {
    FunctionClass half({[](const Point&) { return 0.5; }});
    const auto m = evaluate(half, points_1d({0.1, 0.7, 0.9}));
    for (std::size_t i = 0; i < 3; ++i) CHECK(m.at(i, 0) == 0.5);

    FunctionClass coords({[](const Point& p) { return p.x[0]; }, [](const Point& p) { return p.x[1]; }});
    Sample s;
    s.points = {{{0.0, 1.0}, 0.0}, {{1.0, 0.0}, 0.0}};
    const auto c = evaluate(coords, s);
    CHECK(c.at(0, 0) == 0.0);
    CHECK(c.at(0, 1) == 1.0);
    CHECK(c.at(1, 0) == 1.0);
    CHECK(c.at(1, 1) == 0.0);

    const auto t = evaluate(half_class(), points_1d({0.2, 0.8}));
    CHECK(t.at(0, 0) == 0.0);
    CHECK(t.at(1, 0) == 1.0);
}

TEST_CASE("evaluate rejects values outside the unit interval") {
    FunctionClass bad({[](const Point&) { return 1.5; }});
    CHECK_THROWS_AS((void)evaluate(bad, points_1d({0.1})), Error);
    FunctionClass not_binary({[](const Point&) { return 0.5; }}, {}, true);
    CHECK_THROWS_AS((void)evaluate(not_binary, points_1d({0.1})), Error);
}

TEST_CASE("erm examples") {
    const auto r = erm(std::vector<double>{0.4, 0.2, 0.2});
    CHECK(r.erm_index + 1 == 2);
    CHECK(r.empirical_excess[1] == 0.0);
    const auto single = erm(std::vector<double>{0.3});
    CHECK(single.erm_index == 0);
    CHECK(single.empirical_excess[0] == 0.0);
}

TEST_CASE("erm matches an exhaustive scan on a Bernoulli sample") {
    Rng rng(7);
    FunctionClass cls({[](const Point& p) { return p.x[0]; }, [](const Point& p) { return 1.0 - p.x[0]; },
                       [](const Point&) { return 0.5; }});
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> xs;
        for (int i = 0; i < 5; ++i) xs.push_back(rng.bernoulli(0.3) ? 1.0 : 0.0);
        const auto m = evaluate(cls, points_1d(xs));
        const auto r = erm(m);
        std::size_t best = 0;
        for (std::size_t j = 1; j < 3; ++j)
            if (m.column_means()[j] < m.column_means()[best]) best = j;
        CHECK(r.erm_index == best);
    }
}

TEST_CASE("delta_minimal and diameter on the cube") {
    const auto sc = cube_scenario(3);
    RiskReport r = erm(std::vector<double>(4, 0.5));
    attach_oracle(r, sc.oracle);
    for (double d : {0.0, 0.1, 1.0}) CHECK(delta_minimal(r, d, Which::True).size() == 4);
    const auto metric = MetricTable::from_oracle(sc.oracle, 4);
    CHECK(diameter({0, 1, 2, 3}, metric) == Approx(std::sqrt(0.5)));
    CHECK(diameter({2}, metric) == 0.0);
}

TEST_CASE("delta_minimal examples") {
    RiskReport r = erm(std::vector<double>{0.3, 0.1, 0.6});
    CHECK(delta_minimal(r, 1.0, Which::Empirical).size() == 3);
    const auto zero = delta_minimal(r, 0.0, Which::Empirical);
    CHECK(std::find(zero.begin(), zero.end(), r.erm_index) != zero.end());
    CHECK_THROWS_AS((void)delta_minimal(r, 0.1, Which::True), Error);
}

TEST_CASE("empirical diameter example") {
    const EvaluationMatrix m(2, 2, {0.0, 0.0, 1.0, 1.0});
    CHECK(diameter({0, 1}, MetricTable::empirical(m)) == Approx(1.0));
}

TEST_CASE("phi_hat examples") {
    const EvaluationMatrix one(1, 2, {0.0, 1.0});
    CHECK(phi_hat(one, {RademacherDraw{{1.0}, 0}}, 1.0) == Approx(1.0));
    const EvaluationMatrix two(2, 2, {0.0, 0.0, 1.0, 1.0});
    const auto signs = make_signs(2, 1);
    REQUIRE(signs.size() == 4);
    CHECK(phi_hat(two, signs, 1.0) == Approx(0.5));
    CHECK(phi_hat(two, signs, 0.5) == 0.0);
}

TEST_CASE("make_signs enumerates small n and samples large n") {
    const auto all = make_signs(3, 1);
    CHECK(all.size() == 8);
    const auto mc = make_signs(40, 1, 64);
    CHECK(mc.size() == 64);
    for (const auto& d : mc)
        for (double e : d.signs) CHECK((e == 1.0 || e == -1.0));
}

TEST_CASE("phi_n examples") {
    FunctionClass single({[](const Point&) { return 0.3; }});
    OracleDistribution o = half_oracle();
    o.true_risk = [](std::size_t) { return 0.3; };
    auto r = phi_n(single, o, 4, 1.0, 8, 1);
    CHECK(r.mean == 0.0);
    CHECK(r.stderr_ == 0.0);

    FunctionClass constants({[](const Point&) { return 0.0; }, [](const Point&) { return 1.0; }});
    o.true_risk = [](std::size_t j) { return static_cast<double>(j); };
    r = phi_n(constants, o, 4, 1.0, 8, 1);
    CHECK(r.mean == Approx(0.0));
}

TEST_CASE("phi_n agrees with the exhaustive outcome oracle") {
    // E|Bin(4,1/2)/4 - 1/2| by enumerating the 16 outcomes.
    double exact = 0.0;
    for (unsigned code = 0; code < 16; ++code) exact += std::abs(__builtin_popcount(code) / 4.0 - 0.5) / 16.0;
    CHECK(exact == Approx(0.1875).epsilon(1e-15));
    const auto r = phi_n(half_class(), half_oracle(), 4, 1.0, 20000, 11);
    CHECK(std::abs(r.mean - exact) <= 4.0 * r.stderr_);
}

TEST_CASE("phi_n needs an oracle and two replicates") {
    OracleDistribution o = half_oracle();
    CHECK_THROWS_AS((void)phi_n(half_class(), o, 4, 1.0, 1, 1), Error);
    o.true_risk = nullptr;
    CHECK_THROWS_AS((void)phi_n(half_class(), o, 4, 1.0, 8, 1), Error);
}

TEST_CASE("phi_n is deterministic given the seed") {
    const auto a = phi_n(half_class(), half_oracle(), 16, 1.0, 50, 3);
    const auto b = phi_n(half_class(), half_oracle(), 16, 1.0, 50, 3);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("r_check examples") {
    const auto sc = cube_scenario(3);
    const auto metric = MetricTable::from_oracle(sc.oracle, 4);
    const std::vector<double> flat_excess(4, 0.0);
    CHECK(r_check(flat_excess, metric, 0.0, 0.5, 0.0) == 0.0);

    MetricTable m(3);
    m.set(0, 1, 0.04);
    m.set(0, 2, 0.25);
    m.set(1, 2, 0.09);
    const std::vector<double> ex{0.0, 0.1, 0.3};
    CHECK(r_check(ex, m, 0.2, 0.2, 0.0) == 0.0);
    // Brute force: sup over {0,1,2} of the distance to {0,1}.
    CHECK(r_check(ex, m, 0.1, 0.3, 0.0) == Approx(0.3));
    CHECK(r_check(ex, m, 0.0, 0.3, 0.0) == Approx(0.5));
    CHECK_THROWS_AS((void)r_check({0.1, 0.2}, MetricTable(2), 0.0, 0.1, 0.0), Error);
}

TEST_CASE("property: nesting, diameter monotonicity and metric dominance") {
    Rng rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t m = 6;
        std::vector<std::vector<double>> pts(m, std::vector<double>(3));
        for (auto& p : pts)
            for (auto& c : p) c = rng.uniform();
        MetricTable metric(m);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a + 1; b < m; ++b) {
                double d2 = 0.0;
                for (int c = 0; c < 3; ++c) d2 += (pts[a][c] - pts[b][c]) * (pts[a][c] - pts[b][c]);
                metric.set(a, b, d2);
            }
        std::vector<double> risks(m);
        for (auto& r : risks) r = rng.uniform();
        RiskReport rep = erm(risks);
        rep.excess = rep.empirical_excess;
        const std::vector<double> levels{0.0, 0.1, 0.2, 0.4, 0.7, 1.0};
        double prev_diam = 0.0;
        std::vector<std::size_t> prev;
        for (double d : levels) {
            const auto cur = delta_minimal(rep, d, Which::True);
            CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
            const double diam = diameter(cur, metric);
            CHECK(diam >= prev_diam);
            prev_diam = diam;
            prev = cur;
            for (double s : levels)
                if (s <= d) CHECK(r_check(rep.excess, metric, s, d) <= diam + 1e-15);
        }
        // Triangle inequality of the extended r_check.
        auto rr = [&](double a, double b) {
            return a <= b ? r_check(rep.excess, metric, a, b) : r_check(rep.excess, metric, b, a);
        };
        for (double a : levels)
            for (double b : levels)
                for (double c : levels) CHECK(rr(a, c) <= rr(a, b) + rr(b, c) + 1e-12);
    }
}

TEST_CASE("property: ERM optimality") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> risks(7);
        for (auto& r : risks) r = std::round(rng.uniform() * 10.0) / 10.0;
        const auto rep = erm(risks);
        CHECK(rep.empirical_excess[rep.erm_index] == 0.0);
        for (std::size_t j = 0; j < risks.size(); ++j) {
            CHECK(rep.empirical_excess[j] >= 0.0);
            if (j < rep.erm_index) CHECK(risks[j] > risks[rep.erm_index]);
        }
    }
}

TEST_CASE("metric tables are symmetric with a zero diagonal") {
    const auto sc = finite_support_scenario(6, 5, 3);
    for (auto kind : {MetricKind::SecondMoment, MetricKind::Variance}) {
        const auto t = MetricTable::from_oracle(sc.oracle, 5, kind);
        for (std::size_t a = 0; a < 5; ++a) {
            CHECK(t(a, a) == 0.0);
            for (std::size_t b = 0; b < 5; ++b) {
                CHECK(t(a, b) == t(b, a));
                CHECK(t(a, b) >= 0.0);
            }
        }
    }
}
