#include <doctest.h>

#include <cmath>
#include <vector>

#include "riskbound/complexity.hpp"
#include "riskbound/error.hpp"
#include "riskbound/scenarios.hpp"
#include "riskbound/selection.hpp"

using namespace riskbound;
using doctest::Approx;

namespace {

FunctionClass constants(const std::vector<double>& values, bool binary = false) {
    FunctionClass c;
    for (double v : values) c.add([v](const Point&) { return v; }, "c" + std::to_string(v));
    if (!binary) return c;
    std::vector<FunctionClass::Member> ms;
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < c.size(); ++j) {
        ms.push_back(c.member(j));
        labels.push_back(c.label(j));
    }
    return FunctionClass(ms, labels, true);
}

ModelFamily family_of(std::size_t m, double t, bool nested = false) {
    ModelFamily f;
    for (std::size_t k = 0; k < m; ++k) f.classes.push_back(constants({0.0}));
    f.t.assign(m, t);
    f.nested = nested;
    return f;
}

LossClassMeta squared_loss() {
    LossClassMeta meta;
    meta.loss = [](double y, double u) { return (y - u) * (y - u); };
    meta.L = 2.0;
    meta.Lambda = 0.25;
    return meta;
}

}  // namespace

TEST_CASE("penalty v1 examples") {
    CHECK(v1_value(5.0, 0.02, 0.25, 2.0, 100.0) == Approx(0.553553).epsilon(1e-6));
    CHECK(v1_value(5.0, 0.02, 0.0, 2.0, 100.0) == Approx(5.0 * (0.02 + 0.02)));
    CHECK(v1_value(5.0, 0.02, 0.25, 0.0, 100.0) == Approx(0.1));
    const auto fam = family_of(2, 2.0);
    const auto p = penalty_v1(fam, {0.02, 0.05}, {0.25, 0.1}, 100.0);
    CHECK(p.hat[0] == Approx(0.553553).epsilon(1e-6));
    CHECK(p.tilde.empty());
    CHECK_THROWS_AS((void)penalty_v1(fam, {0.02}, {0.25, 0.1}, 100.0), Error);
}

TEST_CASE("penalty v2 examples") {
    const auto fam = family_of(1, 2.0);
    const ConvexLink half([](double u) { return u * u / 2.0; }, std::nullopt, "half");
    const double delta = 0.03;
    const auto p = penalty_v2(fam, half, 0.04, {delta}, 100.0);
    CHECK(half.numeric_conjugate(1.0) == Approx(0.5).epsilon(1e-9));
    CHECK(p.hat[0] == Approx(2.48 * delta + 0.5 + 0.02).epsilon(1e-9));
    CHECK(p.C == Approx(1.02 / 0.98));

    const auto zero_t = penalty_v2(family_of(1, 1e-300), half, 0.04, {delta}, 100.0);
    CHECK(zero_t.hat[0] == Approx(2.48 * delta));

    const ConvexLink steep([](double u) { return 10.0 * u * u; });
    CHECK_THROWS_AS((void)penalty_v2(fam, steep, 0.5, {delta}, 100.0), Error);
}

TEST_CASE("penalty v2 reference penalties and per-model links") {
    const auto fam = family_of(2, 2.0);
    OracleSide o;
    o.delta_tilde = {0.1, 0.2};
    const auto link = ConvexLink::quadratic(2.0);
    const auto p = penalty_v2(fam, link, 0.04, {0.03, 0.04}, 100.0, &o);
    const double pk = link.phi(0.2);
    const double conj = link.conjugate(1.0);
    CHECK(p.tilde[1] == Approx((2.5 - pk) / (1 + pk) * 0.2 + 2 / (1 + pk) * conj + 2 / (1 + pk) * 0.02));

    std::vector<ConvexLink> good{ConvexLink::quadratic(1.0), ConvexLink::quadratic(2.0)};
    CHECK_NOTHROW((void)penalty_v2(fam, link, 0.04, {0.03, 0.04}, 100.0, nullptr, &good));
    std::vector<ConvexLink> bad{ConvexLink::quadratic(2.0), ConvexLink::quadratic(1.0)};
    CHECK_THROWS_AS((void)penalty_v2(fam, link, 0.04, {0.03, 0.04}, 100.0, nullptr, &bad), Error);
}

TEST_CASE("select_penalized examples") {
    const auto fam = family_of(3, 1.0);
    Penalties p;
    p.hat = {0.01, 0.05, 0.20};
    auto r = select_penalized(fam, p, {0.30, 0.20, 0.19});
    CHECK(r.k_hat == 2);
    CHECK(r.certificate == Approx(0.25));
    p.hat = {0.1, 0.1, 0.1};
    CHECK(select_penalized(fam, p, {0.3, 0.2, 0.2}).k_hat == 2);
    const auto one = family_of(1, 1.0);
    p.hat = {0.5};
    CHECK(select_penalized(one, p, {0.9}).k_hat == 1);
}

TEST_CASE("select_comparison examples") {
    auto fam = family_of(3, 1.0, true);
    CHECK(select_comparison(fam, {0.1, 0.1, 0.1}, {0.2, 0.2, 0.2}).k_hat == 1);
    fam = family_of(2, 1.0, true);
    ComparisonConstants c;
    c.c_hat = 1.0;
    CHECK(select_comparison(fam, {0.1, 0.1}, {0.7, 0.2}, c).k_hat == 2);
    CHECK(select_comparison(family_of(1, 1.0, true), {0.1}, {0.3}).k_hat == 1);
    CHECK_THROWS_AS((void)select_comparison(family_of(2, 1.0, false), {0.1, 0.1}, {0.7, 0.2}), Error);
}

TEST_CASE("comparison threshold uses the running max of deltas") {
    // l = 3 is tested against max(delta_1..delta_3) = 0.3.
    CHECK(comparison_index({0.5, 0.45, 0.25}, {0.3, 0.01, 0.01}, 1.0) == 1);
    CHECK(comparison_index({0.5, 0.45, 0.25}, {0.1, 0.01, 0.01}, 1.0) == 3);
}

TEST_CASE("model family validation") {
    ModelFamily f;
    CHECK_THROWS_AS(f.validate(), Error);
    f = family_of(2, 1.0);
    f.t[1] = 0.0;
    CHECK_THROWS_AS(f.validate(), Error);
    f = family_of(2, 1.0, true);
    f.classes[1] = constants({0.5});
    try {
        f.validate();
        FAIL("expected NotNested");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotNested);
    }
}

TEST_CASE("shattering penalty examples") {
    CHECK(shattering_value(1.0, 0.0, 0.0, 1.0, 100.0) == Approx(0.01));
    CHECK(shattering_value(1.0, std::log(11.0), 0.1, 2.0, 100.0) == Approx(0.11030).epsilon(1e-4));

    Sample s;
    for (int i = 0; i < 10; ++i) s.points.push_back({{0.05 + 0.1 * i}, 0.0});
    std::vector<FunctionClass::Member> ms;
    std::vector<std::string> labels;
    for (int k = 0; k <= 10; ++k) {
        const double t = 0.1 * k;
        ms.emplace_back([t](const Point& p) { return p.x[0] >= t ? 1.0 : 0.0; });
        labels.push_back("t" + std::to_string(k));
    }
    ModelFamily fam;
    fam.classes = {FunctionClass(ms, labels, true)};
    fam.t = {2.0};
    auto dup_ms = ms;
    auto dup_labels = labels;
    dup_ms.push_back(ms[3]);
    dup_labels.push_back("t3b");
    ModelFamily dup = fam;
    dup.classes = {FunctionClass(dup_ms, dup_labels, true)};
    const auto a = shattering_penalty(fam, s, 1.0);
    const auto b = shattering_penalty(dup, s, 1.0);
    CHECK(a.complexity[0] == Approx(std::log(11.0)));
    CHECK(a.hat[0] == b.hat[0]);

    ModelFamily nb;
    nb.classes = {constants({0.5})};
    nb.t = {1.0};
    CHECK_THROWS_AS((void)shattering_penalty(nb, s), Error);
}

TEST_CASE("massart penalty examples") {
    const double d = 3.0;
    const double n = 300.0;
    const auto theta = ComplexityCurve::power(std::sqrt(d / n), 0.5);
    ModelFamily fam = family_of(1, 1.0);
    auto p = massart_penalty(fam, {4.0}, {theta}, 0.5, n);
    // theta-sharp(x) = d / (n x^2) at x = eps / (K D) = 1/32.
    CHECK(p.complexity[0] == Approx(2.56).epsilon(1e-9));
    CHECK(p.hat[0] == Approx(3 * 2.56 + 4.0 * 4.0 * 1.0 / (0.5 * n)).epsilon(1e-9));
    CHECK(p.C == Approx(3.0));

    const auto zero = ComplexityCurve::constant(0.0);
    p = massart_penalty(fam, {1.0}, {zero}, 0.5, n);
    CHECK(p.hat[0] == Approx(4.0 * 1.0 / (0.5 * n)));
    p = massart_penalty(fam, {1.0}, {zero}, 1e12, n);
    CHECK(p.hat[0] < 1e-12);

    ModelFamily two = family_of(2, 1.0);
    CHECK_THROWS_AS((void)massart_penalty(two, {2.0, 1.0}, {zero, zero}, 0.5, n), Error);
}

TEST_CASE("dimension, kernel and rademacher penalties") {
    const auto fam = family_of(1, 2.0);
    CHECK(dimension_penalty(fam, {3.0}, 100.0).hat[0] == Approx(0.06));

    KernelSpec delta{[](const Point& a, const Point& b) { return a.x[0] == b.x[0] ? 1.0 : 0.0; }};
    Sample four;
    for (double x : {0.1, 0.2, 0.3, 0.4}) four.points.push_back({{x}, 0.0});
    const auto curves = mendelson_curves(delta, &four);
    const auto k = kernel_penalty(fam, {*curves.gamma_hat}, 4.0);
    CHECK(k.complexity[0] == Approx(0.5).epsilon(1e-12));

    const auto zero = ComplexityCurve::constant(0.0);
    const auto r = rademacher_penalty(fam, {zero}, 100.0, 2.0);
    CHECK(r.hat[0] == Approx(2.0 * 3.0 / 100.0));
}

TEST_CASE("convex links") {
    for (double D : {1.0, 2.0, 4.0}) {
        const auto q = ConvexLink::quadratic(D);
        CHECK(q.has_closed_form());
        for (double v = 0.0; v <= 2.0; v += 0.125) CHECK(q.numeric_conjugate(v) == Approx(D * v * v / 4).epsilon(1e-9));
    }
    const ConvexLink cubic([](double u) { return u * u * u; });
    // sup_u uv - u^3 at u = sqrt(v/3).
    for (double v : {0.3, 1.0, 3.0}) CHECK(cubic.conjugate(v) == Approx(2.0 * std::pow(v / 3.0, 1.5)).epsilon(1e-9));
    CHECK(cubic.conjugate(-1.0) == 0.0);
    CHECK(ConvexLink::quadratic(1.0).submultiplicative({0.0, 0.5, 1.0, 2.0}));
    CHECK_FALSE(ConvexLink::quadratic(4.0).submultiplicative({0.5, 1.0}));
    CHECK_THROWS_AS(ConvexLink([](double u) { return u + 1.0; }), Error);
}

TEST_CASE("property: Fenchel-Young on the audit lattice") {
    std::vector<double> us;
    std::vector<double> vs;
    for (int i = 0; i <= 40; ++i) {
        us.push_back(0.1 * i);
        vs.push_back(0.05 * i);
    }
    for (double D : {1.0, 2.0, 4.0}) {
        CHECK_NOTHROW(ConvexLink::quadratic(D).audit_fenchel_young(us, vs));
        const ConvexLink numeric([D](double u) { return u * u / D; });
        CHECK_NOTHROW(numeric.audit_fenchel_young(us, vs));
    }
    const ConvexLink quartic([](double u) { return u * u * u * u / 4.0; });
    CHECK_NOTHROW(quartic.audit_fenchel_young(us, vs));
    const ConvexLink wrong([](double u) { return u * u; }, [](double) { return 0.0; });
    CHECK_THROWS_AS(wrong.audit_fenchel_young(us, vs), Error);
}

TEST_CASE("loss audit") {
    CHECK_NOTHROW(audit_loss(squared_loss()));
    auto meta = squared_loss();
    meta.L = 1.0;
    try {
        audit_loss(meta);
        FAIL("expected LipschitzViolated");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LipschitzViolated);
    }
    meta = squared_loss();
    meta.Lambda = 0.3;
    try {
        audit_loss(meta);
        FAIL("expected ConvexityViolated");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConvexityViolated);
    }
}

TEST_CASE("theorem 12 rate term") {
    CHECK(loss_pi_n_rate(1, 1, 1, 1, 256, 1) == Approx(std::pow(256.0, -0.75)).epsilon(1e-14));
    CHECK(loss_pi_n(1, 1, 1, 1, 0, 256, 1) == Approx(1.0 / 64 + 1.0 / 256).epsilon(1e-14));
}

TEST_CASE("W-bar with a linear modulus") {
    const auto meta = squared_loss();
    const auto theta = ComplexityCurve::power(std::sqrt(3.0 / 100.0), 0.5);
    const auto w = w_bar(meta, theta, 1.0, 100.0, 1.0);
    CHECK(w.shape() == Shape::ConcaveType);
    const double delta = 0.2;
    const double s = delta / (2 * 0.25);
    CHECK(w(delta) == Approx(2 * theta(s) + 2 * std::sqrt(s * 2.0 / 100.0) + 0.01));
}

TEST_CASE("loss class of a regression net") {
    FunctionClass G;
    for (double c : {0.2, 0.5, 0.8}) G.add([c](const Point&) { return c; }, "g" + std::to_string(c));
    Sample s;
    s.points = {{{0.1}, 0.0}, {{0.2}, 1.0}};
    const auto res = loss_class(squared_loss(), G, &s, nullptr, 1.0, 2.0);
    REQUIRE(res.matrix.has_value());
    CHECK(res.matrix->at(0, 0) == Approx(0.04));
    CHECK(res.matrix->at(1, 2) == Approx(0.04));
    CHECK(res.loss_class.size() == 3);
}

TEST_CASE("property: squared-loss variance is at most four times the excess") {
    const auto sc = finite_dim_regression(2, 64, 2);
    const auto risks = sc.risks();
    const auto best = best_index(risks);
    const auto metric = MetricTable::from_oracle(sc.oracle, sc.cls.size());
    for (std::size_t j = 0; j < sc.cls.size(); ++j) CHECK(metric(j, best) <= 4.0 * (risks[j] - risks[best]) + 1e-12);
}
