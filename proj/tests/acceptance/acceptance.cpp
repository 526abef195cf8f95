// Acceptance run: one PASS/FAIL line per criterion. Tolerances and time limits are fixed here.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "riskbound/bounds.hpp"
#include "riskbound/complexity.hpp"
#include "riskbound/error.hpp"
#include "riskbound/random.hpp"
#include "riskbound/scenarios.hpp"
#include "riskbound/selection.hpp"
#include "riskbound/transform.hpp"

using namespace riskbound;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s <= limit_s;
    const bool ok = o.pass && in_time;
    failures += ok ? 0 : 1;
    std::printf("%s [%2d] %s: %s (%.2fs, limit %.0fs%s)\n", ok ? "PASS" : "FAIL", id, name, o.detail.c_str(), s,
                limit_s, in_time ? "" : ", over time");
    std::fflush(stdout);
}

// Brute-force discrete sharp transform on the grid 2^{-j}, j = 0..j_max.
double sharp_q_oracle(const ComplexityCurve& psi, double eps, int j_max) {
    double result = 1.0;
    for (int j = 0; j <= j_max; ++j) {
        double flat_j = 0.0;
        for (int i = 0; i <= j; ++i) flat_j = std::max(flat_j, psi(std::ldexp(1.0, -i)) / std::ldexp(1.0, -i));
        if (flat_j <= eps) result = (j == j_max) ? 0.0 : std::ldexp(1.0, -(j + 1));
    }
    return result;
}

Outcome transform_algebra() {
    double worst = 0.0;
    bool ok = true;
    for (double alpha : {0.25, 0.5, 0.75})
        for (int k = 1; k <= 10; ++k) {
            const double eps = 0.1 * k;
            const double expect = std::pow(eps, -1.0 / (1.0 - alpha));
            const double got = sharp(ComplexityCurve::power(1.0, alpha), eps);
            const double err = std::abs(got - expect);
            worst = std::max(worst, err / expect);
            ok = ok && err <= 1e-9 * std::max(1.0, expect);
        }
    bool exact = true;
    for (double c : {0.0, 0.3, 1.0, 2.5})
        for (int k = 1; k <= 10; ++k) exact = exact && sharp(ComplexityCurve::constant(c), 0.1 * k) == c / (0.1 * k);
    return {ok && exact, fmt("max relative error of sharp(u^a) %.2e; sharp(c) exact: ", worst) + (exact ? "yes" : "no")};
}

Outcome sandwich() {
    Rng rng(20240611);
    const int j_max = 14;
    const GeometricGrid grid(2.0, 0, j_max);
    int violations = 0;
    int checks = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + rng.index(6);
        std::vector<double> knots;
        for (std::size_t i = 0; i < k; ++i) knots.push_back(std::pow(2.0, -10.0 * rng.uniform()));
        std::sort(knots.begin(), knots.end());
        knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
        std::vector<double> values;
        double v = 0.0;
        for (std::size_t i = 0; i < knots.size(); ++i) values.push_back(v += 0.25 * rng.uniform() / knots.size());
        const auto psi = ComplexityCurve::steps(knots, values, 0.0, Shape::Arbitrary, 1.0);
        for (double eps : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
            const double lower = sharp_q(psi, eps, grid, true);
            const double upper = sharp_q(psi, eps / 2.0, grid, true);
            const double s = sharp(psi, eps);
            ++checks;
            if (lower != sharp_q_oracle(psi, eps, j_max) || upper != sharp_q_oracle(psi, eps / 2.0, j_max) ||
                lower > s * (1 + 1e-12) || s > upper * (1 + 1e-12))
                ++violations;
        }
    }
    return {violations == 0, fmt("%.0f violations in %.0f curve/epsilon pairs", violations, checks)};
}

Outcome fixed_point_lattice() {
    int bad = 0;
    int iterates = 0;
    for (double c : {0.1, 0.3, 0.5, 0.7, 0.9})
        for (double gamma : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const auto r = fixed_point(ComplexityCurve::power(c, gamma));
            for (std::size_t k = 0; k < r.iterates.size(); ++k, ++iterates)
                if (r.iterates[k] - r.delta_bar > fixed_point_error_bound(r.delta_bar, gamma, static_cast<int>(k)) + 1e-12)
                    ++bad;
        }
    return {bad == 0, fmt("%.0f of %.0f iterates above the error bound", bad, iterates)};
}

Outcome tail_sum_lattice() {
    const GeometricGrid grid(2.0, 0, 24);
    int bad = 0;
    int checks = 0;
    double worst = 0.0;
    for (double c : {0.1, 0.3, 0.5, 0.7, 0.9})
        for (double gamma : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const auto psi = ComplexityCurve::power(c, gamma);
            for (int j = 0; j <= 24; j += 2, ++checks) {
                const double d = grid.point(j);
                const double bound = tail_sum_constant(gamma, 2.0) * psi(d) / d;
                const double s = geometric_tail_sum(psi, d, grid);
                worst = std::max(worst, s / bound);
                if (s > bound * (1 + 1e-12)) ++bad;
            }
        }
    return {bad == 0, fmt("%.0f of %.0f violations; max sum/bound %.4f", bad, checks, worst)};
}

Outcome shattering() {
    FunctionClass thresholds;
    for (int k = 0; k <= 10; ++k) {
        const double t = 0.1 * k;
        thresholds.add([t](const Point& p) { return p.x[0] >= t ? 1.0 : 0.0; }, "t" + std::to_string(k));
    }
    Sample s;
    for (int i = 0; i < 10; ++i) s.points.push_back({{0.05 + 0.1 * i}, 0.0});
    const auto m = evaluate(thresholds, s);
    std::set<std::vector<double>> patterns;
    for (std::size_t j = 0; j < m.cols(); ++j) patterns.insert(std::vector<double>(m.column(j), m.column(j) + m.rows()));
    const std::size_t delta = shattering_number(m);
    return {delta == 11 && patterns.size() == 11,
            fmt("Delta = %.0f, pattern enumeration = %.0f", static_cast<double>(delta), static_cast<double>(patterns.size()))};
}

Outcome symmetrization() {
    int held = 0;
    double worst = kInfinity;
    for (std::uint64_t c = 0; c < 10; ++c) {
        const auto sc = finite_support_scenario(10 + 3 * c, 4 + c, 1000 + c);
        const auto rep = symmetrization_check(sc.cls, sc.oracle, 50, 2000, 2000 + c);
        held += rep.holds(3.0) ? 1 : 0;
        for (const auto* m : {&rep.lower_margin, &rep.upper_margin, &rep.contraction_margin})
            if (m->stderr_ > 0.0) worst = std::min(worst, m->mean / m->stderr_);
    }
    return {held == 10, fmt("%.0f/10 classes hold; smallest margin %.2f stderr", held, worst)};
}

Outcome cube() {
    const std::vector<std::size_t> Ns{3, 7, 15, 31};
    bool zero = true;
    for (std::size_t N : Ns) {
        const auto sc = cube_scenario(N);
        for (double e : excess_from_risks(sc.risks())) zero = zero && e == 0.0;
    }
    const auto r = run_prop2_experiment(Ns, 1024, 1.0, 200, 7);
    const double last = r.rows.back().non_inclusion;
    std::string d = "zero excess " + std::string(zero ? "yes" : "no") + "; delta_n";
    for (const auto& row : r.rows) d += fmt(" %.4f", row.delta_n);
    d += "; non-inclusion";
    for (const auto& row : r.rows) d += fmt(" %.3f", row.non_inclusion);
    return {zero && r.delta_monotone && r.frequency_monotone && last >= 0.5, d};
}

Outcome bound_ordering() {
    BoundConstants c;
    c.t = 2.0;
    const auto sc = finite_dim_regression(3, 512, 2);
    const auto r = run_ordering_experiment(sc, 512, c, 200, 11);
    return {r.frequency >= 0.9, fmt("ordered in %.1f%% of 200 trials (delta_bar %.5f, median delta_hat %.5f, "
                                     "delta_tilde %.5f)",
                                     100.0 * r.frequency, r.delta_bar, quantile(r.delta_hat, 0.5), r.delta_tilde)};
}

Outcome coverage() {
    BoundConstants c;
    c.t = 3.0;
    const std::size_t n = 512;
    const std::size_t trials = 500;
    std::string d;
    bool ok = true;
    const Scenario scs[] = {finite_dim_regression(3, n, 2), tsybakov_scenario(TsybakovParams{})};
    for (const auto& sc : scs) {
        const auto r = run_coverage_experiment(sc, n, c, trials, 13);
        const double budget = std::min(r.budget, 1.0);
        const double se = std::sqrt(budget * (1.0 - budget) / static_cast<double>(trials));
        ok = ok && r.frequency <= r.budget + 3.0 * se;
        d += (d.empty() ? "" : "; ") + sc.name + fmt(": frequency %.4f vs budget %.4f + 3se %.4f (delta_n %.5f)",
                                                         r.frequency, r.budget, 3.0 * se, r.delta_n);
    }
    return {ok, d};
}

Outcome rates() {
    ExperimentPlan p;
    p.n_sweep = {64, 128, 256, 512, 1024, 2048, 4096};
    p.replicates = 50;
    p.seed = 17;
    const auto fd = run_rate_experiment([](std::size_t n) { return finite_dim_regression(3, n, 6); }, p);
    const auto ts = run_rate_experiment([](std::size_t n) { return tsybakov_rate_scenario(1.0, 0.5, n); }, p);
    const bool fd_ok = !fd.degenerate && fd.slope >= -1.2 && fd.slope <= -0.8;
    const bool ts_ok = !ts.degenerate && std::abs(ts.slope + 2.0 / 3.0) <= 0.15;
    return {fd_ok && ts_ok, fmt("finite_dim slope %.3f (+/- %.3f), tsybakov slope %.3f (+/- %.3f)", fd.slope, fd.ci,
                                ts.slope, ts.ci)};
}

Outcome oracle_inequalities() {
    const auto ns = nested_regression();
    SelectionSettings set;
    const auto r = run_selection_experiment(ns, 256, set, 200, 19);
    const bool ok = r.pen_ok >= 0.95 && r.cmp_ok >= 0.95 && r.cmp_below_star >= 0.95;
    return {ok, fmt("penalized %.1f%%, comparison %.1f%%, comparison k<=k* %.1f%%", 100 * r.pen_ok, 100 * r.cmp_ok,
                    100 * r.cmp_below_star) +
                    fmt("; realized C: penalized q95 %.4f max %.4f, comparison q95 %.4f max %.4f",
                        quantile(r.ratio_pen, 0.95), quantile(r.ratio_pen, 1.0), quantile(r.ratio_cmp, 0.95),
                        quantile(r.ratio_cmp, 1.0))};
}

Outcome conjugates() {
    double worst = 0.0;
    std::vector<double> us, vs;
    for (int i = 0; i <= 40; ++i) us.push_back(0.1 * i);
    for (int i = 0; i <= 20; ++i) vs.push_back(0.1 * i);
    bool fy = true;
    for (double D : {1.0, 2.0, 4.0}) {
        const ConvexLink numeric([D](double u) { return u * u / D; });
        for (double v : vs) worst = std::max(worst, std::abs(numeric.numeric_conjugate(v) - D * v * v / 4.0));
        try {
            numeric.audit_fenchel_young(us, vs);
            ConvexLink::quadratic(D).audit_fenchel_young(us, vs);
        } catch (const Error&) {
            fy = false;
        }
    }
    return {worst <= 1e-6 && fy, fmt("max |numeric - D v^2/4| %.2e; Fenchel-Young audit ", worst) + (fy ? "clean" : "violated")};
}

Outcome loss_identity() {
    RegressionParams p;
    p.pitch = 0.02;
    const auto sc = finite_dim_regression(p);
    const auto coefs = regression_coefficients(p);
    const double star = regression_risk_quadrature(p.g_star, p.g_star);
    double worst = 0.0;
    for (std::size_t j = 0; j < coefs.size(); ++j) {
        double dist = 0.0;
        for (std::size_t k = 0; k < coefs[j].size(); ++k) dist += (coefs[j][k] - p.g_star[k]) * (coefs[j][k] - p.g_star[k]);
        worst = std::max(worst, std::abs(regression_risk_quadrature(p.g_star, coefs[j]) - star - dist));
        worst = std::max(worst, std::abs(sc.oracle.true_risk(j) - kRegressionNoiseVariance - dist));
    }
    const double identity_tol = std::max(sc.oracle.accuracy, 1e-12);
    const double n = 256.0;
    const double pi = loss_pi_n(1.0, 1.0, 1.0, 1.0, 0.0, n, 1.0);
    const double rate = loss_pi_n_rate(1.0, 1.0, 1.0, 1.0, n, 1.0);
    const double target = std::pow(n, -0.75);
    const bool id_ok = worst <= identity_tol;
    const bool pi_ok = std::abs(pi - target) <= 1e-12;
    return {id_ok && pi_ok,
            fmt("identity max error %.2e (tol %.0e); pi_n %.8f vs n^-3/4 %.8f", worst, identity_tol, pi, target) +
                fmt(" (rate term alone %.8f, remainder (L^2 t + 1)/(Lambda n) = %.8f)", rate, pi - rate)};
}

}  // namespace

int main() {
    criterion(1, "transform algebra", 1, transform_algebra);
    criterion(2, "sandwich on random step curves", 5, sandwich);
    criterion(3, "fixed-point iteration error bound", 1, fixed_point_lattice);
    criterion(4, "geometric tail sum bound", 1, tail_sum_lattice);
    criterion(5, "shattering of interleaved thresholds", 1, shattering);
    criterion(6, "symmetrization and contraction", 120, symmetrization);
    criterion(7, "cube scenario", 180, cube);
    criterion(8, "bound ordering", 180, bound_ordering);
    criterion(9, "ratio coverage", 240, coverage);
    criterion(10, "rate reproduction", 600, rates);
    criterion(11, "oracle inequalities", 300, oracle_inequalities);
    criterion(12, "conjugate correctness", 1, conjugates);
    criterion(13, "loss-class identity", 30, loss_identity);
    std::printf("%d of 13 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
