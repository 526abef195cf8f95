#include "riskbound/complexity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "riskbound/error.hpp"

namespace riskbound {

namespace {

bool is_exhaustive(const std::vector<RademacherDraw>& draws) {
    if (draws.empty()) return false;
    const std::size_t n = draws.front().signs.size();
    return n < 63 && draws.size() == (std::size_t{1} << n);
}

}  // namespace

MeanStderr rademacher_sup(const EvaluationMatrix& matrix, const std::vector<RademacherDraw>& draws) {
    if (draws.empty()) throw Error(ErrorKind::BadParams, "rademacher_sup needs at least one draw");
    std::vector<double> sups(draws.size());
    parallel_for(draws.size(), [&](std::size_t d) {
        double best = 0.0;
        for (double r : rademacher_values(matrix, draws[d])) best = std::max(best, std::abs(r));
        sups[d] = best;
    });
    MeanStderr out = mean_stderr(sups);
    if (is_exhaustive(draws)) out.stderr_ = 0.0;
    return out;
}

double ModulusCurve::operator()(double delta) const {
    const auto k = static_cast<std::size_t>(std::upper_bound(levels.begin(), levels.end(), delta) - levels.begin());
    return k == 0 ? 0.0 : values[k - 1];
}

ComplexityCurve ModulusCurve::as_curve() const {
    std::vector<double> knots;
    std::vector<double> vals;
    double below = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k] <= 0.0) {
            below = values[k];
            continue;
        }
        knots.push_back(levels[k]);
        vals.push_back(values[k]);
    }
    if (knots.empty()) return ComplexityCurve::constant(below);
    return ComplexityCurve::steps(std::move(knots), std::move(vals), below);
}

ModulusCurve rademacher_modulus_curve(const EvaluationMatrix& matrix, const std::vector<RademacherDraw>& draws,
                                      const MetricTable& metric) {
    if (draws.empty()) throw Error(ErrorKind::BadParams, "modulus needs at least one draw");
    const std::size_t m = matrix.cols();
    if (metric.size() != m) throw Error(ErrorKind::BadParams, "metric table does not match the class");
    struct Pair {
        double d2;
        std::size_t a;
        std::size_t b;
    };
    std::vector<Pair> pairs;
    pairs.reserve(m * (m - 1) / 2);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) pairs.push_back({metric(a, b), a, b});
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.d2 < y.d2; });

    ModulusCurve out;
    out.levels.push_back(0.0);
    std::vector<std::size_t> level_end;  // pairs[0, level_end[l]) have d2 <= levels[l]
    std::size_t p = 0;
    while (p < pairs.size() && pairs[p].d2 <= 0.0) ++p;
    level_end.push_back(p);
    while (p < pairs.size()) {
        const double lv = pairs[p].d2;
        while (p < pairs.size() && pairs[p].d2 == lv) ++p;
        out.levels.push_back(lv);
        level_end.push_back(p);
    }
    const std::size_t L = out.levels.size();
    std::vector<double> sum(L, 0.0);
    std::vector<double> sumsq(L, 0.0);
    for (const auto& draw : draws) {
        const auto r = rademacher_values(matrix, draw);
        double best = 0.0;
        std::size_t q = 0;
        for (std::size_t l = 0; l < L; ++l) {
            for (; q < level_end[l]; ++q) best = std::max(best, std::abs(r[pairs[q].a] - r[pairs[q].b]));
            sum[l] += best;
            sumsq[l] += best * best;
        }
    }
    const double k = static_cast<double>(draws.size());
    const bool exact = is_exhaustive(draws);
    out.values.resize(L);
    out.stderrs.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        out.values[l] = sum[l] / k;
        const double var = k > 1 ? std::max(0.0, (sumsq[l] - k * out.values[l] * out.values[l]) / (k - 1)) : 0.0;
        out.stderrs[l] = exact ? 0.0 : std::sqrt(var / k);
    }
    return out;
}

MeanStderr rademacher_modulus(const EvaluationMatrix& matrix, const std::vector<RademacherDraw>& draws, double delta,
                              const MetricTable& metric) {
    if (!(delta >= 0.0)) throw Error(ErrorKind::BadParams, "delta must be nonnegative");
    const ModulusCurve c = rademacher_modulus_curve(matrix, draws, metric);
    const auto k = static_cast<std::size_t>(std::upper_bound(c.levels.begin(), c.levels.end(), delta) - c.levels.begin());
    if (k == 0) return {};
    return {c.values[k - 1], c.stderrs[k - 1]};
}

std::size_t shattering_number(const EvaluationMatrix& matrix) {
    std::set<std::vector<bool>> patterns;
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
        std::vector<bool> pat(matrix.rows());
        const double* c = matrix.column(j);
        for (std::size_t i = 0; i < matrix.rows(); ++i) {
            if (c[i] != 0.0 && c[i] != 1.0) throw Error(ErrorKind::NotBinary, "class takes non-binary values");
            pat[i] = c[i] == 1.0;
        }
        patterns.insert(std::move(pat));
    }
    return patterns.size();
}

std::vector<double> gram_eigenvalues(const KernelSpec& kernel, const Sample& sample) {
    if (!kernel.kernel) throw Error(ErrorKind::BadParams, "kernel is empty");
    if (!kernel.bounded) throw Error(ErrorKind::BadParams, "kernel must satisfy sup |K(x,x)| <= 1");
    const std::size_t n = sample.size();
    if (n == 0) throw Error(ErrorKind::BadParams, "empty sample");
    Eigen::MatrixXd g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = kernel.kernel(sample.points[i], sample.points[j]) / static_cast<double>(n);
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::EigenFailure, "eigendecomposition did not converge");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = solver.eigenvalues()(static_cast<Eigen::Index>(i));
        if (v < -1e-10) throw Error(ErrorKind::EigenFailure, "Gram matrix is not positive semidefinite");
        if (v < 1e-12) v = 0.0;
        out[i] = v;
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

ComplexityCurve mendelson_curve(std::vector<double> eigenvalues, double n) {
    if (!(n > 0.0)) throw Error(ErrorKind::BadParams, "mendelson curve needs n > 0");
    for (double v : eigenvalues)
        if (!(v >= 0.0)) throw Error(ErrorKind::BadParams, "eigenvalues must be nonnegative");
    return ComplexityCurve(
        [lam = std::move(eigenvalues), n](double delta) {
            double s = 0.0;
            for (double v : lam) s += std::min(v, delta);
            return std::sqrt(s / n);
        },
        Shape::StrictlyConcaveType, 0.5, kInfinity);
}

MendelsonCurves mendelson_curves(const KernelSpec& kernel, const Sample* sample, double n) {
    MendelsonCurves out;
    if (sample != nullptr) {
        out.eigenvalues = gram_eigenvalues(kernel, *sample);
        n = static_cast<double>(sample->size());
        out.gamma_hat = mendelson_curve(out.eigenvalues, n);
    }
    if (!kernel.true_eigenvalues.empty()) {
        if (!(n > 0.0)) throw Error(ErrorKind::BadParams, "true Mendelson curve needs n");
        out.gamma_bar = mendelson_curve(kernel.true_eigenvalues, n);
    }
    return out;
}

ComplexityCurve bound_curve(const BoundCurveParams& p) {
    const double n = p.n;
    const double K = p.constant;
    if (!(n >= 1.0) || !(K > 0.0)) throw Error(ErrorKind::BadParams, "bound curve needs n >= 1 and a positive constant");
    switch (p.variant) {
        case BoundVariant::FiniteDim: {
            if (!(p.d >= 1.0)) throw Error(ErrorKind::BadParams, "finite_dim needs d >= 1");
            return ComplexityCurve::power(K * std::sqrt(p.d / n), 0.5);
        }
        case BoundVariant::VcType: {
            if (!(p.V > 0.0) || !(p.A > 0.0) || !(p.U > 0.0) || !(p.F_norm > 0.0))
                throw Error(ErrorKind::BadParams, "vc_type needs positive A, V, U, F");
            const double scale = p.A * p.A * p.F_norm * p.F_norm;
            auto raw = [=](double delta) {
                const double lg = std::max(std::log(scale / delta), 1.0);
                return K * std::max(std::sqrt(p.V * delta / n * lg), p.V * p.U / n * lg);
            };
            // The bound is only meaningful for delta >= 1/n.
            std::vector<double> knots;
            for (double d = 1.0 / n; d < 4.0 * scale; d *= 1.0442737824274138) knots.push_back(d);
            knots.push_back(4.0 * scale);
            return ComplexityCurve::concave_envelope(raw, knots);
        }
        case BoundVariant::Entropy:
        case BoundVariant::ConvexHull: {
            const double rho = p.variant == BoundVariant::ConvexHull ? p.V / (p.V + 2.0) : p.rho;
            if (!(rho > 0.0 && rho < 1.0) || !(p.A > 0.0) || !(p.U > 0.0) || !(p.F_norm > 0.0))
                throw Error(ErrorKind::BadParams, "entropy bound needs rho in (0,1) and positive A, U, F");
            const double a1 = std::pow(p.A * p.F_norm, rho) / std::sqrt(n);
            const double a2 = std::pow(p.A * p.F_norm, 2.0 * rho / (rho + 1.0)) *
                              std::pow(p.U, (1.0 - rho) / (1.0 + rho)) / std::pow(n, 1.0 / (1.0 + rho));
            const double expo = (1.0 - rho) / 2.0;
            ComplexityCurve c([=](double delta) { return K * std::max(a1 * std::pow(delta, expo), a2); },
                              Shape::ConcaveType, 0.0, kInfinity);
            return c;
        }
        case BoundVariant::Shattering: {
            if (!(p.expected_log_delta >= 0.0)) throw Error(ErrorKind::BadParams, "E log Delta must be nonnegative");
            const double e = p.expected_log_delta / n;
            if (e == 0.0) return ComplexityCurve::constant(0.0);
            return ComplexityCurve([=](double delta) { return K * (std::sqrt(delta * e) + e); },
                                   Shape::StrictlyConcaveType, 0.5, kInfinity);
        }
        case BoundVariant::MendelsonTrue:
        case BoundVariant::MendelsonEmpirical: {
            if (p.eigenvalues.empty()) throw Error(ErrorKind::BadParams, "mendelson bound needs eigenvalues");
            return mendelson_curve(p.eigenvalues, n).scaled(K);
        }
    }
    throw Error(ErrorKind::BadParams, "unknown bound variant");
}

bool SymmetrizationReport::holds(double k) const {
    return lower_margin.mean >= -k * lower_margin.stderr_ && upper_margin.mean >= -k * upper_margin.stderr_ &&
           contraction_margin.mean >= -k * contraction_margin.stderr_;
}

SymmetrizationReport symmetrization_check(const FunctionClass& cls, const OracleDistribution& oracle, std::size_t n,
                                          std::size_t replicates, std::uint64_t seed) {
    if (replicates < 2 || n < 1) throw Error(ErrorKind::BadParams, "need n >= 1 and two or more replicates");
    const std::size_t m = cls.size();
    const auto risks = true_risks(oracle, m);
    enum { Dev, Rad, Cen, Sca, Squ, Count };
    std::vector<std::array<double, Count>> per(replicates);
    parallel_for(replicates, [&](std::size_t r) {
        const Sample s = oracle.draw(n, derive_seed(seed, r, 0));
        const auto signs = random_signs(n, 1, derive_seed(seed, r, 1)).front().signs;
        const EvaluationMatrix mat = evaluate(cls, s);
        std::array<double, Count> v{};
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j < m; ++j) {
            const double* c = mat.column(j);
            double mean = 0.0, rad = 0.0, cen = 0.0, sca = 0.0, squ = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double g = 2.0 * c[i] - 1.0;
                mean += c[i];
                rad += signs[i] * c[i];
                cen += signs[i] * (c[i] - risks[j]);
                sca += signs[i] * g;
                squ += signs[i] * g * g;
            }
            v[Dev] = std::max(v[Dev], std::abs(mean * inv - risks[j]));
            v[Rad] = std::max(v[Rad], std::abs(rad * inv));
            v[Cen] = std::max(v[Cen], std::abs(cen * inv));
            v[Sca] = std::max(v[Sca], std::abs(sca * inv));
            v[Squ] = std::max(v[Squ], std::abs(squ * inv));
        }
        per[r] = v;
    });
    auto stat = [&](auto f) {
        std::vector<double> col(replicates);
        for (std::size_t r = 0; r < replicates; ++r) col[r] = f(per[r]);
        return mean_stderr(col);
    };
    SymmetrizationReport rep;
    rep.deviation = stat([](const auto& v) { return v[Dev]; });
    rep.rademacher = stat([](const auto& v) { return v[Rad]; });
    rep.centered = stat([](const auto& v) { return v[Cen]; });
    rep.scaled = stat([](const auto& v) { return v[Sca]; });
    rep.squared = stat([](const auto& v) { return v[Squ]; });
    rep.lower_margin = stat([](const auto& v) { return v[Dev] - 0.5 * v[Cen]; });
    rep.upper_margin = stat([](const auto& v) { return 2.0 * v[Rad] - v[Dev]; });
    rep.contraction_margin = stat([](const auto& v) { return 4.0 * v[Sca] - v[Squ]; });
    return rep;
}

}  // namespace riskbound
