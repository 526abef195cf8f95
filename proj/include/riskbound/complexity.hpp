#pragma once
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "riskbound/function_class.hpp"
#include "riskbound/transform.hpp"

namespace riskbound {

/// E_eps sup_f |R_n(f)| over the supplied sign vectors. The standard error is zero
/// when the draws enumerate all 2^n sign vectors.
[[nodiscard]] MeanStderr rademacher_sup(const EvaluationMatrix& matrix, const std::vector<RademacherDraw>& draws);

/// Localized Rademacher modulus delta -> E_eps sup_{rho^2(f,g) <= delta} |R_n(f-g)|,
/// tabulated at every distinct pairwise level.
struct ModulusCurve {
    std::vector<double> levels;  ///< increasing; levels[0] == 0
    std::vector<double> values;
    std::vector<double> stderrs;

    [[nodiscard]] double operator()(double delta) const;
    /// Right-continuous step curve (arbitrary shape) for use with the transforms.
    [[nodiscard]] ComplexityCurve as_curve() const;
};

[[nodiscard]] ModulusCurve rademacher_modulus_curve(const EvaluationMatrix& matrix,
                                                    const std::vector<RademacherDraw>& draws,
                                                    const MetricTable& metric);
[[nodiscard]] MeanStderr rademacher_modulus(const EvaluationMatrix& matrix, const std::vector<RademacherDraw>& draws,
                                            double delta, const MetricTable& metric);

/// Paired Monte Carlo margins of the symmetrization and contraction inequalities. Each
/// margin is a per-replicate difference that should be nonnegative in expectation.
struct SymmetrizationReport {
    MeanStderr deviation;        ///< E sup_f |(P_n - P) f|
    MeanStderr rademacher;       ///< E sup_f |R_n f|
    MeanStderr centered;         ///< E sup_f |R_n (f - P f)|
    MeanStderr scaled;           ///< E sup_f |R_n g| with g = 2f - 1
    MeanStderr squared;          ///< E sup_f |R_n g^2|
    MeanStderr lower_margin;     ///< deviation - centered / 2
    MeanStderr upper_margin;     ///< 2 rademacher - deviation
    MeanStderr contraction_margin;  ///< 4 scaled - squared

    /// All three margins exceed -k standard errors.
    [[nodiscard]] bool holds(double k = 3.0) const;
};

/// One fresh sample and one sign vector per replicate.
[[nodiscard]] SymmetrizationReport symmetrization_check(const FunctionClass& cls, const OracleDistribution& oracle,
                                                        std::size_t n, std::size_t replicates, std::uint64_t seed);

/// Number of distinct projection vectors (f(X_1), ..., f(X_n)) of a binary class.
[[nodiscard]] std::size_t shattering_number(const EvaluationMatrix& matrix);

struct KernelSpec {
    std::function<double(const Point&, const Point&)> kernel;
    bool bounded = true;                     ///< sup |K(x,x)| <= 1
    std::vector<double> true_eigenvalues;    ///< optional spectrum of the integral operator
};

/// Eigenvalues of the matrix (K(X_i, X_j)/n), descending, with values below 1e-12 set to 0.
[[nodiscard]] std::vector<double> gram_eigenvalues(const KernelSpec& kernel, const Sample& sample);

/// delta -> (n^{-1} sum_j min(lambda_j, delta))^{1/2}, strictly-concave-type(1/2).
[[nodiscard]] ComplexityCurve mendelson_curve(std::vector<double> eigenvalues, double n);

struct MendelsonCurves {
    std::optional<ComplexityCurve> gamma_hat;
    std::optional<ComplexityCurve> gamma_bar;
    std::vector<double> eigenvalues;
};

[[nodiscard]] MendelsonCurves mendelson_curves(const KernelSpec& kernel, const Sample* sample, double n = 0.0);

enum class BoundVariant { FiniteDim, VcType, Entropy, ConvexHull, Shattering, MendelsonTrue, MendelsonEmpirical };

struct BoundCurveParams {
    BoundVariant variant = BoundVariant::FiniteDim;
    double n = 1.0;
    double constant = 1.0;  ///< leading C/K
    double d = 1.0;
    double A = 1.0;
    double V = 1.0;
    double U = 1.0;
    double F_norm = 1.0;
    double rho = 0.5;
    double expected_log_delta = 0.0;
    std::vector<double> eigenvalues;
};

/// Closed-form upper bounds on theta_n(delta) for the standard examples.
[[nodiscard]] ComplexityCurve bound_curve(const BoundCurveParams& params);

}  // namespace riskbound
