#pragma once
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "riskbound/function_class.hpp"
#include "riskbound/transform.hpp"

namespace riskbound {

/// An ordered family of classes F_1, F_2, ... with confidence and failure schedules.
///
/// Nesting is checked through member labels: with `nested` set, every label of
/// F_k must also appear in F_{k+1}.
struct ModelFamily {
    std::vector<FunctionClass> classes;
    std::vector<double> t;  ///< t_k > 0
    std::vector<double> p;  ///< failure budget p_k (may be empty)
    bool nested = false;

    [[nodiscard]] std::size_t size() const noexcept { return classes.size(); }
    /// Throws BadParams for schedule problems and NotNested for a broken chain.
    void validate() const;
};

/// Convex nondecreasing phi on [0, inf) with phi(0) = 0 and its conjugate
/// phi*(v) = sup_{u >= 0} [uv - phi(u)].
class ConvexLink {
public:
    using Fn = std::function<double(double)>;

    explicit ConvexLink(Fn phi, std::optional<Fn> conjugate = std::nullopt, std::string name = "custom");

    /// phi(u) = u^2 / D with conjugate D v^2 / 4.
    static ConvexLink quadratic(double D);

    [[nodiscard]] double phi(double u) const { return phi_(u); }
    /// Registered closed form when present, numeric Legendre transform otherwise.
    [[nodiscard]] double conjugate(double v) const;
    /// Legendre transform on a `points`-point grid over [0, u_max], refined by golden section.
    [[nodiscard]] double numeric_conjugate(double v, std::size_t points = 10000) const;
    [[nodiscard]] bool has_closed_form() const noexcept { return conjugate_.has_value(); }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    /// phi(uv) <= phi(u) phi(v) on the lattice.
    [[nodiscard]] bool submultiplicative(const std::vector<double>& lattice) const;
    /// Throws ConvexityViolated if uv > phi(u) + phi*(v) + tol anywhere on us x vs.
    void audit_fenchel_young(const std::vector<double>& us, const std::vector<double>& vs, double tol = 1e-9) const;

private:
    Fn phi_;
    std::optional<Fn> conjugate_;
    std::string name_;
};

/// Per-model penalties of one method.
struct Penalties {
    std::vector<double> hat;         ///< data-dependent pi-hat(k)
    std::vector<double> tilde;       ///< reference pi-tilde(k); empty when unavailable
    std::vector<double> complexity;  ///< per-model complexity term (delta-hat, log Delta, ...)
    double C = 1.0;                  ///< factor in front of the oracle bound
};

/// Distribution-side inputs for reference penalties and diagnostics.
struct OracleSide {
    std::vector<double> true_mins;    ///< inf_{F_k} P f
    std::vector<double> delta_bar;    ///< delta-bar_n(F_k; t_k)
    std::vector<double> delta_tilde;  ///< delta-tilde_n(F_k; t_k)
};

struct SelectionResult {
    std::string method;
    std::size_t k_hat = 1;  ///< 1-based model index
    std::vector<double> min_risk;
    std::vector<double> penalty;
    std::vector<double> reference_penalty;
    std::vector<double> delta_hat;
    double certificate = 0.0;
    std::map<std::string, double> diagnostics;
};

/// K [delta + sqrt((t/n) min) + t/n].
[[nodiscard]] double v1_value(double K, double delta, double min_risk, double t, double n);

/// Version-1 penalties; pi-tilde uses K_tilde with delta-tilde and the true minima when given.
[[nodiscard]] Penalties penalty_v1(const ModelFamily& family, const std::vector<double>& delta_hat,
                                   const std::vector<double>& mins, double n, double K_hat = 5.0,
                                   const OracleSide* oracle = nullptr, double K_tilde = 5.0);

/// Version-2 penalties A(eps) delta-hat + phi*(sqrt(2t/(eps n))) + t/n with A = 5/2 - phi(sqrt eps).
/// Per-model links (if given) must be nonincreasing; C(eps) uses the first link.
[[nodiscard]] Penalties penalty_v2(const ModelFamily& family, const ConvexLink& link, double epsilon,
                                   const std::vector<double>& delta_hat, double n,
                                   const OracleSide* oracle = nullptr,
                                   const std::vector<ConvexLink>* per_model = nullptr);

/// Lowest-index argmin of mins + penalties.
[[nodiscard]] SelectionResult select_penalized(const ModelFamily& family, const Penalties& penalties,
                                               const std::vector<double>& mins, std::string method = "penalized");

/// Smallest k such that mins[k] - mins[l] <= c * max_{j<=l} deltas[j] for every l > k (1-based).
[[nodiscard]] std::size_t comparison_index(const std::vector<double>& mins, const std::vector<double>& deltas,
                                           double c, double slack = 0.0);

struct ComparisonConstants {
    double c_hat = 3.0;
    double c_bar = 0.5;   ///< c_hat / 2 - 1
    double c_tilde = 7.0; ///< 2 c_hat + 1
};

/// Comparison method on a nested family. With an oracle the diagnostics carry
/// k_star, k_bar, k_tilde and the reference bound C delta-tilde_n(k_star).
[[nodiscard]] SelectionResult select_comparison(const ModelFamily& family, const std::vector<double>& delta_hat,
                                                const std::vector<double>& mins,
                                                const ComparisonConstants& consts = {},
                                                const OracleSide* oracle = nullptr, double oracle_accuracy = 0.0);

/// K [sqrt(min (log Delta + t)/n) + (log Delta + t)/n].
[[nodiscard]] double shattering_value(double K, double log_delta, double min_risk, double t, double n);
/// Penalties from shattering numbers on the sample; complexity holds log Delta per model.
[[nodiscard]] Penalties shattering_penalty(const ModelFamily& family, const Sample& sample, double K_hat = 6.0);

struct MassartConstants {
    double K = 4.0;
    double K_hat = 4.0;
    double K_tilde = 4.0;
};

/// delta(eps; j) = D_j^{-1} theta_j-sharp(eps / (K D_j)) and pi(eps; j) = 3 delta + K_hat D_j t_j / (eps n).
/// Penalties::C is (1 + eps)/(1 - eps) when eps < 1.
[[nodiscard]] Penalties massart_penalty(const ModelFamily& family, const std::vector<double>& D,
                                        const std::vector<ComplexityCurve>& theta, double epsilon, double n,
                                        const MassartConstants& consts = {});

[[nodiscard]] Penalties dimension_penalty(const ModelFamily& family, const std::vector<double>& dims, double n,
                                          double K_hat = 1.0);
/// K_hat (gamma-hat_k-sharp(1) + (t_k + 1)/n).
[[nodiscard]] Penalties kernel_penalty(const ModelFamily& family, const std::vector<ComplexityCurve>& gamma_hat,
                                       double n, double K_hat = 1.0);
/// K_hat (omega-hat_k-sharp(1/K_hat) + (t_k + 1)/n).
[[nodiscard]] Penalties rademacher_penalty(const ModelFamily& family, const std::vector<ComplexityCurve>& omega_hat,
                                           double n, double K_hat = 1.0);

/// Loss l(y, u) on u in [u_lo, u_hi] with the Lipschitz and convexity-modulus constants.
struct LossClassMeta {
    std::function<double(double, double)> loss;
    double L = 1.0;
    double Lambda = 0.0;               ///< modulus psi(s) = Lambda s when psi is unset
    std::function<double(double)> psi;
    std::function<double(double)> psi_inverse;
    double r = 2.0;
    double M = 1.0;
    double V = 1.0;
    double u_lo = 0.0;
    double u_hi = 1.0;
    std::vector<double> y_lattice{0.0, 0.25, 0.5, 0.75, 1.0};
    double loss_bound = 1.0;  ///< losses are divided by this to land in [0,1]

    [[nodiscard]] double modulus(double s) const { return psi ? psi(s) : Lambda * s; }
    [[nodiscard]] double modulus_inverse(double s) const;
};

/// Checks the Lipschitz and midpoint-convexity conditions on a lattice of u values.
void audit_loss(const LossClassMeta& meta, std::size_t lattice = 41);

/// C [Lambda M^{V/(V+1)} (L/Lambda v 1)^{(V+2)/(V+1)} n^{-(V+2)/(2(V+1))} + (L^2 t + 1)/(Lambda n)].
[[nodiscard]] double loss_pi_n(double M, double L, double Lambda, double V, double t, double n, double C = 1.0);
/// The first (rate) term of loss_pi_n.
[[nodiscard]] double loss_pi_n_rate(double M, double L, double Lambda, double V, double n, double C = 1.0);

/// W-bar(delta) = C [L theta(s) + L sqrt(s (t+1)/n) + t/n] with s = M^{2-r} psi^{-1}(delta/2).
[[nodiscard]] ComplexityCurve w_bar(const LossClassMeta& meta, const ComplexityCurve& theta, double t, double n,
                                    double C = 1.0);

struct LossClassResult {
    FunctionClass loss_class;
    std::optional<EvaluationMatrix> matrix;
    std::optional<ComplexityCurve> W_bar;
    double delta_W = 0.0;  ///< W-bar-sharp(kappa_W)
    double pi_n = 0.0;
    double pi_n_rate = 0.0;
};

/// Audits the loss, composes l . g for every member of G (rescaled by loss_bound),
/// evaluates it on the sample when one is given and builds W-bar from theta.
[[nodiscard]] LossClassResult loss_class(const LossClassMeta& meta, const FunctionClass& G, const Sample* sample,
                                         const ComplexityCurve* theta, double t, double n, double C = 1.0,
                                         double kappa_W = 1.0 / 16.0);

}  // namespace riskbound
