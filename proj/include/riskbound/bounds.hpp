#pragma once
#include <cstdint>
#include <optional>
#include <vector>

#include "riskbound/function_class.hpp"
#include "riskbound/transform.hpp"

namespace riskbound {

struct BoundConstants {
    double q = 2.0;
    double K_bar = 2.0;
    double K_hat = 2.0;
    double K_tilde = 8.0;
    double c_hat = 1.5;
    double c_tilde = 3.0;
    double K_check = 4.0;
    std::optional<double> kappa_W;  ///< defaults to 1/(2q^3)
    double t = 1.0;

    [[nodiscard]] double kappa_w() const { return kappa_W ? *kappa_W : 1.0 / (2.0 * q * q * q); }
    /// Throws BadParams unless q > 1, t > 0, 2 <= K_hat <= K_tilde and c_hat, c_tilde >= 1.
    void validate() const;
};

/// U_n(delta; t) = phi + sqrt(2(t/n)(D^2 + 2 phi)) + t/(2n), pointwise on the grid.
[[nodiscard]] GridTable u_n(const GridTable& phi, const GridTable& D, const BoundConstants& consts, double n);

/// V_n = U_n^{flat,q} on the same grid.
[[nodiscard]] GridTable v_n(const GridTable& u_table);

/// delta_n(t) = U^{sharp,q}(1/(2q)) restricted to (0,1].
[[nodiscard]] double delta_n(const GridTable& u_table, const BoundConstants& consts);

/// Distribution-dependent and data-dependent inputs of the bound family.
struct BoundInputs {
    SetProfile phi;                      ///< phi_n on the true order
    SetProfile D;                        ///< D on the true order
    std::optional<SetProfile> phi_hat;   ///< phi-hat on the empirical order
    std::optional<SetProfile> D_hat;     ///< D-hat on the empirical order
    double n = 1.0;
};

struct GeometricBound {
    double sigma = 0.0;
    std::vector<double> r_check;
    std::vector<double> psi_check;
    std::vector<double> psi_check_stderr;
    std::vector<double> U_check;
    double delta_check = 0.0;
};

struct BoundReport {
    GeometricGrid grid{2.0, 0, 0};
    double n = 1.0;
    double t = 1.0;
    GridTable phi;
    GridTable D;
    std::optional<GridTable> phi_hat;
    std::optional<GridTable> D_hat;
    GridTable U;
    GridTable V;
    GridTable U_bar;
    std::optional<GridTable> U_hat;
    GridTable U_tilde;
    double delta_n = 0.0;
    double delta_bar = 0.0;
    std::optional<double> delta_hat;
    double delta_tilde = 0.0;
    std::optional<GeometricBound> geometric;
};

/// U_n, V_n, delta_n and the bar/hat/tilde family with their sharp,q-transforms at 1/(2q^3).
[[nodiscard]] BoundReport delta_family(const BoundInputs& inputs, const BoundConstants& consts);

/// delta-hat_n(t) alone: the sharp,q-transform of U-hat at 1/(2q^3).
[[nodiscard]] double delta_hat(const SetProfile& phi_hat, const SetProfile& D_hat, const BoundConstants& consts,
                               double n);

struct CheckBound {
    ComplexityCurve curve;
    double delta_check;
};

/// U-check = K-check (phi-check + D-check sqrt(t/n) + t/n) and its continuous sharp at 1/q.
/// Optional raw tables must be dominated by the envelopes on their grid.
[[nodiscard]] CheckBound u_check_concave(const ComplexityCurve& phi_env, const ComplexityCurve& D_env,
                                         const BoundConstants& consts, double n,
                                         const GridTable* phi_raw = nullptr, const GridTable* D_raw = nullptr);

/// Geometric refinement: Monte Carlo psi-check under rho <= r-check + epsilon_oracle and
/// the sharp,q-transform of U-check(sigma; .) + sigma at 1/(2q).
[[nodiscard]] GeometricBound geometric_bound(const FunctionClass& cls, const OracleDistribution& oracle, double sigma,
                                             const BoundConstants& consts, std::size_t n, std::size_t replicates,
                                             std::uint64_t seed, MetricKind kind = MetricKind::SecondMoment);

}  // namespace riskbound
