#pragma once
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "riskbound/bounds.hpp"
#include "riskbound/complexity.hpp"
#include "riskbound/function_class.hpp"
#include "riskbound/selection.hpp"

namespace riskbound {

/// A synthetic problem: oracle distribution, finite class and ground truth.
struct Scenario {
    std::string name;
    OracleDistribution oracle;
    FunctionClass cls;
    std::map<std::string, double> truth;
    std::string point_type;

    /// Optional fast path for the empirical risks of every member of `cls`.
    std::function<std::vector<double>(const Sample&)> fast_risks;
    /// Optional fast path for the excess risk of the ERM (classes too large to enumerate).
    std::function<double(const Sample&)> erm_excess;

    [[nodiscard]] std::vector<double> risks() const { return true_risks(oracle, cls.size()); }
    [[nodiscard]] std::vector<double> empirical(const Sample& s) const {
        return fast_risks ? fast_risks(s) : empirical_risks(cls, s);
    }
};

/// Uniform distribution on {0,1}^{N+1} with the N+1 coordinate functions.
[[nodiscard]] Scenario cube_scenario(std::size_t N);

/// Binary classification on [0,1] split into `cells` equal cells. In each cell the regression
/// function eta = 2P(Y=1|x) - 1 equals sign(x - m) h (|x - m| / (w/2))^{kappa - 1} around the
/// midpoint m, and the classifiers are I(x >= theta) with one threshold per cell drawn from a
/// (2 * half_grid + 1)-point grid centered at m.
struct TsybakovParams {
    double kappa = 1.0;
    double rho = 0.5;
    double h = 0.5;
    std::size_t cells = 1;
    std::size_t half_grid = 32;
};

/// Number of cells round(n^{rho/(2 kappa + rho - 1)}) used by the rate sweep.
[[nodiscard]] std::size_t tsybakov_cells(double kappa, double rho, std::size_t n);

/// With cells == 1 the threshold class is enumerated (loss class of the 0-1 loss);
/// otherwise the class is left empty and the per-cell ERM is exposed through erm_excess.
[[nodiscard]] Scenario tsybakov_scenario(const TsybakovParams& params);

/// The scenario used at sample size n in the rate sweep: tsybakov_cells(kappa, rho, n) cells
/// and a threshold pitch below 1/(4n).
[[nodiscard]] Scenario tsybakov_rate_scenario(double kappa, double rho, std::size_t n, double h = 0.5);

/// sqrt(2k+1) P_k(2x-1), orthonormal on [0,1].
[[nodiscard]] double legendre_basis(std::size_t k, double x);

/// Squared-loss regression Y = clip(g*(X) + U, 0, 1), X ~ U[0,1], U ~ U[-1/4, 1/4], with
/// g* = sum c*_k e_k. The class is the loss class of the net
/// {c* + pitch * z : z in {-half_width..half_width}^d, z_k = 0 for k >= active}.
struct RegressionParams {
    std::vector<double> g_star{0.5, 0.05, 0.03};
    std::size_t active = 0;  ///< free coordinates; 0 means all d
    double pitch = 0.01;
    int half_width = 2;
    /// Coordinates outside the net center: member coefficients are center + pitch * z.
    std::vector<double> center;  ///< defaults to g_star
};

inline constexpr double kRegressionNoiseVariance = 1.0 / 48.0;

/// Pitch 0.5 * sigma / sqrt(n), so the net resolves the least-squares spread at sample size n.
[[nodiscard]] double regression_pitch(std::size_t n);

[[nodiscard]] Scenario finite_dim_regression(const RegressionParams& params);
/// Convenience: d free coordinates with the default g*, pitch regression_pitch(n).
[[nodiscard]] Scenario finite_dim_regression(std::size_t d, std::size_t n, int half_width = 2);

/// Coefficients of every member of a regression scenario (row j = member j).
[[nodiscard]] std::vector<std::vector<double>> regression_coefficients(const RegressionParams& params);

/// E (Y - g(X))^2 by tensor Gauss-Legendre quadrature over (x, u), including the clip.
[[nodiscard]] double regression_risk_quadrature(const std::vector<double>& g_star, const std::vector<double>& coef);

/// A uniform distribution on {0, ..., support-1} with `members` random [0,1]-valued functions.
[[nodiscard]] Scenario finite_support_scenario(std::size_t support, std::size_t members, std::uint64_t seed);

/// Monte Carlo estimate of P f_j for the listed members.
[[nodiscard]] std::vector<MeanStderr> monte_carlo_risks(const Scenario& sc, const std::vector<std::size_t>& members,
                                                        std::size_t draws, std::uint64_t seed);

/// Members of F restricted to `idx` (labels kept).
[[nodiscard]] FunctionClass subset(const FunctionClass& cls, const std::vector<std::size_t>& idx);
/// Oracle of the restricted class.
[[nodiscard]] OracleDistribution restrict_oracle(const OracleDistribution& oracle, std::vector<std::size_t> idx);
[[nodiscard]] Scenario restrict_scenario(const Scenario& sc, const std::vector<std::size_t>& idx);

/// Nested regression nets F_1 ⊂ ... ⊂ F_models: F_k uses the first k basis functions.
struct NestedScenario {
    Scenario full;                                ///< the largest class with its oracle
    ModelFamily family;
    std::vector<std::vector<std::size_t>> index;  ///< members of F_k as indices into full.cls
    std::vector<double> dims;
    std::size_t k_star = 1;                       ///< 1-based
};

/// All classes live in the net {(c0 + h z0, h z1, ..., h z_{models-1})} with h = c1 and
/// F_k = {z_i = 0 for i >= k}. Then g* = c0 e0 + c1 e1 lies in F_2 but not in F_1, so k* = 2.
[[nodiscard]] NestedScenario nested_regression(std::size_t models = 4, int half_width = 1, double t = 2.0,
                                               std::vector<double> g_star = {0.5, 0.06});

// ---------------------------------------------------------------- experiments

struct ExperimentPlan {
    std::vector<std::size_t> n_sweep;
    std::size_t replicates = 50;
    double t = 1.0;
    std::uint64_t seed = 1;

    /// Throws BadParams unless n_sweep is strictly increasing and replicates >= 2.
    void validate() const;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double half_width = 0.0;  ///< 95% confidence half-width of the slope
};

/// Ordinary least squares of y on x with a Student-t confidence half-width.
[[nodiscard]] SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y);

struct RateReport {
    std::string scenario;
    std::string method;
    std::vector<std::size_t> n;
    std::vector<double> mean;
    std::vector<double> stderr_;
    std::vector<std::vector<double>> excess;  ///< [n index][replicate]
    double slope = 0.0;      ///< fitted on natural logs over n[fit_start..]
    double intercept = 0.0;
    double ci = 0.0;
    std::size_t fit_start = 0;
    bool degenerate = false;
    std::map<std::string, double> truth;
};

using ScenarioFactory = std::function<Scenario(std::size_t n)>;
/// Excess risk of a procedure on one sample.
using RateMethod = std::function<double(const Scenario&, const Sample&)>;

/// Excess risk of the (lowest-index) empirical risk minimizer.
[[nodiscard]] double erm_excess(const Scenario& sc, const Sample& sample);

/// Mean excess per n and the log-log slope over the upper half of the sweep.
[[nodiscard]] RateReport run_rate_experiment(const ScenarioFactory& factory, const ExperimentPlan& plan,
                                             const RateMethod& method = erm_excess, std::string method_name = "erm");

struct Prop2Row {
    std::size_t N = 0;
    double phi_max = 0.0;      ///< phi_n on the whole class
    double delta_n = 0.0;
    double delta_check = 0.0;  ///< geometric bound at sigma = t/n
    double threshold = 0.0;    ///< 0.25 sqrt(log N / n)
    double non_inclusion = 0.0;
    double non_inclusion_stderr = 0.0;
    std::size_t min_excess_members = 0;  ///< members with zero true excess
};

struct Prop2Report {
    std::size_t n = 0;
    double t = 1.0;
    std::size_t trials = 0;
    std::vector<Prop2Row> rows;
    bool delta_monotone = false;
    bool frequency_monotone = false;
};

[[nodiscard]] Prop2Report run_prop2_experiment(const std::vector<std::size_t>& N_list, std::size_t n, double t,
                                               std::size_t trials, std::uint64_t seed,
                                               std::size_t phi_replicates = 400, double q = 2.0);

/// Distribution-side profiles (phi_n and D on the true order).
struct OracleProfiles {
    SetProfile phi;
    SetProfile D;
    std::vector<double> risks;
    std::vector<double> excess;
};

[[nodiscard]] OracleProfiles oracle_profiles(const Scenario& sc, std::size_t n, std::size_t replicates,
                                             std::uint64_t seed, MetricKind kind = MetricKind::SecondMoment);

/// Data-side profiles (phi-hat and D-hat on the empirical order).
struct EmpiricalProfiles {
    SetProfile phi_hat;
    SetProfile D_hat;
    RiskReport risk;
};

[[nodiscard]] EmpiricalProfiles empirical_profiles(const EvaluationMatrix& matrix, std::size_t sign_draws,
                                                   std::uint64_t seed, MetricKind kind = MetricKind::SecondMoment);

struct OrderingReport {
    std::size_t n = 0;
    std::size_t trials = 0;
    double delta_bar = 0.0;
    double delta_tilde = 0.0;
    std::vector<double> delta_hat;
    double frequency = 0.0;  ///< share of trials with delta_bar <= delta_hat <= delta_tilde
    BoundReport example;     ///< report of the first trial
};

[[nodiscard]] OrderingReport run_ordering_experiment(const Scenario& sc, std::size_t n, const BoundConstants& consts,
                                                     std::size_t trials, std::uint64_t seed,
                                                     std::size_t phi_replicates = 400, std::size_t sign_draws = 512);

struct CoverageReport {
    std::size_t n = 0;
    std::size_t trials = 0;
    double t = 1.0;
    double delta_n = 0.0;
    double frequency = 0.0;  ///< share of trials with excess(ERM) > delta_n
    double stderr_ = 0.0;
    double budget = 0.0;     ///< log_q(q n / t) e^{-t}
    std::vector<double> excess;
};

[[nodiscard]] CoverageReport run_coverage_experiment(const Scenario& sc, std::size_t n, const BoundConstants& consts,
                                                     std::size_t trials, std::uint64_t seed,
                                                     std::size_t phi_replicates = 400);

/// Per-model data-side quantities of one sample from a nested family.
struct SelectionInputs {
    std::vector<EvaluationMatrix> matrices;  ///< evaluations of F_k on the sample
    std::vector<double> delta_hat;           ///< delta-hat_n(F_k; t_k)
    std::vector<double> mins;                ///< min empirical risk over F_k
    std::vector<std::size_t> erm_member;     ///< ERM of F_k as an index into full.cls
};

[[nodiscard]] SelectionInputs selection_inputs(const NestedScenario& ns, const Sample& sample,
                                               const BoundConstants& consts, std::size_t sign_draws,
                                               std::uint64_t seed);

struct SelectionSettings {
    BoundConstants consts;
    double K_hat = 5.0;
    double K_tilde = 5.0;
    ComparisonConstants comparison;
    double C_penalized = 1.0;
    double C_comparison = 8.0;
    std::size_t phi_replicates = 400;
    std::size_t sign_draws = 256;
};

struct SelectionTrial {
    std::size_t k_pen = 0;
    double excess_pen = 0.0;
    double bound_pen = 0.0;  ///< C (approximation error at k* + pi-tilde(k*))
    std::size_t k_cmp = 0;
    double excess_cmp = 0.0;
    double bound_cmp = 0.0;  ///< C delta-tilde_n(k*)
    std::size_t k_bar = 0;
    std::size_t k_tilde = 0;
};

struct SelectionReport {
    std::size_t n = 0;
    std::size_t k_star = 0;
    std::vector<SelectionTrial> trials;
    std::vector<double> delta_bar;
    std::vector<double> delta_tilde;
    std::vector<double> pi_tilde;
    double pen_ok = 0.0;            ///< share of trials with excess_pen <= bound_pen
    double cmp_ok = 0.0;            ///< share with excess_cmp <= bound_cmp
    double cmp_below_star = 0.0;    ///< share with k_cmp <= k_star
    double chain_ok = 0.0;          ///< share with k_tilde <= k_cmp <= k_bar <= k_star
    std::vector<double> ratio_pen;  ///< excess / (approximation + pi-tilde(k*)) per trial
    std::vector<double> ratio_cmp;  ///< excess / delta-tilde_n(k*) per trial
};

[[nodiscard]] SelectionReport run_selection_experiment(const NestedScenario& ns, std::size_t n,
                                                       const SelectionSettings& settings, std::size_t trials,
                                                       std::uint64_t seed);

/// Quantile by linear interpolation of the sorted values.
[[nodiscard]] double quantile(std::vector<double> values, double p);

}  // namespace riskbound
