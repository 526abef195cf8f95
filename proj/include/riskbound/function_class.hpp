#pragma once
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "riskbound/random.hpp"

namespace riskbound {

/// A scenario point: covariates x and (for labeled scenarios) a response y.
struct Point {
    std::vector<double> x;
    double y = 0.0;
};

struct Sample {
    std::vector<Point> points;
    std::uint64_t stream = 0;  ///< RNG stream that produced the sample

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

/// Finite ordered dictionary of [0,1]-valued functions.
class FunctionClass {
public:
    using Member = std::function<double(const Point&)>;

    FunctionClass() = default;
    FunctionClass(std::vector<Member> members, std::vector<std::string> labels = {}, bool binary = false);

    void add(Member f, std::string label);

    [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
    [[nodiscard]] bool binary() const noexcept { return binary_; }
    [[nodiscard]] const std::string& label(std::size_t j) const { return labels_.at(j); }
    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
    [[nodiscard]] const Member& member(std::size_t j) const { return members_.at(j); }

    /// Evaluates member j at p, auditing the [0,1] range (and {0,1} for binary classes).
    double operator()(std::size_t j, const Point& p) const;

private:
    std::vector<Member> members_;
    std::vector<std::string> labels_;
    bool binary_ = false;
};

/// n x m evaluation of a class on a sample, stored column by column.
class EvaluationMatrix {
public:
    EvaluationMatrix(std::size_t n, std::size_t m, std::vector<double> values, bool binary = false);

    [[nodiscard]] std::size_t rows() const noexcept { return n_; }
    [[nodiscard]] std::size_t cols() const noexcept { return m_; }
    [[nodiscard]] bool binary() const noexcept { return binary_; }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return values_[j * n_ + i]; }
    [[nodiscard]] const double* column(std::size_t j) const { return values_.data() + j * n_; }
    [[nodiscard]] std::vector<double> column_means() const;

private:
    std::size_t n_;
    std::size_t m_;
    std::vector<double> values_;
    bool binary_;
};

[[nodiscard]] EvaluationMatrix evaluate(const FunctionClass& cls, const Sample& sample);

/// Column means P_n f_j without materializing the matrix.
[[nodiscard]] std::vector<double> empirical_risks(const FunctionClass& cls, const Sample& sample);

enum class MetricKind {
    SecondMoment,  ///< rho^2(f,g) = P(f-g)^2
    Variance,      ///< rho^2(f,g) = P(f-g)^2 - (P(f-g))^2
};

/// A synthetic distribution with exact (or epsilon-accurate) population quantities.
struct OracleDistribution {
    std::function<Sample(std::size_t n, Rng& rng)> sampler;
    std::function<double(std::size_t j)> true_risk;                    ///< P f_j
    std::function<double(std::size_t j, std::size_t k)> second_moment;  ///< P(f_j - f_k)^2
    double accuracy = 0.0;                                             ///< epsilon_oracle

    [[nodiscard]] Sample draw(std::size_t n, std::uint64_t seed) const;
};

/// Symmetric table of squared distances rho^2 between class members.
class MetricTable {
public:
    explicit MetricTable(std::size_t m) : m_(m), d2_(m * m, 0.0) {}

    static MetricTable from_oracle(const OracleDistribution& oracle, std::size_t m,
                                   MetricKind kind = MetricKind::SecondMoment);
    static MetricTable empirical(const EvaluationMatrix& matrix, MetricKind kind = MetricKind::SecondMoment);

    [[nodiscard]] std::size_t size() const noexcept { return m_; }
    [[nodiscard]] double operator()(std::size_t j, std::size_t k) const { return d2_[j * m_ + k]; }
    void set(std::size_t j, std::size_t k, double v) {
        d2_[j * m_ + k] = v;
        d2_[k * m_ + j] = v;
    }

private:
    std::size_t m_;
    std::vector<double> d2_;
};

struct RiskReport {
    std::vector<double> empirical_risks;
    std::vector<double> true_risks;  ///< empty when no oracle was consulted
    std::size_t erm_index = 0;       ///< 0-based
    std::vector<double> excess;
    std::vector<double> empirical_excess;
    double oracle_accuracy = 0.0;
};

/// Lowest index attaining the minimal empirical risk, with min-shifted empirical excesses.
[[nodiscard]] RiskReport erm(const EvaluationMatrix& matrix);
[[nodiscard]] RiskReport erm(std::vector<double> empirical_risks);

/// Fills true risks and excesses from an oracle.
void attach_oracle(RiskReport& report, const OracleDistribution& oracle);

[[nodiscard]] std::vector<double> true_risks(const OracleDistribution& oracle, std::size_t m);
[[nodiscard]] std::vector<double> excess_from_risks(const std::vector<double>& risks);
/// Lowest index attaining the minimal true risk.
[[nodiscard]] std::size_t best_index(const std::vector<double>& risks);

enum class Which { True, Empirical };

[[nodiscard]] std::vector<std::size_t> delta_minimal(const RiskReport& report, double delta, Which which);

/// Sup over pairs of rho(f,g); zero for singletons.
[[nodiscard]] double diameter(const std::vector<std::size_t>& indices, const MetricTable& metric);

struct RademacherDraw {
    std::vector<double> signs;  ///< entries exactly +1 or -1
    std::uint64_t stream = 0;
};

/// Sign vectors for Rademacher averages: every vector when 2^n <= exhaustive_cap,
/// otherwise `draws` independent vectors from `seed`.
[[nodiscard]] std::vector<RademacherDraw> make_signs(std::size_t n, std::uint64_t seed, std::size_t draws = 512,
                                                     std::size_t exhaustive_cap = std::size_t{1} << 16);
[[nodiscard]] std::vector<RademacherDraw> random_signs(std::size_t n, std::size_t draws, std::uint64_t seed);

/// R_n(f_j) = n^{-1} sum_i eps_i f_j(X_i) for every column.
[[nodiscard]] std::vector<double> rademacher_values(const EvaluationMatrix& matrix, const RademacherDraw& draw);

/// A functional of the delta-minimal set, tabulated as a step function of delta.
///
/// Members enter in order of increasing excess; values[k] is the functional on the
/// first k+1 members.
struct SetProfile {
    std::vector<std::size_t> order;
    std::vector<double> levels;
    std::vector<double> values;
    std::vector<double> stderrs;
    double tolerance = 0.0;

    /// Number of members whose excess is at most delta (+ tolerance).
    [[nodiscard]] std::size_t count(double delta) const;
    [[nodiscard]] double operator()(double delta) const;
};

/// Members sorted by excess (stable), with their levels.
[[nodiscard]] SetProfile ordering(const std::vector<double>& excess, double tolerance = 0.0);

[[nodiscard]] SetProfile diameter_profile(const SetProfile& order, const MetricTable& metric);

/// phi-hat on the empirical order: sup over pairs of |R_n(f-g)|, averaged over draws.
[[nodiscard]] SetProfile phi_hat_profile(const EvaluationMatrix& matrix, const std::vector<RademacherDraw>& signs);
[[nodiscard]] double phi_hat(const EvaluationMatrix& matrix, const std::vector<RademacherDraw>& signs, double delta);

/// phi_n on the true order: Monte Carlo mean over fresh samples of sup over pairs of
/// |(P_n - P)(f-g)|.
[[nodiscard]] SetProfile phi_n_profile(const FunctionClass& cls, const OracleDistribution& oracle, std::size_t n,
                                       std::size_t replicates, std::uint64_t seed);
/// Same, with the empirical risks of all m members supplied by `risks_of`.
[[nodiscard]] SetProfile phi_n_profile(const std::function<std::vector<double>(const Sample&)>& risks_of,
                                       std::size_t m, const OracleDistribution& oracle, std::size_t n,
                                       std::size_t replicates, std::uint64_t seed);
[[nodiscard]] MeanStderr phi_n(const FunctionClass& cls, const OracleDistribution& oracle, std::size_t n,
                               double delta, std::size_t replicates, std::uint64_t seed);

/// r-check(sigma; delta) = sup_{f in F(delta)} min_{g in F(sigma)} rho(f,g).
[[nodiscard]] double r_check(const std::vector<double>& excess, const MetricTable& metric, double sigma, double delta,
                             double accuracy = 0.0);

}  // namespace riskbound
