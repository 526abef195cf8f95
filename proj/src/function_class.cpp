#include "riskbound/function_class.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "riskbound/error.hpp"

namespace riskbound {

namespace {

constexpr double kHuge = std::numeric_limits<double>::max();

void check_value(double v, bool binary) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::RangeViolation, "member value outside [0,1]");
    if (binary && v != 0.0 && v != 1.0) throw Error(ErrorKind::RangeViolation, "binary member value not in {0,1}");
}

}  // namespace

FunctionClass::FunctionClass(std::vector<Member> members, std::vector<std::string> labels, bool binary)
    : members_(std::move(members)), labels_(std::move(labels)), binary_(binary) {
    if (labels_.empty())
        for (std::size_t j = 0; j < members_.size(); ++j) labels_.push_back("f" + std::to_string(j + 1));
    if (labels_.size() != members_.size()) throw Error(ErrorKind::BadParams, "one label per member required");
}

void FunctionClass::add(Member f, std::string label) {
    members_.push_back(std::move(f));
    labels_.push_back(std::move(label));
}

double FunctionClass::operator()(std::size_t j, const Point& p) const {
    const double v = members_[j](p);
    check_value(v, binary_);
    return v;
}

EvaluationMatrix::EvaluationMatrix(std::size_t n, std::size_t m, std::vector<double> values, bool binary)
    : n_(n), m_(m), values_(std::move(values)), binary_(binary) {
    if (values_.size() != n_ * m_) throw Error(ErrorKind::BadParams, "matrix size mismatch");
    for (double v : values_) check_value(v, binary_);
}

std::vector<double> EvaluationMatrix::column_means() const {
    std::vector<double> out(m_, 0.0);
    for (std::size_t j = 0; j < m_; ++j) {
        const double* c = column(j);
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) s += c[i];
        out[j] = s / static_cast<double>(n_);
    }
    return out;
}

EvaluationMatrix evaluate(const FunctionClass& cls, const Sample& sample) {
    const std::size_t n = sample.size();
    const std::size_t m = cls.size();
    std::vector<double> values(n * m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i) values[j * n + i] = cls(j, sample.points[i]);
    return EvaluationMatrix(n, m, std::move(values), cls.binary());
}

std::vector<double> empirical_risks(const FunctionClass& cls, const Sample& sample) {
    std::vector<double> out(cls.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(sample.size());
    for (std::size_t j = 0; j < cls.size(); ++j) {
        double s = 0.0;
        for (const auto& p : sample.points) s += cls(j, p);
        out[j] = s * inv_n;
    }
    return out;
}

Sample OracleDistribution::draw(std::size_t n, std::uint64_t seed) const {
    if (!sampler) throw Error(ErrorKind::OracleUnavailable, "oracle has no sampler");
    Rng rng(seed);
    Sample s = sampler(n, rng);
    s.stream = seed;
    return s;
}

MetricTable MetricTable::from_oracle(const OracleDistribution& oracle, std::size_t m, MetricKind kind) {
    if (!oracle.second_moment) throw Error(ErrorKind::OracleUnavailable, "oracle has no metric");
    if (kind == MetricKind::Variance && !oracle.true_risk)
        throw Error(ErrorKind::OracleUnavailable, "variance metric needs true risks");
    MetricTable t(m);
    std::vector<double> risks;
    if (kind == MetricKind::Variance) risks = true_risks(oracle, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = j + 1; k < m; ++k) {
            double v = oracle.second_moment(j, k);
            if (kind == MetricKind::Variance) v -= (risks[j] - risks[k]) * (risks[j] - risks[k]);
            t.set(j, k, std::max(v, 0.0));
        }
    return t;
}

MetricTable MetricTable::empirical(const EvaluationMatrix& matrix, MetricKind kind) {
    const std::size_t n = matrix.rows();
    const std::size_t m = matrix.cols();
    MetricTable t(m);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < m; ++j) {
        const double* a = matrix.column(j);
        for (std::size_t k = j + 1; k < m; ++k) {
            const double* b = matrix.column(k);
            double s2 = 0.0;
            double s1 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = a[i] - b[i];
                s2 += d * d;
                s1 += d;
            }
            double v = s2 * inv_n;
            if (kind == MetricKind::Variance) v -= (s1 * inv_n) * (s1 * inv_n);
            t.set(j, k, std::max(v, 0.0));
        }
    }
    return t;
}

RiskReport erm(std::vector<double> risks) {
    if (risks.empty()) throw Error(ErrorKind::BadParams, "erm needs a nonempty class");
    RiskReport r;
    r.empirical_risks = std::move(risks);
    r.erm_index = best_index(r.empirical_risks);
    r.empirical_excess = excess_from_risks(r.empirical_risks);
    return r;
}

RiskReport erm(const EvaluationMatrix& matrix) { return erm(matrix.column_means()); }

std::vector<double> true_risks(const OracleDistribution& oracle, std::size_t m) {
    if (!oracle.true_risk) throw Error(ErrorKind::OracleUnavailable, "true risks are not computable");
    std::vector<double> out(m);
    for (std::size_t j = 0; j < m; ++j) out[j] = oracle.true_risk(j);
    return out;
}

void attach_oracle(RiskReport& report, const OracleDistribution& oracle) {
    report.true_risks = true_risks(oracle, report.empirical_risks.size());
    report.excess = excess_from_risks(report.true_risks);
    report.oracle_accuracy = oracle.accuracy;
}

std::size_t best_index(const std::vector<double>& risks) {
    return static_cast<std::size_t>(std::min_element(risks.begin(), risks.end()) - risks.begin());
}

std::vector<double> excess_from_risks(const std::vector<double>& risks) {
    const double lo = *std::min_element(risks.begin(), risks.end());
    std::vector<double> out(risks.size());
    for (std::size_t j = 0; j < risks.size(); ++j) out[j] = risks[j] - lo;
    return out;
}

std::vector<std::size_t> delta_minimal(const RiskReport& report, double delta, Which which) {
    if (!(delta >= 0.0)) throw Error(ErrorKind::BadParams, "delta must be nonnegative");
    const auto& ex = which == Which::True ? report.excess : report.empirical_excess;
    if (which == Which::True && ex.empty()) throw Error(ErrorKind::OracleUnavailable, "report has no true excess");
    const double slack = which == Which::True ? report.oracle_accuracy : 0.0;
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < ex.size(); ++j)
        if (ex[j] <= delta + slack) out.push_back(j);
    return out;
}

double diameter(const std::vector<std::size_t>& indices, const MetricTable& metric) {
    double best = 0.0;
    for (std::size_t a = 0; a < indices.size(); ++a)
        for (std::size_t b = a + 1; b < indices.size(); ++b) best = std::max(best, metric(indices[a], indices[b]));
    return std::sqrt(best);
}

std::vector<RademacherDraw> random_signs(std::size_t n, std::size_t draws, std::uint64_t seed) {
    std::vector<RademacherDraw> out(draws);
    for (std::size_t d = 0; d < draws; ++d) {
        const std::uint64_t s = derive_seed(seed, d);
        Rng rng(s);
        out[d].stream = s;
        out[d].signs.resize(n);
        for (auto& e : out[d].signs) e = rng.sign();
    }
    return out;
}

std::vector<RademacherDraw> make_signs(std::size_t n, std::uint64_t seed, std::size_t draws,
                                       std::size_t exhaustive_cap) {
    if (n < 63 && (std::size_t{1} << n) <= exhaustive_cap) {
        const std::size_t total = std::size_t{1} << n;
        std::vector<RademacherDraw> out(total);
        for (std::size_t code = 0; code < total; ++code) {
            out[code].stream = code;
            out[code].signs.resize(n);
            for (std::size_t i = 0; i < n; ++i) out[code].signs[i] = ((code >> i) & 1U) ? 1.0 : -1.0;
        }
        return out;
    }
    return random_signs(n, draws, seed);
}

std::vector<double> rademacher_values(const EvaluationMatrix& matrix, const RademacherDraw& draw) {
    const std::size_t n = matrix.rows();
    if (draw.signs.size() != n) throw Error(ErrorKind::BadParams, "sign vector length differs from n");
    std::vector<double> out(matrix.cols());
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
        const double* c = matrix.column(j);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += draw.signs[i] * c[i];
        out[j] = s / static_cast<double>(n);
    }
    return out;
}

std::size_t SetProfile::count(double delta) const {
    return static_cast<std::size_t>(std::upper_bound(levels.begin(), levels.end(), delta + tolerance) -
                                    levels.begin());
}

double SetProfile::operator()(double delta) const {
    const std::size_t k = count(delta);
    return k == 0 ? 0.0 : values[k - 1];
}

SetProfile ordering(const std::vector<double>& excess, double tolerance) {
    SetProfile p;
    p.order.resize(excess.size());
    std::iota(p.order.begin(), p.order.end(), std::size_t{0});
    std::stable_sort(p.order.begin(), p.order.end(),
                     [&](std::size_t a, std::size_t b) { return excess[a] < excess[b]; });
    p.levels.reserve(excess.size());
    for (std::size_t j : p.order) p.levels.push_back(excess[j]);
    p.values.assign(excess.size(), 0.0);
    p.stderrs.assign(excess.size(), 0.0);
    p.tolerance = tolerance;
    return p;
}

SetProfile diameter_profile(const SetProfile& order, const MetricTable& metric) {
    SetProfile p = order;
    double best = 0.0;
    for (std::size_t k = 0; k < p.order.size(); ++k) {
        for (std::size_t a = 0; a < k; ++a) best = std::max(best, metric(p.order[a], p.order[k]));
        p.values[k] = std::sqrt(best);
        p.stderrs[k] = 0.0;
    }
    return p;
}

namespace {

// Prefix ranges max - min of z along the order.
void accumulate_ranges(const std::vector<std::size_t>& order, const std::vector<double>& z, std::vector<double>& out) {
    double hi = -kHuge;
    double lo = kHuge;
    for (std::size_t k = 0; k < order.size(); ++k) {
        hi = std::max(hi, z[order[k]]);
        lo = std::min(lo, z[order[k]]);
        out[k] = hi - lo;
    }
}

}  // namespace

SetProfile phi_hat_profile(const EvaluationMatrix& matrix, const std::vector<RademacherDraw>& signs) {
    if (signs.empty()) throw Error(ErrorKind::BadParams, "phi_hat needs at least one sign vector");
    const RiskReport r = erm(matrix);
    SetProfile p = ordering(r.empirical_excess);
    const std::size_t m = matrix.cols();
    std::vector<std::vector<double>> per(signs.size(), std::vector<double>(m));
    parallel_for(signs.size(), [&](std::size_t d) { accumulate_ranges(p.order, rademacher_values(matrix, signs[d]), per[d]); });
    std::vector<double> col(signs.size());
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t d = 0; d < signs.size(); ++d) col[d] = per[d][k];
        const auto ms = mean_stderr(col);
        p.values[k] = ms.mean;
        p.stderrs[k] = ms.stderr_;
    }
    return p;
}

double phi_hat(const EvaluationMatrix& matrix, const std::vector<RademacherDraw>& signs, double delta) {
    if (!(delta >= 0.0)) throw Error(ErrorKind::BadParams, "delta must be nonnegative");
    return phi_hat_profile(matrix, signs)(delta);
}

SetProfile phi_n_profile(const FunctionClass& cls, const OracleDistribution& oracle, std::size_t n,
                         std::size_t replicates, std::uint64_t seed) {
    return phi_n_profile([&cls](const Sample& s) { return empirical_risks(cls, s); }, cls.size(), oracle, n,
                         replicates, seed);
}

SetProfile phi_n_profile(const std::function<std::vector<double>(const Sample&)>& risks_of, std::size_t m,
                         const OracleDistribution& oracle, std::size_t n, std::size_t replicates,
                         std::uint64_t seed) {
    if (replicates < 2) throw Error(ErrorKind::BadParams, "phi_n needs at least two replicates");
    const auto risks = true_risks(oracle, m);
    SetProfile p = ordering(excess_from_risks(risks), oracle.accuracy);
    std::vector<std::vector<double>> per(replicates, std::vector<double>(m));
    parallel_for(replicates, [&](std::size_t r) {
        const Sample s = oracle.draw(n, derive_seed(seed, r));
        auto z = risks_of(s);
        if (z.size() != m) throw Error(ErrorKind::BadParams, "risk function returned the wrong length");
        for (std::size_t j = 0; j < m; ++j) z[j] -= risks[j];
        accumulate_ranges(p.order, z, per[r]);
    });
    std::vector<double> col(replicates);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t r = 0; r < replicates; ++r) col[r] = per[r][k];
        const auto ms = mean_stderr(col);
        p.values[k] = ms.mean;
        p.stderrs[k] = ms.stderr_;
    }
    return p;
}

MeanStderr phi_n(const FunctionClass& cls, const OracleDistribution& oracle, std::size_t n, double delta,
                 std::size_t replicates, std::uint64_t seed) {
    if (!(delta >= 0.0)) throw Error(ErrorKind::BadParams, "delta must be nonnegative");
    const SetProfile p = phi_n_profile(cls, oracle, n, replicates, seed);
    const std::size_t k = p.count(delta);
    if (k == 0) return {};
    return {p.values[k - 1], p.stderrs[k - 1]};
}

double r_check(const std::vector<double>& excess, const MetricTable& metric, double sigma, double delta,
               double accuracy) {
    if (!(sigma >= 0.0) || !(delta >= sigma)) throw Error(ErrorKind::BadParams, "r_check needs 0 <= sigma <= delta");
    std::vector<std::size_t> inner;
    std::vector<std::size_t> outer;
    for (std::size_t j = 0; j < excess.size(); ++j) {
        if (excess[j] <= sigma + accuracy) inner.push_back(j);
        if (excess[j] <= delta + accuracy) outer.push_back(j);
    }
    if (inner.empty()) throw Error(ErrorKind::EmptyMinimalSet, "F(sigma) is empty");
    double worst = 0.0;
    for (std::size_t f : outer) {
        double nearest = kHuge;
        for (std::size_t g : inner) nearest = std::min(nearest, metric(f, g));
        worst = std::max(worst, nearest);
    }
    return std::sqrt(worst);
}

}  // namespace riskbound
