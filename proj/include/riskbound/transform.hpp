#pragma once
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace riskbound {

enum class Shape { Arbitrary, ConcaveType, StrictlyConcaveType };

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Relative tolerance used when auditing a declared shape.
inline constexpr double kShapeTolerance = 1e-9;

/// A nonnegative rate curve delta -> psi(delta) with a declared shape class.
///
/// The curve lives on (0, cap]. Curves built from knots (steps, piecewise linear)
/// remember their breakpoints so that sup-type transforms are exact.
class ComplexityCurve {
public:
    using Evaluator = std::function<double(double)>;

    ComplexityCurve(Evaluator f, Shape shape = Shape::Arbitrary, double gamma = 0.0, double cap = 1.0);

    static ComplexityCurve constant(double c, double cap = kInfinity);
    /// c * u^alpha, tagged strictly-concave-type(alpha) for alpha in (0,1).
    static ComplexityCurve power(double c, double alpha, double cap = kInfinity);
    /// Right-continuous step curve: values[i] on [knots[i], knots[i+1]), `below` left of knots[0].
    static ComplexityCurve steps(std::vector<double> knots, std::vector<double> values, double below = 0.0,
                                 Shape shape = Shape::Arbitrary, double cap = kInfinity);
    /// Linear interpolation through (knots[i], values[i]); constant outside the knot range.
    static ComplexityCurve piecewise_linear(std::vector<double> knots, std::vector<double> values,
                                            Shape shape = Shape::Arbitrary, double cap = kInfinity);
    /// Least concave majorant of the running maximum of raw(delta) sampled at `knots`;
    /// constant to the left of the first knot and right of the last one.
    static ComplexityCurve concave_envelope(const Evaluator& raw, const std::vector<double>& knots,
                                            double cap = kInfinity);

    double operator()(double delta) const;

    [[nodiscard]] Shape shape() const noexcept { return shape_; }
    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] double cap() const noexcept { return cap_; }
    [[nodiscard]] const std::vector<double>& knots() const noexcept { return knots_; }
    /// True when the sup of psi(s)/s over [a,b] is always attained at a, b or a knot.
    [[nodiscard]] bool knot_exact() const noexcept { return knot_exact_; }
    [[nodiscard]] const std::string& note() const noexcept { return note_; }

    [[nodiscard]] ComplexityCurve scaled(double a) const;
    [[nodiscard]] ComplexityCurve with_cap(double cap) const;
    ComplexityCurve& set_note(std::string note);

private:
    Evaluator f_;
    Shape shape_;
    double gamma_;
    double cap_;
    std::vector<double> knots_;
    bool knot_exact_ = false;
    std::string note_;
};

/// Points delta_j = q^{-j} for j in [j_min, j_max].
class GeometricGrid {
public:
    GeometricGrid(double q, int j_min, int j_max);

    /// The default grid for a sample of size n and confidence t: j in [-1, ceil(log_q(n/t)) + 2].
    static GeometricGrid for_sample(double q, double n, double t);

    [[nodiscard]] double q() const noexcept { return q_; }
    [[nodiscard]] int j_min() const noexcept { return j_min_; }
    [[nodiscard]] int j_max() const noexcept { return j_max_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(j_max_ - j_min_ + 1); }
    [[nodiscard]] double point(int j) const;
    /// Points in index order (decreasing delta).
    [[nodiscard]] std::vector<double> points() const;
    [[nodiscard]] std::optional<int> index_of(double delta, double rel_tol = 1e-12) const;

    bool operator==(const GeometricGrid& o) const noexcept {
        return q_ == o.q_ && j_min_ == o.j_min_ && j_max_ == o.j_max_;
    }

private:
    double q_;
    int j_min_;
    int j_max_;
};

/// Values of a curve on a geometric grid; values[k] belongs to j = j_min + k.
struct GridTable {
    GeometricGrid grid{2.0, 0, 0};
    std::vector<double> values;

    [[nodiscard]] double at(int j) const { return values.at(static_cast<std::size_t>(j - grid.j_min())); }
    static GridTable sample(const GeometricGrid& grid, const std::function<double(double)>& f);
};

/// Audits the declared shape on a 2^{1/16}-geometric scan of [lo, hi].
void audit_shape(const ComplexityCurve& psi, double lo, double hi);

/// psi-flat(delta) = sup_{sigma >= delta} psi(sigma)/sigma.
[[nodiscard]] double flat(const ComplexityCurve& psi, double delta);

/// psi-sharp(eps) = inf{delta > 0 : flat(delta) <= eps}; +infinity when nothing in (0, cap] qualifies.
[[nodiscard]] double sharp(const ComplexityCurve& psi, double epsilon);

/// Discrete flat transform: sup over grid points delta_j >= delta (and <= 1 when restricted).
[[nodiscard]] double flat_q(const GridTable& table, double delta, bool restrict_unit);

/// Discrete sharp transform on a grid. With restrict_unit the search runs over (0,1]
/// and 1 is returned when nothing qualifies; otherwise +infinity is returned.
[[nodiscard]] double sharp_q(const GridTable& table, double epsilon, bool restrict_unit);
[[nodiscard]] double sharp_q(const ComplexityCurve& psi, double epsilon, const GeometricGrid& grid,
                             bool restrict_unit);

struct FixedPointResult {
    double delta_bar = 0.0;
    std::vector<double> iterates;
};

/// Solves psi(delta) = delta for a strictly-concave-type curve and records the
/// iterates delta_0 = 1, delta_{k+1} = min(psi(delta_k), 1).
[[nodiscard]] FixedPointResult fixed_point(const ComplexityCurve& psi, int max_iter = 200,
                                           double tolerance = 1e-12);

/// Upper bound on delta_k - delta_bar for the k-th iterate.
[[nodiscard]] double fixed_point_error_bound(double delta_bar, double gamma, int k);

/// Sum of psi(delta_j)/delta_j over grid points delta_j >= delta.
[[nodiscard]] double geometric_tail_sum(const ComplexityCurve& psi, double delta, const GeometricGrid& grid);

/// c_{gamma,q} = 1 / (1 - q^{-(1-gamma)}).
[[nodiscard]] double tail_sum_constant(double gamma, double q);

}  // namespace riskbound
