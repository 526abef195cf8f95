#include "riskbound/transform.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "riskbound/error.hpp"

namespace riskbound {

namespace {

constexpr double kScanRatio = 1.0442737824274138;  // 2^{1/16}
constexpr double kTiny = 1e-300;
constexpr int kBisectionSteps = 400;

double checked(const ComplexityCurve& psi, double delta) {
    const double v = psi(delta);
    if (!(v >= 0.0) || std::isnan(v))
        throw Error(ErrorKind::BadParams, "curve value must be a nonnegative number at delta=" + std::to_string(delta));
    return v;
}

// Sup of psi(s)/s over s in [delta, cap], without the shape audit.
double flat_unchecked(const ComplexityCurve& psi, double delta) {
    double best = checked(psi, delta) / delta;
    if (psi.shape() != Shape::Arbitrary) return best;
    const double cap = psi.cap();
    for (double k : psi.knots())
        if (k > delta && k <= cap) best = std::max(best, checked(psi, k) / k);
    if (std::isfinite(cap) && cap > delta) best = std::max(best, checked(psi, cap) / cap);
    if (psi.knot_exact()) return best;
    const double top = std::isfinite(cap) ? cap : delta * 0x1.0p64;
    for (double s = delta * kScanRatio; s < top; s *= kScanRatio) best = std::max(best, checked(psi, s) / s);
    return best;
}

}  // namespace

ComplexityCurve::ComplexityCurve(Evaluator f, Shape shape, double gamma, double cap)
    : f_(std::move(f)), shape_(shape), gamma_(gamma), cap_(cap) {
    if (!f_) throw Error(ErrorKind::BadParams, "curve evaluator is empty");
    if (!(cap_ > 0.0)) throw Error(ErrorKind::BadParams, "curve cap must be positive");
    if (shape_ == Shape::StrictlyConcaveType && !(gamma_ > 0.0 && gamma_ < 1.0))
        throw Error(ErrorKind::BadParams, "strictly-concave-type curves need gamma in (0,1)");
    if (shape_ != Shape::StrictlyConcaveType) gamma_ = 0.0;
}

ComplexityCurve ComplexityCurve::constant(double c, double cap) {
    if (!(c >= 0.0)) throw Error(ErrorKind::BadParams, "constant curve must be nonnegative");
    ComplexityCurve out([c](double) { return c; }, Shape::ConcaveType, 0.0, cap);
    out.knot_exact_ = true;
    return out;
}

ComplexityCurve ComplexityCurve::power(double c, double alpha, double cap) {
    if (!(c >= 0.0) || !(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorKind::BadParams, "power curve needs c >= 0 and alpha in (0,1)");
    return ComplexityCurve([c, alpha](double u) { return c * std::pow(u, alpha); }, Shape::StrictlyConcaveType,
                           alpha, cap);
}

ComplexityCurve ComplexityCurve::steps(std::vector<double> knots, std::vector<double> values, double below,
                                       Shape shape, double cap) {
    if (knots.size() != values.size() || knots.empty())
        throw Error(ErrorKind::BadParams, "step curve needs matching nonempty knots and values");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1])) throw Error(ErrorKind::BadParams, "step knots must increase");
    auto k = knots;
    auto v = values;
    ComplexityCurve out(
        [k, v, below](double u) {
            auto it = std::upper_bound(k.begin(), k.end(), u);
            if (it == k.begin()) return below;
            return v[static_cast<std::size_t>(it - k.begin()) - 1];
        },
        shape, 0.0, cap);
    out.knots_ = std::move(knots);
    out.knot_exact_ = true;
    return out;
}

ComplexityCurve ComplexityCurve::piecewise_linear(std::vector<double> knots, std::vector<double> values, Shape shape,
                                                  double cap) {
    if (knots.size() != values.size() || knots.empty())
        throw Error(ErrorKind::BadParams, "piecewise curve needs matching nonempty knots and values");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1])) throw Error(ErrorKind::BadParams, "piecewise knots must increase");
    auto k = knots;
    auto v = values;
    ComplexityCurve out(
        [k, v](double u) {
            if (u <= k.front()) return v.front();
            if (u >= k.back()) return v.back();
            const auto i = static_cast<std::size_t>(std::upper_bound(k.begin(), k.end(), u) - k.begin());
            const double w = (u - k[i - 1]) / (k[i] - k[i - 1]);
            return v[i - 1] + w * (v[i] - v[i - 1]);
        },
        shape, 0.0, cap);
    out.knots_ = std::move(knots);
    out.knot_exact_ = true;
    return out;
}

ComplexityCurve ComplexityCurve::concave_envelope(const Evaluator& raw, const std::vector<double>& knots, double cap) {
    if (knots.empty()) throw Error(ErrorKind::BadParams, "envelope needs knots");
    std::vector<double> xs{0.0};
    std::vector<double> ys;
    double running = 0.0;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (i > 0 && !(knots[i] > knots[i - 1])) throw Error(ErrorKind::BadParams, "envelope knots must increase");
        running = std::max(running, raw(knots[i]));
        if (i == 0) ys.push_back(running);
        xs.push_back(knots[i]);
        ys.push_back(running);
    }
    // Upper hull (monotone chain) of the anchored running maximum.
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2];
            const std::size_t b = hull.back();
            const double cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if (cross >= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }
    std::vector<double> hx;
    std::vector<double> hy;
    for (std::size_t i : hull) {
        hx.push_back(xs[i]);
        hy.push_back(ys[i]);
    }
    ComplexityCurve out(
        [hx, hy](double u) {
            if (u >= hx.back()) return hy.back();
            const auto i = static_cast<std::size_t>(std::upper_bound(hx.begin(), hx.end(), u) - hx.begin());
            const double w = (u - hx[i - 1]) / (hx[i] - hx[i - 1]);
            return hy[i - 1] + w * (hy[i] - hy[i - 1]);
        },
        Shape::ConcaveType, 0.0, cap);
    out.knots_.assign(hx.begin() + 1, hx.end());
    out.knot_exact_ = true;
    out.note_ = "concave upper envelope of the running maximum";
    return out;
}

double ComplexityCurve::operator()(double delta) const { return f_(std::min(delta, cap_)); }

ComplexityCurve ComplexityCurve::scaled(double a) const {
    if (!(a >= 0.0)) throw Error(ErrorKind::BadParams, "scale factor must be nonnegative");
    ComplexityCurve out = *this;
    auto f = f_;
    out.f_ = [f, a](double u) { return a * f(u); };
    return out;
}

ComplexityCurve ComplexityCurve::with_cap(double cap) const {
    if (!(cap > 0.0)) throw Error(ErrorKind::BadParams, "curve cap must be positive");
    ComplexityCurve out = *this;
    out.cap_ = cap;
    return out;
}

ComplexityCurve& ComplexityCurve::set_note(std::string note) {
    note_ = std::move(note);
    return *this;
}

namespace {
constexpr double kMaxGridPoints = 4096.0;
}

GeometricGrid::GeometricGrid(double q, int j_min, int j_max) : q_(q), j_min_(j_min), j_max_(j_max) {
    if (!(q > 1.0)) throw Error(ErrorKind::BadParams, "grid ratio q must exceed 1");
    if (j_min > j_max) throw Error(ErrorKind::EmptyGrid, "grid has no points");
}

GeometricGrid GeometricGrid::for_sample(double q, double n, double t) {
    if (!(n >= 1.0) || !(t > 0.0)) throw Error(ErrorKind::BadParams, "grid needs n >= 1 and t > 0");
    if (!(q > 1.0)) throw Error(ErrorKind::BadParams, "grid ratio q must exceed 1");
    const double top = std::log(std::max(n / t, 1.0)) / std::log(q);
    if (!(top <= kMaxGridPoints)) throw Error(ErrorKind::BadParams, "grid would have more than 4096 points");
    return GeometricGrid(q, -1, static_cast<int>(std::ceil(top - 1e-12)) + 2);
}

double GeometricGrid::point(int j) const { return std::pow(q_, -static_cast<double>(j)); }

std::vector<double> GeometricGrid::points() const {
    std::vector<double> out;
    out.reserve(size());
    for (int j = j_min_; j <= j_max_; ++j) out.push_back(point(j));
    return out;
}

std::optional<int> GeometricGrid::index_of(double delta, double rel_tol) const {
    if (!(delta > 0.0)) return std::nullopt;
    const int j = static_cast<int>(std::lround(-std::log(delta) / std::log(q_)));
    if (j < j_min_ || j > j_max_) return std::nullopt;
    if (std::abs(point(j) - delta) > rel_tol * delta) return std::nullopt;
    return j;
}

GridTable GridTable::sample(const GeometricGrid& grid, const std::function<double(double)>& f) {
    GridTable out{grid, {}};
    out.values.reserve(grid.size());
    for (int j = grid.j_min(); j <= grid.j_max(); ++j) out.values.push_back(f(grid.point(j)));
    return out;
}

void audit_shape(const ComplexityCurve& psi, double lo, double hi) {
    hi = std::min(hi, psi.cap());
    if (!(lo > 0.0) || !(hi >= lo)) return;
    std::vector<double> pts;
    for (double s = lo; s < hi; s *= kScanRatio) pts.push_back(s);
    pts.push_back(hi);
    for (double k : psi.knots())
        if (k > lo && k < hi) pts.push_back(k);
    std::sort(pts.begin(), pts.end());
    double prev_u = pts.front();
    double prev_v = checked(psi, prev_u);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double u = pts[i];
        const double v = checked(psi, u);
        if (v < prev_v - kShapeTolerance * prev_v)
            throw Error(ErrorKind::NonMonotoneCurve, "curve decreases near delta=" + std::to_string(u));
        if (psi.shape() == Shape::ConcaveType && v / u > (prev_v / prev_u) * (1.0 + kShapeTolerance) + kTiny)
            throw Error(ErrorKind::NonMonotoneCurve, "psi(u)/u increases near delta=" + std::to_string(u));
        if (psi.shape() == Shape::StrictlyConcaveType) {
            const double g = psi.gamma();
            if (v / std::pow(u, g) > (prev_v / std::pow(prev_u, g)) * (1.0 + kShapeTolerance) + kTiny)
                throw Error(ErrorKind::NonMonotoneCurve, "psi(u)/u^gamma increases near delta=" + std::to_string(u));
        }
        prev_u = u;
        prev_v = v;
    }
}

double flat(const ComplexityCurve& psi, double delta) {
    if (!(delta > 0.0)) throw Error(ErrorKind::BadParams, "flat needs delta > 0");
    const double top = std::isfinite(psi.cap()) ? psi.cap() : delta * 0x1.0p40;
    if (delta <= psi.cap()) audit_shape(psi, delta, top);
    return flat_unchecked(psi, delta);
}

double sharp(const ComplexityCurve& psi, double epsilon) {
    if (!(epsilon > 0.0)) throw Error(ErrorKind::BadParams, "sharp needs epsilon > 0");
    const double cap = psi.cap();
    double hi = std::min(1.0, cap);
    double lo = hi;
    if (flat_unchecked(psi, hi) <= epsilon) {
        // Walk down to a point that fails.
        while (true) {
            lo *= 0.5;
            if (lo < kTiny) {
                audit_shape(psi, kTiny, hi);
                return 0.0;
            }
            if (flat_unchecked(psi, lo) > epsilon) break;
            hi = lo;
        }
    } else {
        // Walk up to a point that qualifies.
        while (true) {
            lo = hi;
            hi *= 2.0;
            if (hi >= cap) {
                hi = cap;
                if (flat_unchecked(psi, hi) > epsilon) {
                    audit_shape(psi, lo, hi);
                    return kInfinity;
                }
                break;
            }
            if (hi > 1e300) return kInfinity;
            if (flat_unchecked(psi, hi) <= epsilon) break;
        }
    }
    audit_shape(psi, lo, std::isfinite(cap) ? std::max(hi, cap) : hi * 0x1.0p20);
    for (int it = 0; it < kBisectionSteps && hi > lo * (1.0 + 4e-16); ++it) {
        double mid = std::sqrt(lo * hi);
        if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        if (flat_unchecked(psi, mid) <= epsilon)
            hi = mid;
        else
            lo = mid;
    }
    if (psi.shape() != Shape::Arbitrary) {
        // Concave-type: the answer solves psi(delta) = epsilon delta; one fixed-point step from hi.
        const double polished = psi(hi) / epsilon;
        if (std::abs(polished - hi) <= 1e-14 * hi) return polished;
    }
    return hi;
}

double flat_q(const GridTable& table, double delta, bool restrict_unit) {
    const auto& g = table.grid;
    if (table.values.size() != g.size()) throw Error(ErrorKind::GridMismatch, "table size does not match its grid");
    double best = 0.0;
    for (int j = g.j_min(); j <= g.j_max(); ++j) {
        const double d = g.point(j);
        if (d < delta * (1.0 - 1e-12)) break;
        if (restrict_unit && j < 0) continue;
        best = std::max(best, table.at(j) / d);
    }
    return best;
}

double sharp_q(const GridTable& table, double epsilon, bool restrict_unit) {
    if (!(epsilon > 0.0)) throw Error(ErrorKind::BadParams, "sharp_q needs epsilon > 0");
    const auto& g = table.grid;
    if (table.values.size() != g.size()) throw Error(ErrorKind::GridMismatch, "table size does not match its grid");
    const int start = restrict_unit ? std::max(0, g.j_min()) : g.j_min();
    if (restrict_unit && (g.j_min() > 0 || g.j_max() < 0))
        throw Error(ErrorKind::BadParams, "restricted transform needs the unit point on the grid");
    // M_j = max_{i<=j} psi(delta_i)/delta_i is nondecreasing in j; the qualifying set
    // is the union of (delta_{j+1}, delta_j] over j <= J.
    double running = 0.0;
    int last = start - 1;
    for (int j = start; j <= g.j_max(); ++j) {
        running = std::max(running, table.at(j) / g.point(j));
        if (running > epsilon) break;
        last = j;
    }
    if (last < start) return restrict_unit ? 1.0 : kInfinity;
    if (last == g.j_max()) return 0.0;
    return g.point(last + 1);
}

double sharp_q(const ComplexityCurve& psi, double epsilon, const GeometricGrid& grid, bool restrict_unit) {
    return sharp_q(GridTable::sample(grid, [&](double d) { return checked(psi, d); }), epsilon, restrict_unit);
}

FixedPointResult fixed_point(const ComplexityCurve& psi, int max_iter, double tolerance) {
    if (psi.shape() != Shape::StrictlyConcaveType)
        throw Error(ErrorKind::BadParams, "fixed_point needs a strictly-concave-type curve");
    audit_shape(psi, 1e-12, 1.0);
    FixedPointResult out;
    // psi(d)/d is decreasing, so the fixed point is where the ratio crosses 1.
    if (checked(psi, 1.0) >= 1.0) {
        out.delta_bar = 1.0;
    } else {
        double hi = 1.0;
        double lo = 0.5;
        while (lo > kTiny && checked(psi, lo) / lo <= 1.0) {
            hi = lo;
            lo *= 0.5;
        }
        if (lo <= kTiny) {
            out.delta_bar = 0.0;
        } else {
            for (int it = 0; it < kBisectionSteps && hi > lo * (1.0 + 4e-16); ++it) {
                const double mid = std::sqrt(lo * hi);
                if (!(mid > lo && mid < hi)) break;
                if (checked(psi, mid) / mid <= 1.0)
                    hi = mid;
                else
                    lo = mid;
            }
            out.delta_bar = hi;
        }
    }
    double d = 1.0;
    out.iterates.push_back(d);
    for (int k = 0; k < max_iter; ++k) {
        if (std::abs(d - out.delta_bar) <= tolerance) break;
        const double next = std::min(checked(psi, d), 1.0);
        if (next > d * (1.0 + 1e-12))
            throw Error(ErrorKind::NotContractive, "fixed-point iterates increased");
        d = next;
        out.iterates.push_back(d);
    }
    return out;
}

double fixed_point_error_bound(double delta_bar, double gamma, int k) {
    const double gk = std::pow(gamma, k);
    return std::pow(delta_bar, 1.0 - gk) * std::pow(1.0 - delta_bar, gk);
}

double geometric_tail_sum(const ComplexityCurve& psi, double delta, const GeometricGrid& grid) {
    const auto j0 = grid.index_of(delta);
    if (!j0) throw Error(ErrorKind::OffGrid, "delta is not a grid point");
    double sum = 0.0;
    for (int j = grid.j_min(); j <= *j0; ++j) sum += checked(psi, grid.point(j)) / grid.point(j);
    return sum;
}

double tail_sum_constant(double gamma, double q) {
    if (!(gamma >= 0.0 && gamma < 1.0) || !(q > 1.0)) throw Error(ErrorKind::BadParams, "need gamma in [0,1), q > 1");
    return 1.0 / (1.0 - std::pow(q, -(1.0 - gamma)));
}

}  // namespace riskbound
