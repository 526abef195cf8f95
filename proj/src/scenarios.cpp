#include "riskbound/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "riskbound/error.hpp"

namespace riskbound {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre nodes and weights on [a, b].
struct Quadrature {
    std::vector<double> x;
    std::vector<double> w;
};

Quadrature gauss_legendre(std::size_t order, double a, double b) {
    Quadrature q;
    q.x.resize(order);
    q.w.resize(order);
    const std::size_t half = (order + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double z = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(order) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t k = 1; k <= order; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * static_cast<double>(k) - 1.0) * z * p1 - (static_cast<double>(k) - 1.0) * p2) /
                     static_cast<double>(k);
            }
            dp = static_cast<double>(order) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
        const double wt = 2.0 / ((1.0 - z * z) * dp * dp) * rad;
        q.x[i] = mid - rad * z;
        q.x[order - 1 - i] = mid + rad * z;
        q.w[i] = wt;
        q.w[order - 1 - i] = wt;
    }
    return q;
}

// Shifted orthonormal Legendre values e_0..e_{d-1} at x.
void basis_values(double x, std::size_t d, double* out) {
    const double s = 2.0 * x - 1.0;
    double pm = 1.0, p = s;
    for (std::size_t k = 0; k < d; ++k) {
        double pk;
        if (k == 0) {
            pk = 1.0;
        } else if (k == 1) {
            pk = s;
        } else {
            const double kk = static_cast<double>(k);
            const double next = ((2.0 * kk - 1.0) * s * p - (kk - 1.0) * pm) / kk;
            pm = p;
            p = next;
            pk = next;
        }
        out[k] = std::sqrt(2.0 * static_cast<double>(k) + 1.0) * pk;
    }
}

double poly(const std::vector<double>& c, double x) {
    double e[32];
    basis_values(x, c.size(), e);
    double g = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) g += c[k] * e[k];
    return g;
}

// Sufficient condition for lo <= sum c_k e_k <= hi on [0,1] (|e_k| <= sqrt(2k+1)).
bool poly_within(const std::vector<double>& c, double lo, double hi) {
    double spread = 0.0;
    for (std::size_t k = 1; k < c.size(); ++k) spread += std::abs(c[k]) * std::sqrt(2.0 * static_cast<double>(k) + 1.0);
    return c[0] - spread >= lo && c[0] + spread <= hi;
}

EvaluationMatrix select_columns(const EvaluationMatrix& mat, const std::vector<std::size_t>& idx) {
    const std::size_t n = mat.rows();
    std::vector<double> vals;
    vals.reserve(n * idx.size());
    for (std::size_t j : idx) vals.insert(vals.end(), mat.column(j), mat.column(j) + n);
    return EvaluationMatrix(n, idx.size(), std::move(vals), mat.binary());
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- cube

Scenario cube_scenario(std::size_t N) {
    if (N < 1) throw Error(ErrorKind::BadParams, "cube scenario needs N >= 1");
    const std::size_t dim = N + 1;
    Scenario sc;
    sc.name = "cube";
    sc.point_type = "binary vector of length N+1";
    std::vector<FunctionClass::Member> members;
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < dim; ++j) {
        members.emplace_back([j](const Point& p) { return p.x[j]; });
        labels.push_back("x" + std::to_string(j + 1));
    }
    sc.cls = FunctionClass(std::move(members), std::move(labels), true);
    sc.oracle.sampler = [dim](std::size_t n, Rng& rng) {
        Sample s;
        s.points.resize(n);
        for (auto& p : s.points) {
            p.x.resize(dim);
            std::uint64_t bits = 0;
            for (std::size_t j = 0; j < dim; ++j) {
                if (j % 64 == 0) bits = rng.engine()();
                p.x[j] = static_cast<double>((bits >> (j % 64)) & 1U);
            }
        }
        return s;
    };
    sc.oracle.true_risk = [](std::size_t) { return 0.5; };
    sc.oracle.second_moment = [](std::size_t j, std::size_t k) { return j == k ? 0.0 : 0.5; };
    sc.oracle.accuracy = 0.0;
    sc.fast_risks = [dim](const Sample& s) {
        std::vector<double> r(dim, 0.0);
        for (const auto& p : s.points)
            for (std::size_t j = 0; j < dim; ++j) r[j] += p.x[j];
        for (auto& v : r) v /= static_cast<double>(s.size());
        return r;
    };
    sc.truth = {{"N", static_cast<double>(N)}, {"risk", 0.5}, {"excess", 0.0}};
    return sc;
}

// ---------------------------------------------------------------- Tsybakov

std::size_t tsybakov_cells(double kappa, double rho, std::size_t n) {
    if (!(kappa >= 1.0) || !(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::BadParams, "need kappa >= 1, rho in (0,1)");
    const double a = rho / (2.0 * kappa + rho - 1.0);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), a))));
}

namespace {

struct TsybakovModel {
    double kappa, h;
    std::size_t cells, L;
    double w;

    double midpoint(std::size_t c) const { return (static_cast<double>(c) + 0.5) * w; }
    std::size_t cell_of(double x) const {
        return std::min(static_cast<std::size_t>(x / w), cells - 1);
    }
    double eta(double x) const {
        const double m = midpoint(cell_of(x));
        const double s = x - m;
        if (s == 0.0) return 0.0;
        const double mag = kappa == 1.0 ? h : h * std::pow(std::abs(s) / (0.5 * w), kappa - 1.0);
        return s > 0.0 ? mag : -mag;
    }
    double threshold(std::size_t c, std::size_t i) const {
        return midpoint(c) + 0.5 * w * (static_cast<double>(i) - static_cast<double>(L)) / static_cast<double>(L);
    }
    // Excess risk of threshold theta inside cell c.
    double cell_excess(std::size_t c, double theta) const {
        const double s = std::abs(theta - midpoint(c));
        return h * std::pow(s, kappa) / (kappa * std::pow(0.5 * w, kappa - 1.0));
    }
    double bayes_risk() const { return 0.5 - h / (2.0 * kappa); }

    // Empirical error counts of every grid threshold in cell c, given the cell's points sorted by x.
    std::vector<double> cell_errors(std::size_t c, const std::vector<std::pair<double, double>>& pts) const {
        std::vector<double> errors(2 * L + 1);
        double cur = 0.0;
        for (const auto& pt : pts) cur += pt.second == 0.0 ? 1.0 : 0.0;  // theta below every point
        std::size_t next = 0;
        for (std::size_t i = 0; i <= 2 * L; ++i) {
            const double th = threshold(c, i);
            while (next < pts.size() && pts[next].first < th) {
                cur += pts[next].second == 1.0 ? 1.0 : -1.0;
                ++next;
            }
            errors[i] = cur;
        }
        return errors;
    }

    std::vector<std::vector<std::pair<double, double>>> bucket(const Sample& s) const {
        std::vector<std::vector<std::pair<double, double>>> b(cells);
        for (const auto& p : s.points) b[cell_of(p.x[0])].emplace_back(p.x[0], p.y);
        for (auto& v : b) std::sort(v.begin(), v.end());
        return b;
    }
};

}  // namespace

Scenario tsybakov_scenario(const TsybakovParams& prm) {
    if (!(prm.kappa >= 1.0) || !(prm.rho > 0.0 && prm.rho < 1.0))
        throw Error(ErrorKind::BadParams, "need kappa >= 1 and rho in (0,1)");
    if (!(prm.h > 0.0 && prm.h <= 1.0)) throw Error(ErrorKind::BadParams, "h must lie in (0,1]");
    if (prm.cells < 1 || prm.half_grid < 1) throw Error(ErrorKind::BadParams, "need cells >= 1 and half_grid >= 1");
    const TsybakovModel model{prm.kappa, prm.h, prm.cells, prm.half_grid, 1.0 / static_cast<double>(prm.cells)};

    Scenario sc;
    sc.name = "tsybakov";
    sc.point_type = "x in [0,1], label in {0,1}";
    sc.oracle.sampler = [model](std::size_t n, Rng& rng) {
        Sample s;
        s.points.resize(n);
        for (auto& p : s.points) {
            const double x = rng.uniform();
            p.x = {x};
            p.y = rng.bernoulli(0.5 * (1.0 + model.eta(x))) ? 1.0 : 0.0;
        }
        return s;
    };
    sc.erm_excess = [model](const Sample& s) {
        const auto b = model.bucket(s);
        double excess = 0.0;
        for (std::size_t c = 0; c < model.cells; ++c) {
            const auto err = model.cell_errors(c, b[c]);
            const std::size_t best =
                static_cast<std::size_t>(std::min_element(err.begin(), err.end()) - err.begin());
            excess += model.cell_excess(c, model.threshold(c, best));
        }
        return excess;
    };
    if (prm.cells == 1) {
        const std::size_t m = 2 * prm.half_grid + 1;
        std::vector<FunctionClass::Member> members;
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < m; ++i) {
            const double th = model.threshold(0, i);
            members.emplace_back([th](const Point& p) {
                const double pred = p.x[0] >= th ? 1.0 : 0.0;
                return pred == p.y ? 0.0 : 1.0;
            });
            labels.push_back("theta=" + fmt(th));
        }
        sc.cls = FunctionClass(std::move(members), std::move(labels), true);
        sc.oracle.true_risk = [model](std::size_t j) {
            return model.bayes_risk() + model.cell_excess(0, model.threshold(0, j));
        };
        sc.oracle.second_moment = [model](std::size_t j, std::size_t k) {
            return std::abs(model.threshold(0, j) - model.threshold(0, k));
        };
        sc.fast_risks = [model](const Sample& s) {
            const auto b = model.bucket(s);
            auto err = model.cell_errors(0, b[0]);
            for (auto& e : err) e /= static_cast<double>(s.size());
            return err;
        };
    } else {
        sc.oracle.true_risk = [](std::size_t) -> double {
            throw Error(ErrorKind::OracleUnavailable, "multi-cell Tsybakov class is not enumerated");
        };
        sc.oracle.second_moment = [](std::size_t, std::size_t) -> double {
            throw Error(ErrorKind::OracleUnavailable, "multi-cell Tsybakov class is not enumerated");
        };
    }
    const double beta = prm.kappa / (2.0 * prm.kappa + prm.rho - 1.0);
    sc.truth = {{"kappa", prm.kappa},
                {"rho", prm.rho},
                {"h", prm.h},
                {"cells", static_cast<double>(prm.cells)},
                {"beta", beta},
                {"expected_slope", -beta},
                {"alpha", prm.kappa > 1.0 ? 1.0 / (prm.kappa - 1.0) : kInfinity},
                {"bayes_risk", model.bayes_risk()}};
    return sc;
}

Scenario tsybakov_rate_scenario(double kappa, double rho, std::size_t n, double h) {
    TsybakovParams prm;
    prm.kappa = kappa;
    prm.rho = rho;
    prm.h = h;
    prm.cells = tsybakov_cells(kappa, rho, n);
    const double w = 1.0 / static_cast<double>(prm.cells);
    prm.half_grid = static_cast<std::size_t>(std::ceil(2.0 * static_cast<double>(n) * w));
    return tsybakov_scenario(prm);
}

// ---------------------------------------------------------------- regression

double legendre_basis(std::size_t k, double x) {
    if (k >= 32) throw Error(ErrorKind::BadParams, "basis index too large");
    double e[32];
    basis_values(x, k + 1, e);
    return e[k];
}

double regression_pitch(std::size_t n) {
    return 0.5 * std::sqrt(kRegressionNoiseVariance) / std::sqrt(static_cast<double>(n));
}

std::vector<std::vector<double>> regression_coefficients(const RegressionParams& prm) {
    const std::size_t d = prm.g_star.size();
    const std::size_t active = prm.active == 0 ? d : prm.active;
    std::vector<double> center = prm.center.empty() ? prm.g_star : prm.center;
    if (center.size() != d) throw Error(ErrorKind::BadParams, "center and g* differ in length");
    if (active > d || prm.half_width < 0 || !(prm.pitch > 0.0)) throw Error(ErrorKind::BadParams, "bad net");
    const int side = 2 * prm.half_width + 1;
    std::size_t total = 1;
    for (std::size_t k = 0; k < active; ++k) total *= static_cast<std::size_t>(side);
    std::vector<std::vector<double>> out;
    for (std::size_t code = 0; code < total; ++code) {
        std::vector<double> c = center;
        std::size_t rest = code;
        for (std::size_t k = active; k-- > 0;) {
            const int z = static_cast<int>(rest % static_cast<std::size_t>(side)) - prm.half_width;
            rest /= static_cast<std::size_t>(side);
            c[k] = center[k] + prm.pitch * z;
        }
        if (poly_within(c, 0.0, 1.0)) out.push_back(std::move(c));
    }
    if (out.empty()) throw Error(ErrorKind::BadParams, "no net member maps into [0,1]");
    return out;
}

double regression_risk_quadrature(const std::vector<double>& g_star, const std::vector<double>& coef) {
    static const Quadrature qx = gauss_legendre(40, 0.0, 1.0);
    static const Quadrature qu = gauss_legendre(40, -0.25, 0.25);
    double total = 0.0;
    for (std::size_t a = 0; a < qx.x.size(); ++a) {
        const double gs = poly(g_star, qx.x[a]);
        const double g = poly(coef, qx.x[a]);
        double inner = 0.0;
        for (std::size_t b = 0; b < qu.x.size(); ++b) {
            const double y = std::clamp(gs + qu.x[b], 0.0, 1.0);
            inner += qu.w[b] * 2.0 * (y - g) * (y - g);  // density of U is 2
        }
        total += qx.w[a] * inner;
    }
    return total;
}

Scenario finite_dim_regression(const RegressionParams& prm) {
    const std::size_t d = prm.g_star.size();
    if (d < 1 || d > 16) throw Error(ErrorKind::BadParams, "dimension must lie in [1,16]");
    if (!poly_within(prm.g_star, 0.25, 0.75))
        throw Error(ErrorKind::BadParams, "g* must stay in [1/4, 3/4] so that the noise never clips");
    const auto coefs = regression_coefficients(prm);
    const std::size_t m = coefs.size();
    const std::vector<double> gs = prm.g_star;

    Scenario sc;
    sc.name = "finite_dim";
    sc.point_type = "x in [0,1], y in [0,1]";
    std::vector<FunctionClass::Member> members;
    std::vector<std::string> labels;
    for (const auto& c : coefs) {
        members.emplace_back([c](const Point& p) {
            const double r = p.y - poly(c, p.x[0]);
            return r * r;
        });
        std::string lab = "c=(";
        for (std::size_t k = 0; k < d; ++k) lab += (k ? "," : "") + fmt(c[k]);
        labels.push_back(lab + ")");
    }
    sc.cls = FunctionClass(std::move(members), std::move(labels));

    sc.oracle.sampler = [gs](std::size_t n, Rng& rng) {
        Sample s;
        s.points.resize(n);
        for (auto& p : s.points) {
            const double x = rng.uniform();
            const double u = rng.uniform(-0.25, 0.25);
            p.x = {x};
            p.y = std::clamp(poly(gs, x) + u, 0.0, 1.0);
        }
        return s;
    };
    auto shared = std::make_shared<const std::vector<std::vector<double>>>(coefs);
    sc.oracle.true_risk = [shared, gs](std::size_t j) {
        const auto& c = shared->at(j);
        double dist = 0.0;
        for (std::size_t k = 0; k < gs.size(); ++k) dist += (c[k] - gs[k]) * (c[k] - gs[k]);
        return kRegressionNoiseVariance + dist;
    };
    // P(f_j - f_k)^2 = E (g_k - g_j)^2 [(2 g* - g_j - g_k)^2 + 4 Var U] by Gauss-Legendre in x.
    auto nodes = std::make_shared<Quadrature>(gauss_legendre(24, 0.0, 1.0));
    auto gvals = std::make_shared<std::vector<std::vector<double>>>(m, std::vector<double>(nodes->x.size()));
    auto gstar = std::make_shared<std::vector<double>>(nodes->x.size());
    for (std::size_t a = 0; a < nodes->x.size(); ++a) {
        (*gstar)[a] = poly(gs, nodes->x[a]);
        for (std::size_t j = 0; j < m; ++j) (*gvals)[j][a] = poly(coefs[j], nodes->x[a]);
    }
    sc.oracle.second_moment = [nodes, gvals, gstar](std::size_t j, std::size_t k) {
        double s = 0.0;
        for (std::size_t a = 0; a < nodes->x.size(); ++a) {
            const double gj = (*gvals)[j][a], gk = (*gvals)[k][a];
            const double mix = 2.0 * (*gstar)[a] - gj - gk;
            s += nodes->w[a] * (gk - gj) * (gk - gj) * (mix * mix + 4.0 * kRegressionNoiseVariance);
        }
        return s;
    };
    sc.oracle.accuracy = 1e-12;
    // P_n (y - c.e)^2 = S_yy - 2 c.S_ye + c' S_ee c.
    sc.fast_risks = [shared, d](const Sample& s) {
        double syy = 0.0;
        std::vector<double> sye(d, 0.0), see(d * d, 0.0);
        double e[32];
        for (const auto& p : s.points) {
            basis_values(p.x[0], d, e);
            syy += p.y * p.y;
            for (std::size_t a = 0; a < d; ++a) {
                sye[a] += p.y * e[a];
                for (std::size_t b = 0; b < d; ++b) see[a * d + b] += e[a] * e[b];
            }
        }
        const double inv = 1.0 / static_cast<double>(s.size());
        std::vector<double> out;
        out.reserve(shared->size());
        for (const auto& c : *shared) {
            double v = syy;
            for (std::size_t a = 0; a < d; ++a) {
                v -= 2.0 * c[a] * sye[a];
                for (std::size_t b = 0; b < d; ++b) v += c[a] * see[a * d + b] * c[b];
            }
            out.push_back(v * inv);
        }
        return out;
    };
    sc.truth = {{"d", static_cast<double>(prm.active == 0 ? d : prm.active)},
                {"rate_exponent", 1.0},
                {"expected_slope", -1.0},
                {"noise_variance", kRegressionNoiseVariance},
                {"bayes_risk", kRegressionNoiseVariance},
                {"pitch", prm.pitch}};
    return sc;
}

Scenario finite_dim_regression(std::size_t d, std::size_t n, int half_width) {
    RegressionParams prm;
    const std::vector<double> base{0.5, 0.05, 0.03, 0.02, 0.01, 0.01, 0.01, 0.01};
    if (d < 1 || d > base.size()) throw Error(ErrorKind::BadParams, "d must lie in [1,8]");
    prm.g_star.assign(base.begin(), base.begin() + static_cast<std::ptrdiff_t>(d));
    prm.pitch = regression_pitch(n);
    prm.half_width = half_width;
    return finite_dim_regression(prm);
}

// ---------------------------------------------------------------- generic helpers

Scenario finite_support_scenario(std::size_t support, std::size_t members, std::uint64_t seed) {
    if (support < 1 || members < 1) throw Error(ErrorKind::BadParams, "support and members must be positive");
    Rng rng(seed);
    auto table = std::make_shared<std::vector<std::vector<double>>>(members, std::vector<double>(support));
    for (auto& row : *table)
        for (auto& v : row) v = rng.uniform();
    Scenario sc;
    sc.name = "finite_support";
    sc.point_type = "x in {0..support-1}";
    std::vector<FunctionClass::Member> ms;
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < members; ++j) {
        ms.emplace_back([table, j](const Point& p) { return (*table)[j][static_cast<std::size_t>(p.x[0])]; });
        labels.push_back("f" + std::to_string(j + 1));
    }
    sc.cls = FunctionClass(std::move(ms), std::move(labels));
    sc.oracle.sampler = [support](std::size_t n, Rng& r) {
        Sample s;
        s.points.resize(n);
        for (auto& p : s.points) p.x = {static_cast<double>(r.index(support))};
        return s;
    };
    const double inv = 1.0 / static_cast<double>(support);
    sc.oracle.true_risk = [table, inv](std::size_t j) {
        double s = 0.0;
        for (double v : (*table)[j]) s += v;
        return s * inv;
    };
    sc.oracle.second_moment = [table, inv](std::size_t j, std::size_t k) {
        double s = 0.0;
        for (std::size_t x = 0; x < (*table)[j].size(); ++x) {
            const double dd = (*table)[j][x] - (*table)[k][x];
            s += dd * dd;
        }
        return s * inv;
    };
    sc.truth = {{"support", static_cast<double>(support)}, {"members", static_cast<double>(members)}};
    return sc;
}

std::vector<MeanStderr> monte_carlo_risks(const Scenario& sc, const std::vector<std::size_t>& members,
                                          std::size_t draws, std::uint64_t seed) {
    const std::size_t chunk = 1U << 16;
    const std::size_t chunks = (draws + chunk - 1) / chunk;
    std::vector<std::vector<double>> sum(chunks, std::vector<double>(members.size(), 0.0));
    std::vector<std::vector<double>> sumsq = sum;
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t size = std::min(chunk, draws - c * chunk);
        const Sample s = sc.oracle.draw(size, derive_seed(seed, c));
        for (std::size_t a = 0; a < members.size(); ++a)
            for (const auto& p : s.points) {
                const double v = sc.cls(members[a], p);
                sum[c][a] += v;
                sumsq[c][a] += v * v;
            }
    });
    std::vector<MeanStderr> out(members.size());
    const double N = static_cast<double>(draws);
    for (std::size_t a = 0; a < members.size(); ++a) {
        double s = 0.0, ss = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) {
            s += sum[c][a];
            ss += sumsq[c][a];
        }
        const double mean = s / N;
        const double var = std::max(ss / N - mean * mean, 0.0) * N / std::max(N - 1.0, 1.0);
        out[a] = {mean, std::sqrt(var / N)};
    }
    return out;
}

FunctionClass subset(const FunctionClass& cls, const std::vector<std::size_t>& idx) {
    std::vector<FunctionClass::Member> ms;
    std::vector<std::string> labels;
    for (std::size_t j : idx) {
        ms.push_back(cls.member(j));
        labels.push_back(cls.label(j));
    }
    return FunctionClass(std::move(ms), std::move(labels), cls.binary());
}

OracleDistribution restrict_oracle(const OracleDistribution& oracle, std::vector<std::size_t> idx) {
    OracleDistribution o = oracle;
    auto shared = std::make_shared<const std::vector<std::size_t>>(std::move(idx));
    auto risk = oracle.true_risk;
    auto moment = oracle.second_moment;
    o.true_risk = [risk, shared](std::size_t j) { return risk(shared->at(j)); };
    o.second_moment = [moment, shared](std::size_t j, std::size_t k) { return moment(shared->at(j), shared->at(k)); };
    return o;
}

Scenario restrict_scenario(const Scenario& sc, const std::vector<std::size_t>& idx) {
    Scenario out;
    out.name = sc.name;
    out.point_type = sc.point_type;
    out.truth = sc.truth;
    out.cls = subset(sc.cls, idx);
    out.oracle = restrict_oracle(sc.oracle, idx);
    if (sc.fast_risks) {
        auto fr = sc.fast_risks;
        out.fast_risks = [fr, idx](const Sample& s) {
            const auto all = fr(s);
            std::vector<double> r;
            r.reserve(idx.size());
            for (std::size_t j : idx) r.push_back(all[j]);
            return r;
        };
    }
    return out;
}

NestedScenario nested_regression(std::size_t models, int half_width, double t, std::vector<double> g_star) {
    if (models < 2) throw Error(ErrorKind::BadParams, "need at least two models");
    if (g_star.size() != 2 || !(g_star[1] > 0.0)) throw Error(ErrorKind::BadParams, "g* must be (c0, c1) with c1 > 0");
    if (half_width < 1) throw Error(ErrorKind::BadParams, "half_width must be at least 1");
    RegressionParams prm;
    prm.g_star.assign(models, 0.0);
    prm.g_star[0] = g_star[0];
    prm.g_star[1] = g_star[1];
    prm.center.assign(models, 0.0);
    prm.center[0] = g_star[0];
    prm.pitch = g_star[1];
    prm.half_width = half_width;
    NestedScenario ns;
    ns.full = finite_dim_regression(prm);
    ns.full.name = "nested_regression";
    const auto coefs = regression_coefficients(prm);
    for (std::size_t k = 1; k <= models; ++k) {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < coefs.size(); ++j) {
            bool inside = true;
            for (std::size_t i = k; i < models; ++i) inside = inside && coefs[j][i] == 0.0;
            if (inside) idx.push_back(j);
        }
        ns.family.classes.push_back(subset(ns.full.cls, idx));
        ns.family.t.push_back(t);
        ns.index.push_back(std::move(idx));
        ns.dims.push_back(static_cast<double>(k));
    }
    ns.family.nested = true;
    ns.family.validate();
    const auto risks = ns.full.risks();
    const double best = *std::min_element(risks.begin(), risks.end());
    for (std::size_t k = 0; k < models; ++k) {
        double mk = kInfinity;
        for (std::size_t j : ns.index[k]) mk = std::min(mk, risks[j]);
        if (mk <= best + ns.full.oracle.accuracy) {
            ns.k_star = k + 1;
            break;
        }
    }
    return ns;
}

// ---------------------------------------------------------------- experiments

void ExperimentPlan::validate() const {
    if (n_sweep.empty()) throw Error(ErrorKind::BadParams, "empty n sweep");
    for (std::size_t i = 1; i < n_sweep.size(); ++i)
        if (n_sweep[i] <= n_sweep[i - 1]) throw Error(ErrorKind::BadParams, "n sweep must be strictly increasing");
    if (n_sweep.front() < 1) throw Error(ErrorKind::BadParams, "sample sizes must be positive");
    if (replicates < 2) throw Error(ErrorKind::BadParams, "need at least two replicates");
    if (!(t > 0.0)) throw Error(ErrorKind::BadParams, "t must be positive");
}

SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t k = x.size();
    if (k < 2 || y.size() != k) throw Error(ErrorKind::BadParams, "slope fit needs two or more points");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(k);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (k > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            rss += r * r;
        }
        const double dof = static_cast<double>(k - 2);
        const boost::math::students_t dist(dof);
        f.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * std::sqrt(rss / dof / sxx);
    } else {
        f.half_width = kInfinity;
    }
    return f;
}

double erm_excess(const Scenario& sc, const Sample& sample) {
    if (sc.erm_excess) return sc.erm_excess(sample);
    const auto emp = sc.empirical(sample);
    const auto risks = sc.risks();
    const std::size_t j = best_index(emp);
    return risks[j] - *std::min_element(risks.begin(), risks.end());
}

RateReport run_rate_experiment(const ScenarioFactory& factory, const ExperimentPlan& plan, const RateMethod& method,
                               std::string method_name) {
    plan.validate();
    RateReport rep;
    rep.method = std::move(method_name);
    rep.n = plan.n_sweep;
    for (std::size_t a = 0; a < plan.n_sweep.size(); ++a) {
        const std::size_t n = plan.n_sweep[a];
        const Scenario sc = factory(n);
        if (a == 0) {
            rep.scenario = sc.name;
            rep.truth = sc.truth;
        }
        std::vector<double> ex(plan.replicates);
        parallel_for(plan.replicates, [&](std::size_t r) {
            const Sample s = sc.oracle.draw(n, derive_seed(plan.seed, a, r));
            ex[r] = method(sc, s);
        });
        const auto ms = mean_stderr(ex);
        rep.mean.push_back(ms.mean);
        rep.stderr_.push_back(ms.stderr_);
        rep.excess.push_back(std::move(ex));
    }
    const std::size_t k = rep.n.size();
    const std::size_t start = k / 2;
    rep.fit_start = start;
    std::vector<double> lx, ly;
    for (std::size_t a = start; a < k; ++a) {
        if (!(rep.mean[a] > 0.0)) {
            rep.degenerate = true;
            break;
        }
        lx.push_back(std::log(static_cast<double>(rep.n[a])));
        ly.push_back(std::log(rep.mean[a]));
    }
    if (lx.size() < 2) rep.degenerate = true;
    if (rep.degenerate) {
        rep.slope = std::nan("");
        rep.intercept = std::nan("");
        rep.ci = std::nan("");
    } else {
        const auto fit = fit_slope(lx, ly);
        rep.slope = fit.slope;
        rep.intercept = fit.intercept;
        rep.ci = fit.half_width;
    }
    return rep;
}

OracleProfiles oracle_profiles(const Scenario& sc, std::size_t n, std::size_t replicates, std::uint64_t seed,
                               MetricKind kind) {
    OracleProfiles out;
    const std::size_t m = sc.cls.size();
    out.risks = sc.risks();
    out.excess = excess_from_risks(out.risks);
    out.phi = phi_n_profile([&sc](const Sample& s) { return sc.empirical(s); }, m, sc.oracle, n, replicates, seed);
    out.D = diameter_profile(out.phi, MetricTable::from_oracle(sc.oracle, m, kind));
    return out;
}

EmpiricalProfiles empirical_profiles(const EvaluationMatrix& matrix, std::size_t sign_draws, std::uint64_t seed,
                                     MetricKind kind) {
    EmpiricalProfiles out;
    out.phi_hat = phi_hat_profile(matrix, make_signs(matrix.rows(), seed, sign_draws));
    out.D_hat = diameter_profile(out.phi_hat, MetricTable::empirical(matrix, kind));
    out.risk = erm(matrix);
    return out;
}

Prop2Report run_prop2_experiment(const std::vector<std::size_t>& N_list, std::size_t n, double t, std::size_t trials,
                                 std::uint64_t seed, std::size_t phi_replicates, double q) {
    if (N_list.empty() || trials < 1) throw Error(ErrorKind::BadParams, "need N values and trials");
    Prop2Report rep;
    rep.n = n;
    rep.t = t;
    rep.trials = trials;
    BoundConstants consts;
    consts.q = q;
    consts.t = t;
    for (std::size_t a = 0; a < N_list.size(); ++a) {
        const std::size_t N = N_list[a];
        const Scenario sc = cube_scenario(N);
        Prop2Row row;
        row.N = N;
        const OracleProfiles prof = oracle_profiles(sc, n, phi_replicates, derive_seed(seed, 1, N));
        row.phi_max = prof.phi.values.back();
        for (double e : prof.excess) row.min_excess_members += e == 0.0 ? 1 : 0;
        BoundInputs in{prof.phi, prof.D, std::nullopt, std::nullopt, static_cast<double>(n)};
        row.delta_n = delta_family(in, consts).delta_n;
        const double sigma = std::min(1.0, t / static_cast<double>(n));
        row.delta_check =
            geometric_bound(sc.cls, sc.oracle, sigma, consts, n, 8, derive_seed(seed, 2, N)).delta_check;
        row.threshold = 0.25 * std::sqrt(std::log(static_cast<double>(N)) / static_cast<double>(n));
        std::vector<double> miss(trials);
        parallel_for(trials, [&](std::size_t r) {
            const Sample s = sc.oracle.draw(n, derive_seed(seed, 3, N, r));
            const auto emp = sc.empirical(s);
            const auto [lo, hi] = std::minmax_element(emp.begin(), emp.end());
            miss[r] = (*hi - *lo > row.threshold) ? 1.0 : 0.0;
        });
        const auto ms = mean_stderr(miss);
        row.non_inclusion = ms.mean;
        row.non_inclusion_stderr = ms.stderr_;
        rep.rows.push_back(row);
    }
    rep.delta_monotone = true;
    rep.frequency_monotone = true;
    for (std::size_t a = 1; a < rep.rows.size(); ++a) {
        rep.delta_monotone = rep.delta_monotone && rep.rows[a].delta_n >= rep.rows[a - 1].delta_n;
        rep.frequency_monotone = rep.frequency_monotone && rep.rows[a].non_inclusion >= rep.rows[a - 1].non_inclusion;
    }
    return rep;
}

OrderingReport run_ordering_experiment(const Scenario& sc, std::size_t n, const BoundConstants& consts,
                                       std::size_t trials, std::uint64_t seed, std::size_t phi_replicates,
                                       std::size_t sign_draws) {
    consts.validate();
    if (trials < 1) throw Error(ErrorKind::BadParams, "need at least one trial");
    const OracleProfiles prof = oracle_profiles(sc, n, phi_replicates, derive_seed(seed, 1));
    OrderingReport rep;
    rep.n = n;
    rep.trials = trials;
    std::size_t ordered = 0;
    for (std::size_t r = 0; r < trials; ++r) {
        const Sample s = sc.oracle.draw(n, derive_seed(seed, 2, r));
        const EvaluationMatrix mat = evaluate(sc.cls, s);
        const EmpiricalProfiles emp = empirical_profiles(mat, sign_draws, derive_seed(seed, 3, r));
        BoundInputs in{prof.phi, prof.D, emp.phi_hat, emp.D_hat, static_cast<double>(n)};
        BoundReport br = delta_family(in, consts);
        rep.delta_bar = br.delta_bar;
        rep.delta_tilde = br.delta_tilde;
        const double dh = *br.delta_hat;
        rep.delta_hat.push_back(dh);
        if (br.delta_bar <= dh && dh <= br.delta_tilde) ++ordered;
        if (r == 0) rep.example = std::move(br);
    }
    rep.frequency = static_cast<double>(ordered) / static_cast<double>(trials);
    return rep;
}

CoverageReport run_coverage_experiment(const Scenario& sc, std::size_t n, const BoundConstants& consts,
                                       std::size_t trials, std::uint64_t seed, std::size_t phi_replicates) {
    consts.validate();
    if (trials < 1) throw Error(ErrorKind::BadParams, "need at least one trial");
    const OracleProfiles prof = oracle_profiles(sc, n, phi_replicates, derive_seed(seed, 1));
    BoundInputs in{prof.phi, prof.D, std::nullopt, std::nullopt, static_cast<double>(n)};
    CoverageReport rep;
    rep.n = n;
    rep.trials = trials;
    rep.t = consts.t;
    rep.delta_n = delta_family(in, consts).delta_n;
    rep.excess.resize(trials);
    const double best = *std::min_element(prof.risks.begin(), prof.risks.end());
    parallel_for(trials, [&](std::size_t r) {
        const Sample s = sc.oracle.draw(n, derive_seed(seed, 2, r));
        const auto emp = sc.empirical(s);
        rep.excess[r] = prof.risks[best_index(emp)] - best;
    });
    std::size_t above = 0;
    for (double e : rep.excess) above += e > rep.delta_n + sc.oracle.accuracy ? 1 : 0;
    rep.frequency = static_cast<double>(above) / static_cast<double>(trials);
    const double nn = static_cast<double>(n);
    rep.budget = std::log(consts.q * nn / consts.t) / std::log(consts.q) * std::exp(-consts.t);
    const double p = std::min(rep.budget, 1.0);
    rep.stderr_ = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    return rep;
}

SelectionInputs selection_inputs(const NestedScenario& ns, const Sample& sample, const BoundConstants& consts,
                                 std::size_t sign_draws, std::uint64_t seed) {
    const std::size_t M = ns.family.size();
    const EvaluationMatrix full = evaluate(ns.full.cls, sample);
    SelectionInputs in;
    in.delta_hat.resize(M);
    in.mins.resize(M);
    in.erm_member.resize(M);
    for (std::size_t k = 0; k < M; ++k) {
        in.matrices.push_back(select_columns(full, ns.index[k]));
        const EmpiricalProfiles emp = empirical_profiles(in.matrices[k], sign_draws, derive_seed(seed, k));
        BoundConstants ck = consts;
        ck.t = ns.family.t[k];
        in.delta_hat[k] = delta_hat(emp.phi_hat, emp.D_hat, ck, static_cast<double>(sample.size()));
        in.mins[k] = emp.risk.empirical_risks[emp.risk.erm_index];
        in.erm_member[k] = ns.index[k][emp.risk.erm_index];
    }
    return in;
}

SelectionReport run_selection_experiment(const NestedScenario& ns, std::size_t n, const SelectionSettings& set,
                                         std::size_t trials, std::uint64_t seed) {
    set.consts.validate();
    const std::size_t M = ns.family.size();
    const auto risks = ns.full.risks();
    const double best = *std::min_element(risks.begin(), risks.end());
    SelectionReport rep;
    rep.n = n;
    rep.k_star = ns.k_star;

    OracleSide oracle;
    std::vector<Scenario> models;
    for (std::size_t k = 0; k < M; ++k) {
        models.push_back(restrict_scenario(ns.full, ns.index[k]));
        double mk = kInfinity;
        for (std::size_t j : ns.index[k]) mk = std::min(mk, risks[j]);
        oracle.true_mins.push_back(mk);
        BoundConstants ck = set.consts;
        ck.t = ns.family.t[k];
        const OracleProfiles prof = oracle_profiles(models[k], n, set.phi_replicates, derive_seed(seed, 1, k));
        const BoundReport br =
            delta_family({prof.phi, prof.D, std::nullopt, std::nullopt, static_cast<double>(n)}, ck);
        oracle.delta_bar.push_back(br.delta_bar);
        oracle.delta_tilde.push_back(br.delta_tilde);
        rep.pi_tilde.push_back(v1_value(set.K_tilde, br.delta_tilde, mk, ck.t, static_cast<double>(n)));
    }
    rep.delta_bar = oracle.delta_bar;
    rep.delta_tilde = oracle.delta_tilde;
    const std::size_t ks = ns.k_star - 1;
    const double approx = oracle.true_mins[ks] - best;
    double dt_star = 0.0;
    for (std::size_t j = 0; j <= ks; ++j) dt_star = std::max(dt_star, oracle.delta_tilde[j]);
    const double ref_pen = approx + rep.pi_tilde[ks];

    std::size_t pen_ok = 0, cmp_ok = 0, below = 0, chain = 0;
    for (std::size_t r = 0; r < trials; ++r) {
        const Sample s = ns.full.oracle.draw(n, derive_seed(seed, 2, r));
        const SelectionInputs in = selection_inputs(ns, s, set.consts, set.sign_draws, derive_seed(seed, 3, r));
        const auto& dhat = in.delta_hat;
        const auto& mins = in.mins;
        const auto& erm_member = in.erm_member;
        SelectionTrial tr;
        const Penalties pen = penalty_v1(ns.family, dhat, mins, static_cast<double>(n), set.K_hat, &oracle, set.K_tilde);
        const SelectionResult sp = select_penalized(ns.family, pen, mins, "v1");
        tr.k_pen = sp.k_hat;
        tr.excess_pen = risks[erm_member[sp.k_hat - 1]] - best;
        tr.bound_pen = set.C_penalized * ref_pen;
        const SelectionResult sc = select_comparison(ns.family, dhat, mins, set.comparison, &oracle,
                                                     ns.full.oracle.accuracy);
        tr.k_cmp = sc.k_hat;
        tr.excess_cmp = risks[erm_member[sc.k_hat - 1]] - best;
        tr.bound_cmp = set.C_comparison * dt_star;
        tr.k_bar = static_cast<std::size_t>(sc.diagnostics.at("k_bar"));
        tr.k_tilde = static_cast<std::size_t>(sc.diagnostics.at("k_tilde"));
        const double acc = ns.full.oracle.accuracy;
        pen_ok += tr.excess_pen <= tr.bound_pen + acc ? 1 : 0;
        cmp_ok += tr.excess_cmp <= tr.bound_cmp + acc ? 1 : 0;
        below += tr.k_cmp <= ns.k_star ? 1 : 0;
        chain += (tr.k_tilde <= tr.k_cmp && tr.k_cmp <= tr.k_bar && tr.k_bar <= ns.k_star) ? 1 : 0;
        rep.ratio_pen.push_back(ref_pen > 0.0 ? tr.excess_pen / ref_pen : 0.0);
        rep.ratio_cmp.push_back(dt_star > 0.0 ? tr.excess_cmp / dt_star : 0.0);
        rep.trials.push_back(tr);
    }
    const double T = static_cast<double>(std::max<std::size_t>(trials, 1));
    rep.pen_ok = static_cast<double>(pen_ok) / T;
    rep.cmp_ok = static_cast<double>(cmp_ok) / T;
    rep.cmp_below_star = static_cast<double>(below) / T;
    rep.chain_ok = static_cast<double>(chain) / T;
    return rep;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw Error(ErrorKind::BadParams, "quantile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace riskbound
