#include "riskbound/selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "riskbound/complexity.hpp"
#include "riskbound/error.hpp"

namespace riskbound {

namespace {

void require_length(const std::vector<double>& v, std::size_t m, const char* what) {
    if (v.size() != m) {
        std::ostringstream os;
        os << what << " has " << v.size() << " entries for " << m << " models";
        throw Error(ErrorKind::BadParams, os.str());
    }
}

double running_max_at(const std::vector<double>& v, std::size_t l) {
    double m = v[0];
    for (std::size_t j = 1; j <= l; ++j) m = std::max(m, v[j]);
    return m;
}

}  // namespace

void ModelFamily::validate() const {
    if (classes.empty()) throw Error(ErrorKind::BadParams, "empty model family");
    require_length(t, classes.size(), "t schedule");
    if (!p.empty()) require_length(p, classes.size(), "p schedule");
    for (double tk : t)
        if (!(tk > 0.0)) throw Error(ErrorKind::BadParams, "t_k must be positive");
    for (double pk : p)
        if (!(pk >= 0.0)) throw Error(ErrorKind::BadParams, "p_k must be nonnegative");
    if (!nested) return;
    for (std::size_t k = 1; k < classes.size(); ++k) {
        const auto& prev = classes[k - 1].labels();
        const auto& cur = classes[k].labels();
        std::set<std::string> have(cur.begin(), cur.end());
        for (const auto& lab : prev)
            if (!have.count(lab))
                throw Error(ErrorKind::NotNested, "member '" + lab + "' of F_" + std::to_string(k) +
                                                      " is missing from F_" + std::to_string(k + 1));
    }
}

// ---------------------------------------------------------------- ConvexLink

ConvexLink::ConvexLink(Fn phi, std::optional<Fn> conjugate, std::string name)
    : phi_(std::move(phi)), conjugate_(std::move(conjugate)), name_(std::move(name)) {
    if (!phi_) throw Error(ErrorKind::BadParams, "convex link needs phi");
    if (std::abs(phi_(0.0)) > 1e-12) throw Error(ErrorKind::BadParams, "phi(0) must be 0");
}

ConvexLink ConvexLink::quadratic(double D) {
    if (!(D > 0.0)) throw Error(ErrorKind::BadParams, "quadratic link needs D > 0");
    return ConvexLink([D](double u) { return u * u / D; }, [D](double v) { return D * v * v / 4.0; },
                      "quadratic");
}

double ConvexLink::conjugate(double v) const {
    return conjugate_ ? (*conjugate_)(v) : numeric_conjugate(v);
}

double ConvexLink::numeric_conjugate(double v, std::size_t points) const {
    if (v <= 0.0) return 0.0;
    if (points < 3) points = 3;
    // Grow u_max until the left slope of phi at u_max exceeds v; the maximizer is then inside.
    double u_max = 1.0;
    for (int it = 0; it < 200; ++it) {
        double slope = (phi_(u_max) - phi_(0.5 * u_max)) / (0.5 * u_max);
        if (slope > v) break;
        u_max *= 2.0;
    }
    const auto objective = [&](double u) { return u * v - phi_(u); };
    const double h = u_max / static_cast<double>(points - 1);
    std::size_t best = 0;
    double best_val = objective(0.0);
    for (std::size_t i = 1; i < points; ++i) {
        double val = objective(h * static_cast<double>(i));
        if (val > best_val) {
            best_val = val;
            best = i;
        }
    }
    double a = h * static_cast<double>(best == 0 ? 0 : best - 1);
    double b = h * static_cast<double>(std::min(best + 1, points - 1));
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = objective(c), fd = objective(d);
    for (int it = 0; it < 100 && b - a > 1e-15 * (1.0 + b); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = objective(d);
        }
    }
    return std::max({best_val, fc, fd, 0.0});
}

bool ConvexLink::submultiplicative(const std::vector<double>& lattice) const {
    for (double u : lattice)
        for (double v : lattice)
            if (phi_(u * v) > phi_(u) * phi_(v) * (1.0 + 1e-12) + 1e-15) return false;
    return true;
}

void ConvexLink::audit_fenchel_young(const std::vector<double>& us, const std::vector<double>& vs, double tol) const {
    for (double v : vs) {
        double c = conjugate(v);
        if (c < -tol) throw Error(ErrorKind::ConvexityViolated, "negative conjugate");
        for (double u : us)
            if (u * v > phi_(u) + c + tol) {
                std::ostringstream os;
                os << "Fenchel-Young fails at u=" << u << ", v=" << v;
                throw Error(ErrorKind::ConvexityViolated, os.str());
            }
    }
}

// ---------------------------------------------------------------- penalties

double v1_value(double K, double delta, double min_risk, double t, double n) {
    return K * (delta + std::sqrt(t / n * std::max(min_risk, 0.0)) + t / n);
}

Penalties penalty_v1(const ModelFamily& family, const std::vector<double>& delta_hat, const std::vector<double>& mins,
                     double n, double K_hat, const OracleSide* oracle, double K_tilde) {
    family.validate();
    const std::size_t m = family.size();
    require_length(delta_hat, m, "delta_hat");
    require_length(mins, m, "empirical minima");
    Penalties out;
    out.complexity = delta_hat;
    for (std::size_t k = 0; k < m; ++k) out.hat.push_back(v1_value(K_hat, delta_hat[k], mins[k], family.t[k], n));
    if (oracle && !oracle->delta_tilde.empty() && !oracle->true_mins.empty()) {
        require_length(oracle->delta_tilde, m, "delta_tilde");
        require_length(oracle->true_mins, m, "true minima");
        for (std::size_t k = 0; k < m; ++k)
            out.tilde.push_back(v1_value(K_tilde, oracle->delta_tilde[k], oracle->true_mins[k], family.t[k], n));
    }
    return out;
}

Penalties penalty_v2(const ModelFamily& family, const ConvexLink& link, double epsilon,
                     const std::vector<double>& delta_hat, double n, const OracleSide* oracle,
                     const std::vector<ConvexLink>* per_model) {
    family.validate();
    const std::size_t m = family.size();
    require_length(delta_hat, m, "delta_hat");
    if (!(epsilon > 0.0)) throw Error(ErrorKind::BadParams, "epsilon must be positive");
    if (per_model && per_model->size() != m) throw Error(ErrorKind::BadParams, "one link per model expected");
    const double root = std::sqrt(epsilon);
    const ConvexLink& first = per_model ? per_model->front() : link;
    const double phi_root = first.phi(root);
    if (phi_root >= 1.0) throw Error(ErrorKind::LinkDegenerate, "phi(sqrt(eps)) >= 1");
    if (per_model) {
        std::vector<double> lattice;
        for (int i = 0; i <= 20; ++i) lattice.push_back(0.1 * i);
        for (std::size_t k = 1; k < m; ++k)
            for (double u : lattice)
                if ((*per_model)[k].phi(u) > (*per_model)[k - 1].phi(u) * (1.0 + 1e-12) + 1e-15)
                    throw Error(ErrorKind::BadParams, "per-model links must be nonincreasing in k");
    }

    Penalties out;
    out.complexity = delta_hat;
    out.C = (1.0 + phi_root) / (1.0 - phi_root);
    const bool with_tilde = oracle && !oracle->delta_tilde.empty();
    if (with_tilde) require_length(oracle->delta_tilde, m, "delta_tilde");
    for (std::size_t k = 0; k < m; ++k) {
        const ConvexLink& lk = per_model ? (*per_model)[k] : link;
        const double pk = lk.phi(root);
        const double A = 2.5 - pk;
        const double tk = family.t[k];
        const double conj = lk.conjugate(std::sqrt(2.0 * tk / (epsilon * n)));
        out.hat.push_back(A * delta_hat[k] + conj + tk / n);
        if (with_tilde) {
            const double den = 1.0 + pk;
            out.tilde.push_back(A / den * oracle->delta_tilde[k] + 2.0 / den * conj + 2.0 / den * tk / n);
        }
    }
    return out;
}

SelectionResult select_penalized(const ModelFamily& family, const Penalties& penalties,
                                 const std::vector<double>& mins, std::string method) {
    const std::size_t m = family.size();
    require_length(penalties.hat, m, "penalties");
    require_length(mins, m, "empirical minima");
    SelectionResult res;
    res.method = std::move(method);
    res.min_risk = mins;
    res.penalty = penalties.hat;
    res.reference_penalty = penalties.tilde;
    res.delta_hat = penalties.complexity;
    std::size_t best = 0;
    double best_val = mins[0] + penalties.hat[0];
    for (std::size_t k = 1; k < m; ++k) {
        double val = mins[k] + penalties.hat[k];
        if (val < best_val) {
            best_val = val;
            best = k;
        }
    }
    res.k_hat = best + 1;
    res.certificate = best_val;
    res.diagnostics["C"] = penalties.C;
    return res;
}

// ---------------------------------------------------------------- comparison

std::size_t comparison_index(const std::vector<double>& mins, const std::vector<double>& deltas, double c,
                             double slack) {
    const std::size_t m = mins.size();
    if (m == 0) throw Error(ErrorKind::BadParams, "no models");
    require_length(deltas, m, "deltas");
    for (std::size_t k = 0; k < m; ++k) {
        bool ok = true;
        for (std::size_t l = k + 1; l < m && ok; ++l)
            ok = mins[k] - mins[l] <= c * running_max_at(deltas, l) + slack;
        if (ok) return k + 1;
    }
    return 1;  // unreachable for a finite family: k = m always passes
}

SelectionResult select_comparison(const ModelFamily& family, const std::vector<double>& delta_hat,
                                  const std::vector<double>& mins, const ComparisonConstants& consts,
                                  const OracleSide* oracle, double oracle_accuracy) {
    if (!family.nested) throw Error(ErrorKind::NotNested, "comparison method needs a nested family");
    family.validate();
    const std::size_t m = family.size();
    require_length(delta_hat, m, "delta_hat");
    require_length(mins, m, "empirical minima");

    SelectionResult res;
    res.method = "comparison";
    res.min_risk = mins;
    res.delta_hat = delta_hat;
    res.k_hat = comparison_index(mins, delta_hat, consts.c_hat);
    for (std::size_t l = 0; l < m; ++l) res.penalty.push_back(consts.c_hat * running_max_at(delta_hat, l));
    res.certificate = mins[res.k_hat - 1];
    res.diagnostics["c_hat"] = consts.c_hat;

    if (oracle && !oracle->true_mins.empty()) {
        require_length(oracle->true_mins, m, "true minima");
        const double best = *std::min_element(oracle->true_mins.begin(), oracle->true_mins.end());
        std::size_t k_star = m;
        for (std::size_t k = 0; k < m; ++k)
            if (oracle->true_mins[k] <= best + oracle_accuracy) {
                k_star = k + 1;
                break;
            }
        res.diagnostics["k_star"] = static_cast<double>(k_star);
        if (!oracle->delta_bar.empty())
            res.diagnostics["k_bar"] = static_cast<double>(
                comparison_index(oracle->true_mins, oracle->delta_bar, consts.c_bar, oracle_accuracy));
        if (!oracle->delta_tilde.empty()) {
            res.diagnostics["k_tilde"] = static_cast<double>(
                comparison_index(oracle->true_mins, oracle->delta_tilde, consts.c_tilde, oracle_accuracy));
            for (std::size_t l = 0; l < m; ++l)
                res.reference_penalty.push_back(running_max_at(oracle->delta_tilde, l));
            res.diagnostics["delta_tilde_k_star"] = res.reference_penalty[k_star - 1];
        }
    }
    return res;
}

// ---------------------------------------------------------------- specialized penalties

double shattering_value(double K, double log_delta, double min_risk, double t, double n) {
    const double a = (log_delta + t) / n;
    return K * (std::sqrt(std::max(min_risk, 0.0) * a) + a);
}

Penalties shattering_penalty(const ModelFamily& family, const Sample& sample, double K_hat) {
    family.validate();
    Penalties out;
    const double n = static_cast<double>(sample.size());
    for (std::size_t k = 0; k < family.size(); ++k) {
        const auto& cls = family.classes[k];
        if (!cls.binary()) throw Error(ErrorKind::NotBinary, "shattering penalty needs binary classes");
        const EvaluationMatrix mat = evaluate(cls, sample);
        const double log_delta = std::log(static_cast<double>(shattering_number(mat)));
        const auto means = mat.column_means();
        const double min_risk = *std::min_element(means.begin(), means.end());
        out.complexity.push_back(log_delta);
        out.hat.push_back(shattering_value(K_hat, log_delta, min_risk, family.t[k], n));
    }
    return out;
}

Penalties massart_penalty(const ModelFamily& family, const std::vector<double>& D,
                          const std::vector<ComplexityCurve>& theta, double epsilon, double n,
                          const MassartConstants& consts) {
    family.validate();
    const std::size_t m = family.size();
    require_length(D, m, "D");
    if (theta.size() != m) throw Error(ErrorKind::BadParams, "one theta curve per model expected");
    if (!(epsilon > 0.0)) throw Error(ErrorKind::BadParams, "epsilon must be positive");
    for (std::size_t k = 0; k < m; ++k) {
        if (!(D[k] > 0.0)) throw Error(ErrorKind::BadParams, "D_k must be positive");
        if (k > 0 && D[k] < D[k - 1]) throw Error(ErrorKind::BadOrdering, "D_k must be nondecreasing");
    }
    Penalties out;
    out.C = epsilon < 1.0 ? (1.0 + epsilon) / (1.0 - epsilon) : kInfinity;
    for (std::size_t k = 0; k < m; ++k) {
        const double delta = sharp(theta[k], epsilon / (consts.K * D[k])) / D[k];
        const double t_term = D[k] * family.t[k] / (epsilon * n);
        out.complexity.push_back(delta);
        out.hat.push_back(3.0 * delta + consts.K_hat * t_term);
        out.tilde.push_back(3.0 * delta + consts.K_tilde * t_term);
    }
    return out;
}

Penalties dimension_penalty(const ModelFamily& family, const std::vector<double>& dims, double n, double K_hat) {
    family.validate();
    require_length(dims, family.size(), "dimensions");
    Penalties out;
    for (std::size_t k = 0; k < family.size(); ++k) {
        if (!(dims[k] >= 0.0)) throw Error(ErrorKind::BadParams, "dimension must be nonnegative");
        out.complexity.push_back(dims[k]);
        out.hat.push_back(K_hat * (dims[k] + family.t[k] + 1.0) / n);
    }
    return out;
}

Penalties kernel_penalty(const ModelFamily& family, const std::vector<ComplexityCurve>& gamma_hat, double n,
                         double K_hat) {
    family.validate();
    if (gamma_hat.size() != family.size()) throw Error(ErrorKind::BadParams, "one gamma-hat curve per model");
    Penalties out;
    for (std::size_t k = 0; k < family.size(); ++k) {
        const double s = sharp(gamma_hat[k], 1.0);
        out.complexity.push_back(s);
        out.hat.push_back(K_hat * (s + (family.t[k] + 1.0) / n));
    }
    return out;
}

Penalties rademacher_penalty(const ModelFamily& family, const std::vector<ComplexityCurve>& omega_hat, double n,
                             double K_hat) {
    family.validate();
    if (omega_hat.size() != family.size()) throw Error(ErrorKind::BadParams, "one omega-hat curve per model");
    if (!(K_hat > 0.0)) throw Error(ErrorKind::BadParams, "K_hat must be positive");
    Penalties out;
    for (std::size_t k = 0; k < family.size(); ++k) {
        const double s = sharp(omega_hat[k], 1.0 / K_hat);
        out.complexity.push_back(s);
        out.hat.push_back(K_hat * (s + (family.t[k] + 1.0) / n));
    }
    return out;
}

// ---------------------------------------------------------------- loss classes

double LossClassMeta::modulus_inverse(double s) const {
    if (psi_inverse) return psi_inverse(s);
    if (psi) throw Error(ErrorKind::BadParams, "psi given without its inverse");
    if (!(Lambda > 0.0)) throw Error(ErrorKind::BadParams, "Lambda must be positive");
    return s / Lambda;
}

void audit_loss(const LossClassMeta& meta, std::size_t lattice) {
    if (!meta.loss) throw Error(ErrorKind::BadParams, "loss function missing");
    if (!(meta.r > 0.0 && meta.r <= 2.0)) throw Error(ErrorKind::BadParams, "r must lie in (0, 2]");
    if (!(meta.u_hi > meta.u_lo) || lattice < 2) throw Error(ErrorKind::BadParams, "bad u lattice");
    std::vector<double> us(lattice);
    for (std::size_t i = 0; i < lattice; ++i)
        us[i] = meta.u_lo + (meta.u_hi - meta.u_lo) * static_cast<double>(i) / static_cast<double>(lattice - 1);
    for (double y : meta.y_lattice)
        for (double u : us)
            for (double v : us) {
                const double lu = meta.loss(y, u), lv = meta.loss(y, v);
                const double du = std::abs(u - v);
                if (std::abs(lu - lv) > meta.L * du * (1.0 + 1e-9) + 1e-12) {
                    std::ostringstream os;
                    os << "|l(" << y << "," << u << ") - l(" << y << "," << v << ")| exceeds L|u-v|";
                    throw Error(ErrorKind::LipschitzViolated, os.str());
                }
                const double gap = 0.5 * (lu + lv) - meta.loss(y, 0.5 * (u + v));
                const double need = meta.modulus(std::pow(du, meta.r));
                if (gap < need * (1.0 - 1e-9) - 1e-12) {
                    std::ostringstream os;
                    os << "midpoint gap " << gap << " below modulus " << need << " at y=" << y << ", u=" << u
                       << ", v=" << v;
                    throw Error(ErrorKind::ConvexityViolated, os.str());
                }
            }
}

double loss_pi_n_rate(double M, double L, double Lambda, double V, double n, double C) {
    if (!(Lambda > 0.0 && V > 0.0 && n > 0.0 && M > 0.0))
        throw Error(ErrorKind::BadParams, "pi_n needs positive M, Lambda, V, n");
    const double ratio = std::max(L / Lambda, 1.0);
    return C * Lambda * std::pow(M, V / (V + 1.0)) * std::pow(ratio, (V + 2.0) / (V + 1.0)) *
           std::pow(n, -(V + 2.0) / (2.0 * (V + 1.0)));
}

double loss_pi_n(double M, double L, double Lambda, double V, double t, double n, double C) {
    return loss_pi_n_rate(M, L, Lambda, V, n, C) + C * (L * L * t + 1.0) / (Lambda * n);
}

ComplexityCurve w_bar(const LossClassMeta& meta, const ComplexityCurve& theta, double t, double n, double C) {
    const double scale = std::pow(meta.M, 2.0 - meta.r);
    const double L = meta.L;
    auto f = [meta, theta, scale, L, t, n, C](double delta) {
        const double s = scale * meta.modulus_inverse(delta / 2.0);
        return C * (L * theta(s) + L * std::sqrt(s * (t + 1.0) / n) + t / n);
    };
    const bool linear = !meta.psi && meta.r == 2.0;
    const Shape shape = linear && theta.shape() != Shape::Arbitrary ? Shape::ConcaveType : Shape::Arbitrary;
    ComplexityCurve out(f, shape, 0.0, kInfinity);
    return out;
}

LossClassResult loss_class(const LossClassMeta& meta, const FunctionClass& G, const Sample* sample,
                           const ComplexityCurve* theta, double t, double n, double C, double kappa_W) {
    audit_loss(meta);
    if (!(meta.loss_bound > 0.0)) throw Error(ErrorKind::BadParams, "loss bound must be positive");
    LossClassResult res;
    for (std::size_t j = 0; j < G.size(); ++j) {
        auto g = G.member(j);
        auto loss = meta.loss;
        const double bound = meta.loss_bound;
        res.loss_class.add([g, loss, bound](const Point& p) { return loss(p.y, g(p)) / bound; }, G.label(j));
    }
    if (sample) res.matrix = evaluate(res.loss_class, *sample);
    const double Lambda = meta.psi ? meta.modulus(1.0) : meta.Lambda;
    res.pi_n = loss_pi_n(meta.M, meta.L, Lambda, meta.V, t, n, C);
    res.pi_n_rate = loss_pi_n_rate(meta.M, meta.L, Lambda, meta.V, n, C);
    if (theta) {
        res.W_bar = w_bar(meta, *theta, t, n, C);
        res.delta_W = sharp(*res.W_bar, kappa_W);
    }
    return res;
}

}  // namespace riskbound
