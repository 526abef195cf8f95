#include "riskbound/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "riskbound/error.hpp"

namespace riskbound {

void BoundConstants::validate() const {
    if (!(q > 1.0)) throw Error(ErrorKind::BadParams, "q must exceed 1");
    if (!(t > 0.0)) throw Error(ErrorKind::BadParams, "t must be positive");
    if (!(K_bar > 0.0) || !(K_check > 0.0)) throw Error(ErrorKind::BadParams, "constants must be positive");
    if (!(2.0 <= K_hat && K_hat <= K_tilde)) throw Error(ErrorKind::BadParams, "need 2 <= K_hat <= K_tilde");
    if (!(c_hat >= 1.0) || !(c_tilde >= 1.0)) throw Error(ErrorKind::BadParams, "need c_hat, c_tilde >= 1");
    if (!(kappa_w() > 0.0)) throw Error(ErrorKind::BadParams, "kappa_W must be positive");
}

GridTable u_n(const GridTable& phi, const GridTable& D, const BoundConstants& consts, double n) {
    if (!(phi.grid == D.grid) || phi.values.size() != D.values.size())
        throw Error(ErrorKind::GridMismatch, "phi and D tables live on different grids");
    const double tn = consts.t / n;
    GridTable out{phi.grid, std::vector<double>(phi.values.size())};
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        const double p = phi.values[k];
        const double d = D.values[k];
        out.values[k] = p + std::sqrt(2.0 * tn * (d * d + 2.0 * p)) + 0.5 * tn;
    }
    return out;
}

GridTable v_n(const GridTable& u_table) {
    GridTable out{u_table.grid, {}};
    for (int j = u_table.grid.j_min(); j <= u_table.grid.j_max(); ++j)
        out.values.push_back(flat_q(u_table, u_table.grid.point(j), false));
    return out;
}

double delta_n(const GridTable& u_table, const BoundConstants& consts) {
    if (u_table.grid.q() != consts.q) throw Error(ErrorKind::GridMismatch, "grid ratio differs from constants");
    return sharp_q(u_table, 1.0 / (2.0 * consts.q), true);
}

namespace {

// K (phi(c delta) + D(c delta) sqrt(t/n) + t/n) on the grid.
GridTable family_curve(const GeometricGrid& grid, const SetProfile& phi, const SetProfile& D, double K, double c,
                       double t, double n) {
    const double tn = t / n;
    return GridTable::sample(grid, [&](double d) { return K * (phi(c * d) + D(c * d) * std::sqrt(tn) + tn); });
}

}  // namespace

BoundReport delta_family(const BoundInputs& in, const BoundConstants& consts) {
    consts.validate();
    if (in.phi_hat.has_value() != in.D_hat.has_value())
        throw Error(ErrorKind::BadParams, "phi_hat and D_hat must be supplied together");
    BoundReport r;
    r.n = in.n;
    r.t = consts.t;
    r.grid = GeometricGrid::for_sample(consts.q, in.n, consts.t);
    r.phi = GridTable::sample(r.grid, [&](double d) { return in.phi(d); });
    r.D = GridTable::sample(r.grid, [&](double d) { return in.D(d); });
    r.U = u_n(r.phi, r.D, consts, in.n);
    r.V = v_n(r.U);
    r.delta_n = delta_n(r.U, consts);

    const double eps3 = 1.0 / (2.0 * consts.q * consts.q * consts.q);
    r.U_bar = family_curve(r.grid, in.phi, in.D, consts.K_bar, 1.0, consts.t, in.n);
    r.U_tilde = family_curve(r.grid, in.phi, in.D, consts.K_tilde, consts.c_tilde, consts.t, in.n);
    r.delta_bar = sharp_q(r.U_bar, eps3, true);
    r.delta_tilde = sharp_q(r.U_tilde, eps3, true);
    if (in.phi_hat) {
        r.phi_hat = GridTable::sample(r.grid, [&](double d) { return (*in.phi_hat)(d); });
        r.D_hat = GridTable::sample(r.grid, [&](double d) { return (*in.D_hat)(d); });
        r.U_hat = family_curve(r.grid, *in.phi_hat, *in.D_hat, consts.K_hat, consts.c_hat, consts.t, in.n);
        r.delta_hat = sharp_q(*r.U_hat, eps3, true);
    }
    return r;
}

double delta_hat(const SetProfile& phi_hat, const SetProfile& D_hat, const BoundConstants& consts, double n) {
    consts.validate();
    const GeometricGrid grid = GeometricGrid::for_sample(consts.q, n, consts.t);
    const GridTable u = family_curve(grid, phi_hat, D_hat, consts.K_hat, consts.c_hat, consts.t, n);
    return sharp_q(u, 1.0 / (2.0 * consts.q * consts.q * consts.q), true);
}

CheckBound u_check_concave(const ComplexityCurve& phi_env, const ComplexityCurve& D_env, const BoundConstants& consts,
                           double n, const GridTable* phi_raw, const GridTable* D_raw) {
    consts.validate();
    if (phi_env.shape() != Shape::StrictlyConcaveType && phi_env(1.0) != 0.0)
        throw Error(ErrorKind::BadParams, "phi envelope must be strictly-concave-type");
    if (D_env.shape() == Shape::Arbitrary) throw Error(ErrorKind::BadParams, "D envelope must be concave-type");
    auto dominated = [](const ComplexityCurve& env, const GridTable* raw, const char* name) {
        if (raw == nullptr) return;
        for (int j = raw->grid.j_min(); j <= raw->grid.j_max(); ++j) {
            const double d = raw->grid.point(j);
            if (env(d) < raw->at(j) * (1.0 - 1e-12))
                throw Error(ErrorKind::EnvelopeViolated, std::string(name) + " envelope below raw table");
        }
    };
    dominated(phi_env, phi_raw, "phi");
    dominated(D_env, D_raw, "D");
    const double tn = consts.t / n;
    const double K = consts.K_check;
    ComplexityCurve curve([phi_env, D_env, tn, K](double d) { return K * (phi_env(d) + D_env(d) * std::sqrt(tn) + tn); },
                          Shape::ConcaveType, 0.0, kInfinity);
    const double dc = sharp(curve, 1.0 / consts.q);
    return {curve, dc};
}

GeometricBound geometric_bound(const FunctionClass& cls, const OracleDistribution& oracle, double sigma,
                               const BoundConstants& consts, std::size_t n, std::size_t replicates, std::uint64_t seed,
                               MetricKind kind) {
    consts.validate();
    if (!(sigma > 0.0 && sigma <= 1.0)) throw Error(ErrorKind::BadParams, "sigma must lie in (0,1]");
    if (replicates < 2) throw Error(ErrorKind::BadParams, "need at least two replicates");
    const std::size_t m = cls.size();
    const auto risks = true_risks(oracle, m);
    const auto excess = excess_from_risks(risks);
    const MetricTable metric = MetricTable::from_oracle(oracle, m, kind);
    const double acc = oracle.accuracy;
    const GeometricGrid grid = GeometricGrid::for_sample(consts.q, static_cast<double>(n), consts.t);
    const std::size_t G = grid.size();

    GeometricBound out;
    out.sigma = sigma;
    std::vector<std::size_t> inner;
    for (std::size_t j = 0; j < m; ++j)
        if (excess[j] <= sigma + acc) inner.push_back(j);
    // Allowed pairs (g in F(sigma), f in F(delta_j), rho(f,g) <= r + eps) per grid point.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> allowed(G);
    for (int j = grid.j_min(); j <= grid.j_max(); ++j) {
        const double d = grid.point(j);
        const double r = d >= sigma ? r_check(excess, metric, sigma, d, acc) : r_check(excess, metric, d, sigma, acc);
        out.r_check.push_back(r);
        auto& list = allowed[static_cast<std::size_t>(j - grid.j_min())];
        for (std::size_t f = 0; f < m; ++f) {
            if (excess[f] > d + acc) continue;
            for (std::size_t g : inner)
                if (std::sqrt(metric(f, g)) <= r + acc) list.emplace_back(f, g);
        }
    }
    std::vector<std::vector<double>> per(replicates, std::vector<double>(G, 0.0));
    parallel_for(replicates, [&](std::size_t rep) {
        const Sample s = oracle.draw(n, derive_seed(seed, rep));
        auto z = empirical_risks(cls, s);
        for (std::size_t j = 0; j < m; ++j) z[j] -= risks[j];
        for (std::size_t k = 0; k < G; ++k) {
            double best = 0.0;
            for (const auto& [f, g] : allowed[k]) best = std::max(best, std::abs(z[f] - z[g]));
            per[rep][k] = best;
        }
    });
    const double tn = consts.t / static_cast<double>(n);
    GridTable shifted{grid, {}};
    std::vector<double> col(replicates);
    for (std::size_t k = 0; k < G; ++k) {
        for (std::size_t rep = 0; rep < replicates; ++rep) col[rep] = per[rep][k];
        const auto ms = mean_stderr(col);
        const double psi = ms.mean;
        const double r = out.r_check[k];
        const double u = psi + std::sqrt(2.0 * tn * (r * r + 2.0 * psi)) + 0.5 * tn;
        out.psi_check.push_back(psi);
        out.psi_check_stderr.push_back(ms.stderr_);
        out.U_check.push_back(u);
        shifted.values.push_back(u + sigma);
    }
    out.delta_check = sharp_q(shifted, 1.0 / (2.0 * consts.q), true);
    return out;
}

}  // namespace riskbound
