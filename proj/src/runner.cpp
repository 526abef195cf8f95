#include "riskbound/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "riskbound/complexity.hpp"
#include "riskbound/error.hpp"
#include "riskbound/random.hpp"

namespace riskbound {

namespace {

using Row = std::vector<CsvTable::Cell>;

long long as_int(std::size_t v) { return static_cast<long long>(v); }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

Scenario build_scenario(const RunConfig& c, std::size_t n) {
    const ScenarioSpec& s = c.scenario;
    if (s.name == "cube") return cube_scenario(s.N);
    if (s.name == "finite_dim") return finite_dim_regression(s.d, n, s.half_width);
    if (s.name == "finite_support") return finite_support_scenario(s.support, s.members, derive_seed(c.plan.seed, 99));
    if (s.name == "tsybakov") {
        if (c.kind == ExperimentKind::Rate) return tsybakov_rate_scenario(s.kappa, s.rho, n, s.h);
        TsybakovParams p;
        p.kappa = s.kappa;
        p.rho = s.rho;
        p.h = s.h;
        p.half_grid = s.half_grid;
        return tsybakov_scenario(p);
    }
    throw Error(ErrorKind::ConfigError, "scenario '" + s.name + "' cannot be built for this run");
}

Json truth_json(const std::map<std::string, double>& truth) {
    Json j = Json::object();
    for (const auto& [k, v] : truth) j[k] = std::isfinite(v) ? Json(v) : Json(nullptr);
    return j;
}

Json header(const RunConfig& c) {
    Json j;
    j["kind"] = to_string(c.kind);
    j["scenario"] = c.scenario.name;
    j["method"] = c.method.name == "penalized" ? "penalized." + c.method.variant : c.method.name;
    j["seed"] = c.plan.seed;
    j["t"] = c.constants.t;
    return j;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

RunArtifacts run_rate(const RunConfig& c) {
    ExperimentPlan plan = c.plan;
    plan.t = c.constants.t;
    const RateReport r = run_rate_experiment([&c](std::size_t n) { return build_scenario(c, n); }, plan);
    RunArtifacts a;
    CsvTable csv({"scenario", "method", "n", "trial", "excess"});
    for (std::size_t i = 0; i < r.n.size(); ++i)
        for (std::size_t t = 0; t < r.excess[i].size(); ++t)
            csv.add_row(Row{r.scenario, r.method, as_int(r.n[i]), as_int(t), r.excess[i][t]});
    a.csv = csv.str();

    Json& s = a.summary = header(c);
    s["scenario"] = r.scenario;
    s["replicates"] = plan.replicates;
    s["n"] = r.n;
    s["mean"] = r.mean;
    s["stderr"] = r.stderr_;
    s["fit_start"] = r.fit_start;
    s["degenerate"] = r.degenerate;
    s["slope"] = finite_or_null(r.slope);
    s["intercept"] = finite_or_null(r.intercept);
    s["ci_half_width"] = finite_or_null(r.ci);
    s["ci"] = r.degenerate ? Json(nullptr) : Json::array({r.slope - r.ci, r.slope + r.ci});
    s["truth"] = truth_json(r.truth);
    Json pass = Json::object();
    const auto exp = r.truth.find("expected_slope");
    if (exp != r.truth.end()) {
        s["expected_slope"] = exp->second;
        s["slope_tolerance"] = c.slope_tolerance;
        pass["slope_within_tolerance"] = !r.degenerate && std::abs(r.slope - exp->second) <= c.slope_tolerance;
    }
    bool all_zero = true;
    for (double m : r.mean) all_zero = all_zero && m == 0.0;
    pass["zero_excess"] = all_zero;
    s["pass"] = pass;
    a.line = "rate " + r.scenario + ": n=" + std::to_string(r.n.front()) + ".." + std::to_string(r.n.back()) + ", " +
             std::to_string(plan.replicates) + " replicates, " +
             (r.degenerate ? std::string("slope undefined (nonpositive mean excess)")
                           : "slope " + fixed(r.slope, 3) + " +/- " + fixed(r.ci, 3)) +
             (exp != r.truth.end() ? ", expected " + fixed(exp->second, 3) : std::string());
    return a;
}

RunArtifacts run_prop2(const RunConfig& c) {
    const Prop2Report r = run_prop2_experiment(c.N_list, c.n, c.constants.t, c.trials, c.plan.seed, c.phi_replicates,
                                               c.constants.q);
    RunArtifacts a;
    CsvTable csv({"N", "n", "phi", "delta_n", "delta_check", "threshold", "non_inclusion", "non_inclusion_stderr",
                  "zero_excess_members"});
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        csv.add_row(Row{as_int(row.N), as_int(c.n), row.phi_max, row.delta_n, row.delta_check, row.threshold,
                        row.non_inclusion, row.non_inclusion_stderr, as_int(row.min_excess_members)});
        rows.push_back({{"N", row.N},
                        {"phi", row.phi_max},
                        {"delta_n", row.delta_n},
                        {"delta_check", row.delta_check},
                        {"threshold", row.threshold},
                        {"non_inclusion", row.non_inclusion},
                        {"non_inclusion_stderr", row.non_inclusion_stderr},
                        {"zero_excess_members", row.min_excess_members}});
    }
    a.csv = csv.str();
    Json& s = a.summary = header(c);
    s["n"] = c.n;
    s["trials"] = c.trials;
    s["rows"] = rows;
    s["pass"] = {{"delta_monotone", r.delta_monotone},
                 {"frequency_monotone", r.frequency_monotone},
                 {"frequency_floor", r.rows.back().non_inclusion >= 0.5}};
    a.line = "prop2 cube: n=" + std::to_string(c.n) + ", N=" + std::to_string(c.N_list.front()) + ".." +
             std::to_string(c.N_list.back()) + ", non-inclusion " + fixed(r.rows.front().non_inclusion, 3) + " -> " +
             fixed(r.rows.back().non_inclusion, 3) + ", delta_n monotone " + (r.delta_monotone ? "yes" : "no");
    return a;
}

RunArtifacts run_ordering(const RunConfig& c) {
    const Scenario sc = build_scenario(c, c.n);
    const OrderingReport r =
        run_ordering_experiment(sc, c.n, c.constants, c.trials, c.plan.seed, c.phi_replicates, c.sign_draws);
    RunArtifacts a;
    CsvTable csv({"trial", "delta_bar", "delta_hat", "delta_tilde", "ordered"});
    for (std::size_t t = 0; t < r.delta_hat.size(); ++t) {
        const bool ok = r.delta_bar <= r.delta_hat[t] && r.delta_hat[t] <= r.delta_tilde;
        csv.add_row(Row{as_int(t), r.delta_bar, r.delta_hat[t], r.delta_tilde, as_int(ok ? 1 : 0)});
    }
    a.csv = csv.str();
    Json& s = a.summary = header(c);
    s["n"] = c.n;
    s["trials"] = c.trials;
    s["frequency"] = r.frequency;
    s["groups"] = Json::array({{{"label", sc.name + " n=" + std::to_string(c.n)},
                                {"delta_bar", r.delta_bar},
                                {"delta_hat", quantile(r.delta_hat, 0.5)},
                                {"delta_hat_lo", quantile(r.delta_hat, 0.05)},
                                {"delta_hat_hi", quantile(r.delta_hat, 0.95)},
                                {"delta_tilde", r.delta_tilde}}});
    s["example"] = to_json(r.example);
    s["pass"] = {{"ordering_frequency_0_9", r.frequency >= 0.9}};
    a.line = "ordering " + sc.name + ": n=" + std::to_string(c.n) + ", delta_bar " + fixed(r.delta_bar, 5) +
             ", median delta_hat " + fixed(quantile(r.delta_hat, 0.5), 5) + ", delta_tilde " + fixed(r.delta_tilde, 5) +
             ", ordered in " + fixed(100.0 * r.frequency, 1) + "% of " + std::to_string(c.trials) + " trials";
    return a;
}

RunArtifacts run_bounds(const RunConfig& c) {
    const Scenario sc = build_scenario(c, c.n);
    const std::uint64_t seed = c.plan.seed;
    const OracleProfiles prof = oracle_profiles(sc, c.n, c.phi_replicates, derive_seed(seed, 1));
    const Sample sample = sc.oracle.draw(c.n, derive_seed(seed, 2));
    const EmpiricalProfiles emp = empirical_profiles(evaluate(sc.cls, sample), c.sign_draws, derive_seed(seed, 3));
    BoundReport r = delta_family(
        BoundInputs{prof.phi, prof.D, emp.phi_hat, emp.D_hat, static_cast<double>(c.n)}, c.constants);
    const double sigma = c.constants.t / static_cast<double>(c.n);
    r.geometric = geometric_bound(sc.cls, sc.oracle, sigma, c.constants, c.n, c.phi_replicates, derive_seed(seed, 4));
    const double erm_ex = prof.excess[emp.risk.erm_index];

    RunArtifacts a;
    CsvTable csv({"j", "delta", "phi", "D", "U", "U_bar", "U_hat", "U_tilde"});
    for (int j = r.grid.j_min(); j <= r.grid.j_max(); ++j)
        csv.add_row(Row{static_cast<long long>(j), r.grid.point(j), r.phi.at(j), r.D.at(j), r.U.at(j), r.U_bar.at(j),
                        r.U_hat->at(j), r.U_tilde.at(j)});
    a.csv = csv.str();
    Json& s = a.summary = header(c);
    s["scenario"] = sc.name;
    s["n"] = c.n;
    s["bounds"] = to_json(r);
    s["erm_excess"] = erm_ex;
    s["pass"] = {{"ordering", r.delta_bar <= *r.delta_hat && *r.delta_hat <= r.delta_tilde},
                 {"erm_within_delta_n", erm_ex <= r.delta_n}};
    a.line = "bounds " + sc.name + ": n=" + std::to_string(c.n) + ", delta_n " + fixed(r.delta_n, 5) + ", delta_bar " +
             fixed(r.delta_bar, 5) + ", delta_hat " + fixed(*r.delta_hat, 5) + ", delta_tilde " +
             fixed(r.delta_tilde, 5) + ", delta_check " + fixed(r.geometric->delta_check, 5) + ", ERM excess " +
             fixed(erm_ex, 6);
    return a;
}

RunArtifacts run_coverage(const RunConfig& c) {
    const Scenario sc = build_scenario(c, c.n);
    const CoverageReport r = run_coverage_experiment(sc, c.n, c.constants, c.trials, c.plan.seed, c.phi_replicates);
    RunArtifacts a;
    CsvTable csv({"scenario", "n", "trial", "excess", "delta_n", "exceeds"});
    for (std::size_t t = 0; t < r.excess.size(); ++t)
        csv.add_row(Row{sc.name, as_int(c.n), as_int(t), r.excess[t], r.delta_n, as_int(r.excess[t] > r.delta_n)});
    a.csv = csv.str();
    Json& s = a.summary = header(c);
    s["scenario"] = sc.name;
    s["n"] = c.n;
    s["trials"] = c.trials;
    s["delta_n"] = r.delta_n;
    s["frequency"] = r.frequency;
    s["stderr"] = r.stderr_;
    s["budget"] = r.budget;
    s["pass"] = {{"within_budget", r.frequency <= r.budget + 3.0 * r.stderr_}};
    a.line = "coverage " + sc.name + ": n=" + std::to_string(c.n) + ", t=" + fixed(c.constants.t, 2) +
             ", P(excess > delta_n) " + fixed(r.frequency, 4) + " vs budget " + fixed(r.budget, 4);
    return a;
}

SelectionResult example_selection(const RunConfig& c, const NestedScenario& ns) {
    const double n = static_cast<double>(c.n);
    const Sample sample = ns.full.oracle.draw(c.n, derive_seed(c.plan.seed, 7));
    const SelectionInputs in = selection_inputs(ns, sample, c.constants, c.sign_draws, derive_seed(c.plan.seed, 8));
    const MethodSpec& m = c.method;
    if (m.name == "comparison") {
        ComparisonConstants cc;
        return select_comparison(ns.family, in.delta_hat, in.mins, cc);
    }
    Penalties pen;
    if (m.variant == "v1") {
        pen = penalty_v1(ns.family, in.delta_hat, in.mins, n, m.K_hat);
    } else if (m.variant == "v2") {
        pen = penalty_v2(ns.family, ConvexLink::quadratic(m.link_D), m.epsilon, in.delta_hat, n);
    } else if (m.variant == "dimension") {
        pen = dimension_penalty(ns.family, ns.dims, n, m.K_hat);
    } else {
        std::vector<ComplexityCurve> omega;
        const auto draws = make_signs(c.n, derive_seed(c.plan.seed, 9), c.sign_draws);
        for (const auto& mat : in.matrices)
            omega.push_back(rademacher_modulus_curve(mat, draws, MetricTable::empirical(mat)).as_curve());
        pen = rademacher_penalty(ns.family, omega, n, m.K_hat);
    }
    return select_penalized(ns.family, pen, in.mins, m.variant);
}

RunArtifacts run_selection(const RunConfig& c) {
    const NestedScenario ns = nested_regression(c.scenario.models, c.scenario.half_width, c.constants.t);
    SelectionSettings set;
    set.consts = c.constants;
    set.K_hat = c.method.K_hat;
    set.K_tilde = c.method.K_tilde;
    set.phi_replicates = c.phi_replicates;
    set.sign_draws = c.sign_draws;
    const SelectionReport r = run_selection_experiment(ns, c.n, set, c.trials, c.plan.seed);
    const SelectionResult ex = example_selection(c, ns);

    RunArtifacts a;
    CsvTable csv({"trial", "k_pen", "excess_pen", "bound_pen", "k_cmp", "excess_cmp", "bound_cmp", "k_bar", "k_tilde"});
    for (std::size_t t = 0; t < r.trials.size(); ++t) {
        const auto& tr = r.trials[t];
        csv.add_row(Row{as_int(t), as_int(tr.k_pen), tr.excess_pen, tr.bound_pen, as_int(tr.k_cmp), tr.excess_cmp,
                        tr.bound_cmp, as_int(tr.k_bar), as_int(tr.k_tilde)});
    }
    a.csv = csv.str();
    Json& s = a.summary = header(c);
    s["n"] = c.n;
    s["trials"] = c.trials;
    s["k_star"] = r.k_star;
    s["delta_bar"] = r.delta_bar;
    s["delta_tilde"] = r.delta_tilde;
    s["pi_tilde"] = r.pi_tilde;
    s["penalized_ok"] = r.pen_ok;
    s["comparison_ok"] = r.cmp_ok;
    s["comparison_below_k_star"] = r.cmp_below_star;
    s["chain_ok"] = r.chain_ok;
    s["ratio_penalized"] = {{"median", quantile(r.ratio_pen, 0.5)},
                            {"q95", quantile(r.ratio_pen, 0.95)},
                            {"max", quantile(r.ratio_pen, 1.0)}};
    s["ratio_comparison"] = {{"median", quantile(r.ratio_cmp, 0.5)},
                             {"q95", quantile(r.ratio_cmp, 0.95)},
                             {"max", quantile(r.ratio_cmp, 1.0)}};
    s["example"] = to_json(ex);
    s["pass"] = {{"penalized_0_95", r.pen_ok >= 0.95},
                 {"comparison_0_95", r.cmp_ok >= 0.95},
                 {"comparison_below_k_star_0_95", r.cmp_below_star >= 0.95}};
    a.line = "selection nested_regression: n=" + std::to_string(c.n) + ", k*=" + std::to_string(r.k_star) +
             ", penalized within bound " + fixed(100.0 * r.pen_ok, 1) + "%, comparison within bound " +
             fixed(100.0 * r.cmp_ok, 1) + "%, comparison k<=k* " + fixed(100.0 * r.cmp_below_star, 1) +
             "%, example " + s["method"].get<std::string>() + " picks k=" + std::to_string(ex.k_hat);
    return a;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + p.string());
}

}  // namespace

RunArtifacts run_experiment(const RunConfig& config) {
    config.validate();
    RunArtifacts a;
    switch (config.kind) {
        case ExperimentKind::Rate: a = run_rate(config); break;
        case ExperimentKind::Prop2: a = run_prop2(config); break;
        case ExperimentKind::Ordering: a = run_ordering(config); break;
        case ExperimentKind::Bounds: a = run_bounds(config); break;
        case ExperimentKind::Selection: a = run_selection(config); break;
        case ExperimentKind::Coverage: a = run_coverage(config); break;
    }
    if (!config.plot.empty()) a.svg = render_svg(a.summary);
    return a;
}

void write_artifacts(const RunConfig& config, const RunArtifacts& a, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / config.csv, a.csv);
    write_file(out_dir / config.summary, dump_summary(a.summary));
    if (!config.plot.empty()) write_file(out_dir / config.plot, a.svg);
}

std::string dump_summary(const Json& summary) { return summary.dump(2) + "\n"; }

}  // namespace riskbound
