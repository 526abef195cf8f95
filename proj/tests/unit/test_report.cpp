#include <doctest.h>

#include <cmath>
#include <string>

#include "riskbound/config.hpp"
#include "riskbound/error.hpp"
#include "riskbound/report.hpp"
#include "riskbound/runner.hpp"

using namespace riskbound;
using doctest::Approx;

namespace {

ErrorKind kind_of(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("config was accepted: " << text);
    return ErrorKind::BadParams;
}

const char* kCube = "kind = rate\nscenario.name = cube\nscenario.N = 15\nplan.n_sweep = 256, 512\nplan.replicates = 5\n";

}  // namespace

TEST_CASE("config parsing") {
    const auto c = parse_config(
        "# comment\n"
        "kind = ordering   # trailing comment\n"
        "scenario.name = finite_dim\n"
        "scenario.d = 4\n"
        "plan.n = 128\n"
        "constants.q = 3\n"
        "constants.kappa_W = 0.01\n"
        "seed = 42\n");
    CHECK(c.kind == ExperimentKind::Ordering);
    CHECK(c.scenario.d == 4);
    CHECK(c.n == 128);
    CHECK(c.constants.q == 3.0);
    CHECK(c.constants.kappa_w() == 0.01);
    CHECK(c.plan.seed == 42);

    const auto r = parse_config(kCube);
    CHECK(r.plan.n_sweep == std::vector<std::size_t>{256, 512});
    CHECK(r.plan.replicates == 5);
}

TEST_CASE("malformed configs are rejected") {
    CHECK(kind_of("kind = rate\nscenario.nmae = cube\n") == ErrorKind::ConfigError);
    CHECK(kind_of("scenario.name = cube\n") == ErrorKind::ConfigError);
    CHECK(kind_of("kind = rate\nkind = rate\n") == ErrorKind::ConfigError);
    CHECK(kind_of("kind = rate\nplan.n_sweep = 64, x\n") == ErrorKind::ConfigError);
    CHECK(kind_of("kind = rate\nplan.n_sweep = 64,,128\n") == ErrorKind::ConfigError);
    CHECK(kind_of("kind = nonsense\n") == ErrorKind::ConfigError);
    CHECK(kind_of("kind = rate\njust text\n") == ErrorKind::ConfigError);
    CHECK(kind_of("kind = rate\nplan.n_sweep = 128, 64\n") == ErrorKind::BadParams);
    CHECK(kind_of("kind = ordering\nconstants.K_hat = 1\n") == ErrorKind::BadParams);
    CHECK(kind_of("kind = prop2\nscenario.name = finite_dim\n") == ErrorKind::ConfigError);
    CHECK(kind_of("kind = selection\nscenario.name = finite_dim\n") == ErrorKind::ConfigError);
    CHECK(kind_of("kind = selection\nscenario.name = nested_regression\nmethod.name = penalized\n"
                  "method.variant = massart\n") == ErrorKind::ConfigError);
    CHECK(kind_of("kind = ordering\nmethod.name = comparison\n") == ErrorKind::ConfigError);
    CHECK(kind_of("kind = ordering\noutput.csv = ../x.csv\n") == ErrorKind::ConfigError);
    CHECK(kind_of("kind = ordering\nscenario.rho = 1.5\n") == ErrorKind::ConfigError);
}

TEST_CASE("format_real keeps 17 significant digits") {
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(0.0) == "0");
    CHECK(format_real(-2.5) == "-2.5");
    CHECK(format_real(1.0 / 3.0) == "0.33333333333333331");
    CHECK(std::stod(format_real(M_PI)) == M_PI);
    CHECK(format_real(INFINITY) == "inf");
}

TEST_CASE("CSV table") {
    CsvTable t({"name", "n", "x"});
    t.add_row({std::string("a"), 3LL, 0.5});
    t.add_row({std::string("b"), 4LL, 1e-20});
    CHECK(t.str() == "name,n,x\na,3,0.5\nb,4,9.9999999999999995e-21\n");
    CHECK_THROWS_AS(t.add_row({1.0}), Error);
}

TEST_CASE("bound report JSON keys") {
    BoundReport r;
    r.grid = GeometricGrid(2.0, -1, 2);
    r.phi = GridTable::sample(r.grid, [](double) { return 0.0; });
    r.D = r.U = r.phi;
    r.delta_n = 0.25;
    const Json j = to_json(r);
    for (const char* k : {"grid", "phi", "D", "U", "delta_n", "delta_bar", "delta_hat", "delta_tilde", "sigma", "r_check",
                          "delta_check"})
        CHECK(j.contains(k));
    CHECK(j.size() == 11);
    CHECK(j["grid"].size() == 4);
    CHECK(j["delta_hat"].is_null());
    CHECK(j["delta_n"].get<double>() == 0.25);
}

TEST_CASE("selection result JSON") {
    SelectionResult s;
    s.method = "v1";
    s.k_hat = 2;
    s.min_risk = {0.3, 0.2};
    s.penalty = {0.01, 0.02};
    s.delta_hat = {0.1, 0.2};
    s.certificate = 0.22;
    s.diagnostics["k_bar"] = 2;
    const Json j = to_json(s);
    CHECK(j["k_hat"] == 2);
    CHECK(j["per_model"].size() == 2);
    CHECK(j["per_model"][1]["penalty"].get<double>() == 0.02);
    CHECK(j["diagnostics"]["k_bar"].get<double>() == 2.0);
}

TEST_CASE("svg rendering") {
    CHECK_THROWS_AS((void)render_svg(Json::object()), Error);
    try {
        (void)render_svg(Json::object());
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MissingField);
    }
    Json rate = {{"kind", "rate"}, {"n", {64, 128, 256, 512}}, {"mean", {0.1, 0.05, 0.025, 0.0125}},
                 {"slope", -1.0},  {"intercept", std::log(6.4)}, {"fit_start", 2}};
    const std::string svg = render_svg(rate);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("slope -1.000") != std::string::npos);
    CHECK(render_svg(Json::parse(dump_summary(rate))) == svg);
    rate.erase("slope");
    CHECK_THROWS_AS((void)render_svg(rate), Error);

    const Json ord = {{"kind", "ordering"},
                      {"groups", Json::array({{{"delta_bar", 0.1}, {"delta_hat", 0.2}, {"delta_tilde", 0.4}}})}};
    const std::string bars = render_svg(ord);
    CHECK(bars.find("delta-tilde") != std::string::npos);
    CHECK(render_svg(Json::parse(dump_summary(ord))) == bars);
    CHECK_THROWS_AS((void)render_svg(Json{{"kind", "coverage"}}), Error);
}

TEST_CASE("cube run gives an all-zero excess column") {
    const auto a = run_experiment(parse_config(kCube));
    CHECK(a.csv.rfind("scenario,method,n,trial,excess\n", 0) == 0);
    std::size_t rows = 0;
    std::size_t pos = a.csv.find('\n') + 1;
    while (pos < a.csv.size()) {
        const auto end = a.csv.find('\n', pos);
        const std::string line = a.csv.substr(pos, end - pos);
        CHECK(line.substr(line.rfind(',') + 1) == "0");
        ++rows;
        pos = end + 1;
    }
    CHECK(rows == 10);
    CHECK(a.summary["pass"]["zero_excess"] == true);
    CHECK(a.summary["degenerate"] == true);
}

TEST_CASE("runs are reproducible and the seed matters") {
    auto cfg = parse_config("kind = rate\nscenario.name = finite_dim\nscenario.d = 2\nplan.n_sweep = 64, 128, 256\n"
                            "plan.replicates = 8\noutput.plot = r.svg\n");
    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg);
    CHECK(a.csv == b.csv);
    CHECK(dump_summary(a.summary) == dump_summary(b.summary));
    CHECK(a.svg == b.svg);
    CHECK(render_svg(Json::parse(dump_summary(a.summary))) == a.svg);
    cfg.plan.seed = 2;
    CHECK(run_experiment(cfg).csv != a.csv);
}

TEST_CASE("selection run emits a selection result") {
    const auto cfg = parse_config(
        "kind = selection\nscenario.name = nested_regression\nmethod.name = comparison\nplan.n = 128\n"
        "plan.trials = 3\nplan.phi_replicates = 20\nplan.sign_draws = 32\nconstants.t = 2\n");
    const auto a = run_experiment(cfg);
    const Json& ex = a.summary["example"];
    CHECK(ex["method"] == "comparison");
    CHECK(ex["per_model"].size() == 4);
    CHECK(ex["k_hat"].get<int>() >= 1);
    CHECK(a.summary["k_star"] == 2);
    for (const char* v : {"v1", "v2", "dimension", "rademacher"}) {
        auto c2 = cfg;
        c2.method.name = "penalized";
        c2.method.variant = v;
        const auto b = run_experiment(c2);
        CHECK(b.summary["example"]["per_model"].size() == 4);
    }
}
