#include "riskbound/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "riskbound/error.hpp"

namespace riskbound {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw Error(ErrorKind::ConfigError, "line " + std::to_string(line) + ": " + msg);
}

double to_double(std::string_view v, std::size_t line) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) fail(line, "not a number: '" + std::string(v) + "'");
    return out;
}

std::uint64_t to_uint(std::string_view v, std::size_t line) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) fail(line, "not a nonnegative integer: '" + std::string(v) + "'");
    return out;
}

std::vector<std::size_t> to_list(std::string_view v, std::size_t line) {
    std::vector<std::size_t> out;
    while (!v.empty()) {
        const auto comma = v.find(',');
        const auto item = trim(v.substr(0, comma));
        if (item.empty()) fail(line, "empty list item");
        out.push_back(static_cast<std::size_t>(to_uint(item, line)));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    if (out.empty()) fail(line, "empty list");
    return out;
}

using Setter = std::function<void(RunConfig&, std::string_view, std::size_t)>;

template <class T>
Setter size_field(T RunConfig::*field) {
    return [field](RunConfig& c, std::string_view v, std::size_t l) { c.*field = static_cast<T>(to_uint(v, l)); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = [] {
        std::map<std::string, Setter, std::less<>> m;
        auto real = [](double& (*ref)(RunConfig&)) {
            return [ref](RunConfig& c, std::string_view v, std::size_t l) { ref(c) = to_double(v, l); };
        };
        auto text = [](std::string& (*ref)(RunConfig&)) {
            return [ref](RunConfig& c, std::string_view v, std::size_t) { ref(c) = std::string(v); };
        };
        m["kind"] = [](RunConfig& c, std::string_view v, std::size_t l) {
            static const std::map<std::string, ExperimentKind, std::less<>> kinds{
                {"rate", ExperimentKind::Rate},         {"prop2", ExperimentKind::Prop2},
                {"ordering", ExperimentKind::Ordering}, {"bounds", ExperimentKind::Bounds},
                {"selection", ExperimentKind::Selection}, {"coverage", ExperimentKind::Coverage}};
            const auto it = kinds.find(v);
            if (it == kinds.end()) fail(l, "unknown kind '" + std::string(v) + "'");
            c.kind = it->second;
        };
        m["seed"] = [](RunConfig& c, std::string_view v, std::size_t l) { c.plan.seed = to_uint(v, l); };

        m["scenario.name"] = text([](RunConfig& c) -> std::string& { return c.scenario.name; });
        m["scenario.N"] = [](RunConfig& c, std::string_view v, std::size_t l) { c.scenario.N = to_uint(v, l); };
        m["scenario.d"] = [](RunConfig& c, std::string_view v, std::size_t l) { c.scenario.d = to_uint(v, l); };
        m["scenario.half_width"] = [](RunConfig& c, std::string_view v, std::size_t l) {
            c.scenario.half_width = static_cast<int>(to_uint(v, l));
        };
        m["scenario.kappa"] = real([](RunConfig& c) -> double& { return c.scenario.kappa; });
        m["scenario.rho"] = real([](RunConfig& c) -> double& { return c.scenario.rho; });
        m["scenario.h"] = real([](RunConfig& c) -> double& { return c.scenario.h; });
        m["scenario.half_grid"] = [](RunConfig& c, std::string_view v, std::size_t l) {
            c.scenario.half_grid = to_uint(v, l);
        };
        m["scenario.support"] = [](RunConfig& c, std::string_view v, std::size_t l) { c.scenario.support = to_uint(v, l); };
        m["scenario.members"] = [](RunConfig& c, std::string_view v, std::size_t l) { c.scenario.members = to_uint(v, l); };
        m["scenario.models"] = [](RunConfig& c, std::string_view v, std::size_t l) { c.scenario.models = to_uint(v, l); };

        m["method.name"] = text([](RunConfig& c) -> std::string& { return c.method.name; });
        m["method.variant"] = text([](RunConfig& c) -> std::string& { return c.method.variant; });
        m["method.K_hat"] = real([](RunConfig& c) -> double& { return c.method.K_hat; });
        m["method.K_tilde"] = real([](RunConfig& c) -> double& { return c.method.K_tilde; });
        m["method.epsilon"] = real([](RunConfig& c) -> double& { return c.method.epsilon; });
        m["method.link_D"] = real([](RunConfig& c) -> double& { return c.method.link_D; });

        m["constants.q"] = real([](RunConfig& c) -> double& { return c.constants.q; });
        m["constants.K_bar"] = real([](RunConfig& c) -> double& { return c.constants.K_bar; });
        m["constants.K_hat"] = real([](RunConfig& c) -> double& { return c.constants.K_hat; });
        m["constants.K_tilde"] = real([](RunConfig& c) -> double& { return c.constants.K_tilde; });
        m["constants.c_hat"] = real([](RunConfig& c) -> double& { return c.constants.c_hat; });
        m["constants.c_tilde"] = real([](RunConfig& c) -> double& { return c.constants.c_tilde; });
        m["constants.K_check"] = real([](RunConfig& c) -> double& { return c.constants.K_check; });
        m["constants.kappa_W"] = [](RunConfig& c, std::string_view v, std::size_t l) {
            c.constants.kappa_W = to_double(v, l);
        };
        m["constants.t"] = real([](RunConfig& c) -> double& { return c.constants.t; });

        m["plan.n_sweep"] = [](RunConfig& c, std::string_view v, std::size_t l) { c.plan.n_sweep = to_list(v, l); };
        m["plan.replicates"] = [](RunConfig& c, std::string_view v, std::size_t l) { c.plan.replicates = to_uint(v, l); };
        m["plan.n"] = size_field(&RunConfig::n);
        m["plan.trials"] = size_field(&RunConfig::trials);
        m["plan.N_list"] = [](RunConfig& c, std::string_view v, std::size_t l) { c.N_list = to_list(v, l); };
        m["plan.phi_replicates"] = size_field(&RunConfig::phi_replicates);
        m["plan.sign_draws"] = size_field(&RunConfig::sign_draws);
        m["plan.slope_tolerance"] = real([](RunConfig& c) -> double& { return c.slope_tolerance; });

        m["output.csv"] = text([](RunConfig& c) -> std::string& { return c.csv; });
        m["output.summary"] = text([](RunConfig& c) -> std::string& { return c.summary; });
        m["output.plot"] = text([](RunConfig& c) -> std::string& { return c.plot; });
        return m;
    }();
    return table;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorKind::ConfigError, msg);
}

bool plain_file_name(const std::string& s) {
    return !s.empty() && s.find('/') == std::string::npos && s != "." && s != "..";
}

}  // namespace

const char* to_string(ExperimentKind kind) noexcept {
    switch (kind) {
        case ExperimentKind::Rate: return "rate";
        case ExperimentKind::Prop2: return "prop2";
        case ExperimentKind::Ordering: return "ordering";
        case ExperimentKind::Bounds: return "bounds";
        case ExperimentKind::Selection: return "selection";
        case ExperimentKind::Coverage: return "coverage";
    }
    return "unknown";
}

void RunConfig::validate() const {
    constants.validate();
    const std::set<std::string> scenarios{"cube", "finite_dim", "tsybakov", "finite_support", "nested_regression"};
    require(scenarios.count(scenario.name) == 1, "unknown scenario '" + scenario.name + "'");
    require(scenario.N >= 1, "scenario.N must be at least 1");
    require(scenario.d >= 1, "scenario.d must be at least 1");
    require(scenario.half_width >= 1, "scenario.half_width must be at least 1");
    require(scenario.kappa >= 1.0, "scenario.kappa must be at least 1");
    require(scenario.rho > 0.0 && scenario.rho < 1.0, "scenario.rho must lie in (0,1)");
    require(scenario.h > 0.0 && scenario.h <= 1.0, "scenario.h must lie in (0,1]");
    require(scenario.half_grid >= 1, "scenario.half_grid must be at least 1");
    require(scenario.support >= 1 && scenario.members >= 1, "finite_support needs support and members");
    require(scenario.models >= 2, "scenario.models must be at least 2");
    require(plain_file_name(csv) && plain_file_name(summary), "output names must be plain file names");
    require(plot.empty() || plain_file_name(plot), "output.plot must be a plain file name");
    require(csv != summary && (plot.empty() || (plot != csv && plot != summary)), "output names must differ");
    require(phi_replicates >= 2, "plan.phi_replicates must be at least 2");
    require(sign_draws >= 1, "plan.sign_draws must be at least 1");

    const bool selection = kind == ExperimentKind::Selection;
    require(selection == (scenario.name == "nested_regression"),
            selection ? "selection runs on scenario nested_regression" : "nested_regression is only for selection runs");
    if (selection) {
        require(method.name == "penalized" || method.name == "comparison",
                "selection needs method.name penalized or comparison");
        if (method.name == "penalized") {
            const std::set<std::string> variants{"v1", "v2", "dimension", "rademacher"};
            require(variants.count(method.variant) == 1,
                    "method.variant '" + method.variant + "' is not available from a config (use v1, v2, dimension "
                    "or rademacher)");
        }
        require(method.K_hat > 0.0 && method.K_tilde > 0.0, "method constants must be positive");
        require(method.epsilon > 0.0 && method.epsilon < 1.0, "method.epsilon must lie in (0,1)");
        require(method.link_D > 0.0, "method.link_D must be positive");
    } else {
        require(method.name == "erm", "only method erm applies to " + std::string(to_string(kind)) + " runs");
    }

    switch (kind) {
        case ExperimentKind::Rate:
            require(!plan.n_sweep.empty(), "rate runs need plan.n_sweep");
            require(plan.n_sweep.size() >= 2, "plan.n_sweep needs at least two sizes");
            plan.validate();
            require(slope_tolerance > 0.0, "plan.slope_tolerance must be positive");
            break;
        case ExperimentKind::Prop2:
            require(scenario.name == "cube", "prop2 runs use scenario cube");
            require(!N_list.empty(), "prop2 runs need plan.N_list");
            for (std::size_t i = 1; i < N_list.size(); ++i)
                require(N_list[i] > N_list[i - 1], "plan.N_list must be strictly increasing");
            require(N_list.front() >= 2, "plan.N_list entries must be at least 2");
            [[fallthrough]];
        case ExperimentKind::Ordering:
        case ExperimentKind::Coverage:
            require(trials >= 1, "plan.trials must be at least 1");
            [[fallthrough]];
        case ExperimentKind::Bounds:
            require(n >= 2, "plan.n must be at least 2");
            break;
        case ExperimentKind::Selection:
            require(trials >= 1, "plan.trials must be at least 1");
            require(n >= 2, "plan.n must be at least 2");
            break;
    }
}

RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) fail(line_no, "missing key");
        if (value.empty()) fail(line_no, "missing value for '" + std::string(key) + "'");
        const auto it = setters().find(key);
        if (it == setters().end()) fail(line_no, "unknown key '" + std::string(key) + "'");
        if (!seen.insert(std::string(key)).second) fail(line_no, "repeated key '" + std::string(key) + "'");
        it->second(cfg, value, line_no);
    }
    if (seen.count("kind") == 0) throw Error(ErrorKind::ConfigError, "missing key 'kind'");
    cfg.plan.t = cfg.constants.t;
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace riskbound
