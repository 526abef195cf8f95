// riskbound: run an experiment from a config file or render a summary as SVG.
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "riskbound/error.hpp"
#include "riskbound/random.hpp"
#include "riskbound/runner.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

std::optional<unsigned> threads_from_env() {
    const char* env = std::getenv("RISKBOUND_THREADS");
    if (env == nullptr || *env == '\0') return std::nullopt;
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0) throw riskbound::Error(riskbound::ErrorKind::ConfigError, "RISKBOUND_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
}

int report(const riskbound::Error& e) {
    std::cerr << "riskbound: " << e.what() << '\n';
    return e.is_validation() ? kExitValidation : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Localized excess-risk bounds and model selection experiments"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::optional<unsigned> threads;
    std::string config_path;
    std::string summary_path;
    std::string svg_path;

    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config_path, "Config file (flat dotted key = value lines)")->required();
    run->add_option("--seed", seed, "Master seed (overrides the config)");
    run->add_option("--out-dir", out_dir, "Directory for the CSV, summary and plot");
    run->add_option("--threads", threads, "Worker threads (default: RISKBOUND_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    auto* plot = app.add_subcommand("plot", "Render a JSON summary as a standalone SVG");
    plot->add_option("summary", summary_path, "Summary JSON written by 'run'")->required();
    plot->add_option("-o,--output", svg_path, "SVG path (default: summary path with .svg)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*run) {
            const auto env_threads = threads_from_env();
            if (threads) riskbound::set_default_threads(*threads);
            else if (env_threads) riskbound::set_default_threads(*env_threads);

            riskbound::RunConfig cfg = riskbound::load_config(config_path);
            if (seed) cfg.plan.seed = *seed;
            const auto artifacts = riskbound::run_experiment(cfg);
            riskbound::write_artifacts(cfg, artifacts, out_dir);
            std::cout << artifacts.line << '\n';
            return 0;
        }
        std::ifstream in(summary_path);
        if (!in) throw riskbound::Error(riskbound::ErrorKind::MissingField, "cannot read " + summary_path);
        std::stringstream buf;
        buf << in.rdbuf();
        riskbound::Json summary;
        try {
            summary = riskbound::Json::parse(buf.str());
        } catch (const riskbound::Json::parse_error& e) {
            throw riskbound::Error(riskbound::ErrorKind::MissingField, std::string("summary is not JSON: ") + e.what());
        }
        const std::string svg = riskbound::render_svg(summary);
        if (svg_path.empty()) {
            const auto dot = summary_path.rfind('.');
            svg_path = (dot == std::string::npos ? summary_path : summary_path.substr(0, dot)) + ".svg";
        }
        std::ofstream out(svg_path, std::ios::binary);
        out << svg;
        if (!out) throw riskbound::Error(riskbound::ErrorKind::ConfigError, "cannot write " + svg_path);
        std::cout << "wrote " << svg_path << '\n';
        return 0;
    } catch (const riskbound::Error& e) {
        return report(e);
    } catch (const std::exception& e) {
        std::cerr << "riskbound: " << e.what() << '\n';
        return kExitNumeric;
    }
}
