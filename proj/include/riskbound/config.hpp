#pragma once
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "riskbound/bounds.hpp"
#include "riskbound/scenarios.hpp"

namespace riskbound {

enum class ExperimentKind { Rate, Prop2, Ordering, Bounds, Selection, Coverage };

[[nodiscard]] const char* to_string(ExperimentKind kind) noexcept;

struct ScenarioSpec {
    std::string name = "finite_dim";  ///< cube | finite_dim | tsybakov | finite_support | nested_regression
    std::size_t N = 15;
    std::size_t d = 3;
    int half_width = 2;
    double kappa = 1.0;
    double rho = 0.5;
    double h = 0.5;
    std::size_t half_grid = 32;
    std::size_t support = 8;
    std::size_t members = 6;
    std::size_t models = 4;
};

struct MethodSpec {
    std::string name = "erm";   ///< erm | penalized | comparison
    std::string variant = "v1"; ///< penalized: v1 | v2 | dimension | rademacher
    double K_hat = 5.0;
    double K_tilde = 5.0;
    double epsilon = 0.5;       ///< v2 only
    double link_D = 1.0;        ///< v2 quadratic link u^2 / D
};

struct RunConfig {
    ExperimentKind kind = ExperimentKind::Rate;
    ScenarioSpec scenario;
    MethodSpec method;
    BoundConstants constants;
    ExperimentPlan plan;
    std::size_t n = 256;
    std::size_t trials = 100;
    std::vector<std::size_t> N_list{3, 7, 15, 31};
    std::size_t phi_replicates = 400;
    std::size_t sign_draws = 512;
    double slope_tolerance = 0.2;
    std::string csv = "results.csv";
    std::string summary = "summary.json";
    std::string plot;  ///< optional SVG written next to the summary

    /// Cross-field checks; throws ConfigError (or BadParams from the constants).
    void validate() const;
};

/// Parses `key = value` lines with dotted keys; '#' starts a comment. Lists are comma separated.
/// Unknown or repeated keys and malformed values raise ConfigError. The result is validated.
[[nodiscard]] RunConfig parse_config(std::string_view text);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

}  // namespace riskbound
