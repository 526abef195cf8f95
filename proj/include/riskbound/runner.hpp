#pragma once
#include <filesystem>
#include <string>

#include "riskbound/config.hpp"
#include "riskbound/report.hpp"

namespace riskbound {

struct RunArtifacts {
    std::string csv;
    Json summary;
    std::string svg;   ///< empty unless output.plot is set
    std::string line;  ///< one-line human summary
};

/// Runs the configured experiment without touching the file system.
[[nodiscard]] RunArtifacts run_experiment(const RunConfig& config);

/// Writes the CSV, the JSON summary and the optional SVG into out_dir (created if missing).
void write_artifacts(const RunConfig& config, const RunArtifacts& artifacts, const std::filesystem::path& out_dir);

/// Serialized form of a summary; plot(parse(dump(s))) is byte-identical to plot(s).
[[nodiscard]] std::string dump_summary(const Json& summary);

}  // namespace riskbound
