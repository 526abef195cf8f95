#pragma once
#include <json.hpp>

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "riskbound/bounds.hpp"
#include "riskbound/selection.hpp"

namespace riskbound {

using Json = nlohmann::ordered_json;

/// Flat object with keys grid, phi, D, U, delta_n, delta_bar, delta_hat, delta_tilde,
/// sigma, r_check, delta_check. Missing optional parts are null.
[[nodiscard]] Json to_json(const BoundReport& report);

/// method, k_hat (1-based), per_model [{min_risk, penalty, delta_hat}], certificate, diagnostics.
[[nodiscard]] Json to_json(const SelectionResult& result);

/// Shortest-round-trip text of a real with 17 significant digits; non-finite values as inf/-inf/nan.
[[nodiscard]] std::string format_real(double v);

/// Comma-separated table with a fixed header. Reals are written with format_real.
class CsvTable {
public:
    using Cell = std::variant<double, long long, std::string>;

    explicit CsvTable(std::vector<std::string> header);

    /// Throws BadParams when the row width differs from the header.
    void add_row(std::vector<Cell> row);
    [[nodiscard]] std::string str() const;
    [[nodiscard]] std::size_t rows() const noexcept { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

/// Static SVG for a summary: log-log rate plot with the fitted line (kind "rate") or grouped
/// bars of delta-bar / delta-hat / delta-tilde (kind "ordering"). Throws MissingField when the
/// summary lacks what the plot needs.
[[nodiscard]] std::string render_svg(const Json& summary);

}  // namespace riskbound
