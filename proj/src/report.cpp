#include "riskbound/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "riskbound/error.hpp"

namespace riskbound {

namespace {

Json real_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json values(const GridTable& t) {
    Json a = Json::array();
    for (double v : t.values) a.push_back(real_or_null(v));
    return a;
}

Json values(const std::vector<double>& vs) {
    Json a = Json::array();
    for (double v : vs) a.push_back(real_or_null(v));
    return a;
}

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null())
        throw Error(ErrorKind::MissingField, std::string("summary has no '") + key + "'");
    return j.at(key);
}

double number(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_number()) throw Error(ErrorKind::MissingField, std::string("'") + key + "' is not a number");
    return v.get<double>();
}

std::vector<double> numbers(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_array() || v.empty()) throw Error(ErrorKind::MissingField, std::string("'") + key + "' is not a list");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw Error(ErrorKind::MissingField, std::string("'") + key + "' has a non-number");
        out.push_back(e.get<double>());
    }
    return out;
}

std::string fmt(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr double kW = 640.0;
constexpr double kH = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 56.0;
constexpr double kBottom = 50.0;

struct Frame {
    double x0, x1, y0, y1;
    [[nodiscard]] double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); }
    [[nodiscard]] double py(double y) const { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); }
};

void open_svg(std::ostringstream& o, const std::string& title) {
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kW, 0) << "\" height=\"" << fmt(kH, 0)
      << "\" viewBox=\"0 0 " << fmt(kW, 0) << ' ' << fmt(kH, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << fmt(kW / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
}

void axes(std::ostringstream& o, const std::string& xlabel, const std::string& ylabel) {
    o << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kH - kBottom) << "\" x2=\"" << fmt(kW - kRight) << "\" y2=\""
      << fmt(kH - kBottom) << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
      << fmt(kH - kBottom) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt((kLeft + kW - kRight) / 2) << "\" y=\"" << fmt(kH - 12) << "\" text-anchor=\"middle\">"
      << escape(xlabel) << "</text>\n";
    o << "<text x=\"16\" y=\"" << fmt((kTop + kH - kBottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fmt((kTop + kH - kBottom) / 2) << ")\">" << escape(ylabel) << "</text>\n";
}

std::string rate_svg(const Json& s) {
    const auto n = numbers(s, "n");
    const auto mean = numbers(s, "mean");
    const double slope = number(s, "slope");
    const double intercept = number(s, "intercept");
    const auto start = static_cast<std::size_t>(number(s, "fit_start"));
    if (n.size() != mean.size() || n.size() < 2 || start >= n.size())
        throw Error(ErrorKind::MissingField, "rate summary needs matching n and mean lists");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (!(n[i] > 0.0) || !(mean[i] > 0.0)) throw Error(ErrorKind::MissingField, "rate summary has a nonpositive mean");
        lx.push_back(std::log10(n[i]));
        ly.push_back(std::log10(mean[i]));
    }
    const double ln10 = std::log(10.0);
    // Fit is in natural logs: log10 y = slope log10 x + intercept / ln 10.
    auto fit = [&](double x10) { return slope * x10 + intercept / ln10; };
    double ylo = *std::min_element(ly.begin(), ly.end());
    double yhi = *std::max_element(ly.begin(), ly.end());
    ylo = std::min({ylo, fit(lx[start]), fit(lx.back())});
    yhi = std::max({yhi, fit(lx[start]), fit(lx.back())});
    Frame f{std::floor(lx.front() * 2) / 2, std::ceil(lx.back() * 2) / 2, std::floor(ylo * 2) / 2, std::ceil(yhi * 2) / 2};
    if (f.x1 <= f.x0) f.x1 = f.x0 + 0.5;
    if (f.y1 <= f.y0) f.y1 = f.y0 + 0.5;

    std::ostringstream o;
    const std::string scen = s.contains("scenario") && s["scenario"].is_string() ? s["scenario"].get<std::string>() : "";
    open_svg(o, "excess risk vs n" + (scen.empty() ? std::string() : " (" + scen + ")"));
    axes(o, "log10 n", "log10 mean excess");
    for (double t = f.x0; t <= f.x1 + 1e-9; t += 0.5)
        o << "<text x=\"" << fmt(f.px(t)) << "\" y=\"" << fmt(kH - kBottom + 16) << "\" text-anchor=\"middle\">"
          << fmt(t, 1) << "</text>\n";
    for (double t = f.y0; t <= f.y1 + 1e-9; t += 0.5)
        o << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(f.py(t) + 4) << "\" text-anchor=\"end\">" << fmt(t, 1)
          << "</text>\n";
    for (std::size_t i = 0; i < lx.size(); ++i)
        o << "<circle cx=\"" << fmt(f.px(lx[i])) << "\" cy=\"" << fmt(f.py(ly[i])) << "\" r=\"4\" fill=\""
          << (i >= start ? "#1f4e9c" : "#9aa9c4") << "\"/>\n";
    o << "<line x1=\"" << fmt(f.px(lx[start])) << "\" y1=\"" << fmt(f.py(fit(lx[start]))) << "\" x2=\""
      << fmt(f.px(lx.back())) << "\" y2=\"" << fmt(f.py(fit(lx.back()))) << "\" stroke=\"#c0392b\" stroke-width=\"2\"/>\n";
    std::string label = "slope " + fmt(slope, 3);
    if (s.contains("ci_half_width") && s["ci_half_width"].is_number())
        label += " +/- " + fmt(s["ci_half_width"].get<double>(), 3);
    if (s.contains("expected_slope") && s["expected_slope"].is_number())
        label += " (expected " + fmt(s["expected_slope"].get<double>(), 3) + ")";
    o << "<text x=\"" << fmt(kW - kRight - 8) << "\" y=\"" << fmt(kTop + 14) << "\" text-anchor=\"end\" fill=\"#c0392b\">"
      << escape(label) << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

std::string ordering_svg(const Json& s) {
    const Json& groups = field(s, "groups");
    if (!groups.is_array() || groups.empty()) throw Error(ErrorKind::MissingField, "'groups' is empty");
    static const char* keys[] = {"delta_bar", "delta_hat", "delta_tilde"};
    static const char* names[] = {"delta-bar", "delta-hat", "delta-tilde"};
    static const char* colors[] = {"#1f4e9c", "#2e8b57", "#c0392b"};
    double top = 0.0;
    for (const auto& g : groups)
        for (const char* k : keys) top = std::max(top, number(g, k));
    top = top > 0.0 ? top * 1.1 : 1.0;
    Frame f{0.0, static_cast<double>(groups.size()), 0.0, top};

    std::ostringstream o;
    open_svg(o, "bound ordering");
    axes(o, "", "bound");
    for (int i = 0; i <= 4; ++i) {
        const double v = top * i / 4.0;
        o << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(f.py(v) + 4) << "\" text-anchor=\"end\">" << fmt(v, 3)
          << "</text>\n";
    }
    const double slot = f.px(1.0) - f.px(0.0);
    const double bw = slot / 4.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double x = f.px(static_cast<double>(g)) + bw / 2;
        for (int b = 0; b < 3; ++b) {
            const double v = number(groups[g], keys[b]);
            o << "<rect x=\"" << fmt(x + b * bw) << "\" y=\"" << fmt(f.py(v)) << "\" width=\"" << fmt(bw * 0.9)
              << "\" height=\"" << fmt(f.py(0.0) - f.py(v)) << "\" fill=\"" << colors[b] << "\"/>\n";
        }
        if (groups[g].contains("delta_hat_lo") && groups[g].contains("delta_hat_hi")) {
            const double cx = x + bw * 1.45;
            o << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(f.py(number(groups[g], "delta_hat_lo"))) << "\" x2=\""
              << fmt(cx) << "\" y2=\"" << fmt(f.py(number(groups[g], "delta_hat_hi"))) << "\" stroke=\"black\"/>\n";
        }
        const std::string label = groups[g].contains("label") && groups[g]["label"].is_string()
                                      ? groups[g]["label"].get<std::string>()
                                      : "group " + std::to_string(g + 1);
        o << "<text x=\"" << fmt(x + 1.5 * bw) << "\" y=\"" << fmt(kH - kBottom + 16) << "\" text-anchor=\"middle\">"
          << escape(label) << "</text>\n";
    }
    for (int b = 0; b < 3; ++b) {
        const double x = kLeft + 110.0 * b;
        o << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(kTop - 14) << "\" width=\"10\" height=\"10\" fill=\""
          << colors[b] << "\"/>\n";
        o << "<text x=\"" << fmt(x + 14) << "\" y=\"" << fmt(kTop - 5) << "\">" << names[b] << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace

Json to_json(const BoundReport& r) {
    Json j;
    j["grid"] = values(r.grid.points());
    j["phi"] = values(r.phi);
    j["D"] = values(r.D);
    j["U"] = values(r.U);
    j["delta_n"] = real_or_null(r.delta_n);
    j["delta_bar"] = real_or_null(r.delta_bar);
    j["delta_hat"] = r.delta_hat ? real_or_null(*r.delta_hat) : Json(nullptr);
    j["delta_tilde"] = real_or_null(r.delta_tilde);
    if (r.geometric) {
        j["sigma"] = real_or_null(r.geometric->sigma);
        j["r_check"] = values(r.geometric->r_check);
        j["delta_check"] = real_or_null(r.geometric->delta_check);
    } else {
        j["sigma"] = nullptr;
        j["r_check"] = nullptr;
        j["delta_check"] = nullptr;
    }
    return j;
}

Json to_json(const SelectionResult& r) {
    Json j;
    j["method"] = r.method;
    j["k_hat"] = r.k_hat;
    Json models = Json::array();
    for (std::size_t k = 0; k < r.min_risk.size(); ++k) {
        Json m;
        m["min_risk"] = real_or_null(r.min_risk[k]);
        m["penalty"] = k < r.penalty.size() ? real_or_null(r.penalty[k]) : Json(nullptr);
        m["delta_hat"] = k < r.delta_hat.size() ? real_or_null(r.delta_hat[k]) : Json(nullptr);
        models.push_back(m);
    }
    j["per_model"] = models;
    j["certificate"] = real_or_null(r.certificate);
    Json diag = Json::object();
    for (const auto& [k, v] : r.diagnostics) diag[k] = real_or_null(v);
    j["diagnostics"] = diag;
    return j;
}

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw Error(ErrorKind::BadParams, "CSV header is empty");
}

void CsvTable::add_row(std::vector<Cell> row) {
    if (row.size() != header_.size())
        throw Error(ErrorKind::BadParams, "CSV row has " + std::to_string(row.size()) + " cells, header has " +
                                              std::to_string(header_.size()));
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::ostringstream o;
    for (std::size_t i = 0; i < header_.size(); ++i) o << (i ? "," : "") << header_[i];
    o << '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) o << ',';
            std::visit(
                [&o](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) o << format_real(v);
                    else o << v;
                },
                row[i]);
        }
        o << '\n';
    }
    return o.str();
}

std::string render_svg(const Json& summary) {
    if (!summary.is_object() || summary.empty()) throw Error(ErrorKind::MissingField, "summary is empty");
    const Json& kind = field(summary, "kind");
    if (!kind.is_string()) throw Error(ErrorKind::MissingField, "'kind' is not a string");
    const auto k = kind.get<std::string>();
    if (k == "rate") return rate_svg(summary);
    if (k == "ordering") return ordering_svg(summary);
    throw Error(ErrorKind::MissingField, "no plot for summaries of kind '" + k + "'");
}

}  // namespace riskbound
