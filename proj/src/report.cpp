#include "auctionfda/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "auctionfda/error.hpp"
#include "auctionfda/io.hpp"

namespace auctionfda::report {

void Metadata::add_input(const std::filesystem::path& path) {
    inputs.emplace_back(path.string(), io::sha256_hex(io::read_file(path)));
}

std::string Metadata::block() const {
    std::string out = "# auctionfda " AUCTIONFDA_VERSION "\n";
    out += "# command: " + command + "\n";
    std::string echo;
    for (const auto& [flag, value] : flags) {
        echo += (echo.empty() ? "" : " ") + flag;
        if (!value.empty()) echo += " " + value;
    }
    out += "# flags: " + echo + "\n";
    for (const auto& [path, hash] : inputs) out += "# input: " + path + " sha256=" + hash + "\n";
    for (const auto& [key, value] : notes) out += "# " + key + ": " + value + "\n";
    return out;
}

void write_curves_csv(std::ostream& out, const Metadata& meta, std::span<const PriceCurve> curves) {
    out << meta.block() << "lot_id,t_index,t,value,velocity,acceleration\n";
    for (const auto& c : curves) {
        const std::string id = io::csv_escape(c.lot_id);
        for (std::size_t i = 0; i < c.grid.size(); ++i) {
            out << id << ',' << i + 1 << ',' << io::format_real(c.grid[i]) << ',' << io::format_real(c.values[i])
                << ',' << io::format_real(c.velocity[i]) << ',' << io::format_real(c.acceleration[i]) << '\n';
        }
    }
}

std::map<std::string, CurveSamples> read_curves_csv(const std::filesystem::path& path) {
    const std::string source = path.string();
    const io::CsvTable table = io::read_csv_file(path);
    std::map<std::string, CurveSamples> out;
    if (table.empty_source) return out;
    const std::size_t c_id = io::require_column(table, "lot_id", source);
    const std::size_t c_idx = io::require_column(table, "t_index", source);
    const std::size_t c_val = io::require_column(table, "value", source);
    const std::size_t c_vel = io::require_column(table, "velocity", source);
    const std::size_t c_acc = io::require_column(table, "acceleration", source);
    for (const auto& row : table.rows) {
        auto real = [&](std::size_t col, const char* name) {
            auto v = io::parse_real(row.fields[col]);
            if (!v) throw ParseError(source, row.line, std::string("invalid ") + name + " '" + row.fields[col] + "'");
            return *v;
        };
        CurveSamples& s = out[row.fields[c_id]];
        const auto idx = io::parse_integer(row.fields[c_idx]);
        if (!idx || *idx != static_cast<long long>(s.values.size()) + 1) {
            throw ParseError(source, row.line, "t_index must run 1, 2, ... within each lot");
        }
        s.values.push_back(real(c_val, "value"));
        s.velocity.push_back(real(c_vel, "velocity"));
        s.acceleration.push_back(real(c_acc, "acceleration"));
    }
    return out;
}

void write_coefficients_csv(std::ostream& out, const Metadata& meta, std::span<const RegressionResult> results) {
    out << meta.block() << "covariate,response,t_index,beta,se,ci_lo,ci_hi,significant\n";
    for (const auto& r : results) {
        const std::string_view kind = to_string(r.kind);
        for (const auto& c : r.curves) {
            for (std::size_t i = 0; i < c.beta.size(); ++i) {
                out << c.covariate << ',' << kind << ',' << i + 1 << ',' << io::format_real(c.beta[i]) << ','
                    << io::format_real(c.se[i]) << ',' << io::format_real(c.ci_lo[i]) << ','
                    << io::format_real(c.ci_hi[i]) << ',' << (c.significant[i] ? "true" : "false") << '\n';
            }
        }
    }
}

void write_sensitivity_csv(std::ostream& out, const Metadata& meta, const SensitivityTable& table) {
    out << meta.block() << "p,lambda,rmse,minimum,notes\n";
    for (std::size_t i = 0; i < table.cells.size(); ++i) {
        const auto& cell = table.cells[i];
        out << cell.degree << ',' << io::format_real(cell.lambda) << ','
            << (cell.rmse ? io::format_real(*cell.rmse) : "") << ','
            << (table.best && *table.best == i ? "true" : "false") << ',' << io::csv_escape(cell.note) << '\n';
    }
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kPanelHeight = 360.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 44.0;

std::string xml_escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) { return io::format_fixed(v, 2); }

struct Panel {
    double y0;  // top of the panel in SVG coordinates
    double lo;
    double hi;

    double px(double t) const { return kLeft + t * (kWidth - kLeft - kRight); }
    double py(double v) const {
        const double h = kPanelHeight - kTop - kBottom;
        return y0 + kTop + (hi - v) / (hi - lo) * h;
    }
};

Panel make_panel(double y0, double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    return {y0, lo - pad, hi + pad};
}

void axes(std::ostringstream& s, const Panel& p, const std::string& title, const std::string& ylabel) {
    const double x0 = p.px(0.0);
    const double x1 = p.px(1.0);
    const double ytop = p.y0 + kTop;
    const double ybot = p.y0 + kPanelHeight - kBottom;
    s << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(p.y0 + 22) << "\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
    s << "<line x1=\"" << num(x0) << "\" y1=\"" << num(ybot) << "\" x2=\"" << num(x1) << "\" y2=\"" << num(ybot)
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << num(x0) << "\" y1=\"" << num(ytop) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(ybot)
      << "\" stroke=\"black\"/>\n";
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        s << "<line x1=\"" << num(p.px(t)) << "\" y1=\"" << num(ybot) << "\" x2=\"" << num(p.px(t)) << "\" y2=\""
          << num(ybot + 4) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << num(p.px(t)) << "\" y=\"" << num(ybot + 16) << "\" text-anchor=\"middle\" font-size=\"10\">"
          << io::format_real(t) << "</text>\n";
    }
    for (int k = 0; k <= 4; ++k) {
        const double v = p.lo + (p.hi - p.lo) * k / 4.0;
        s << "<line x1=\"" << num(x0 - 4) << "\" y1=\"" << num(p.py(v)) << "\" x2=\"" << num(x0) << "\" y2=\""
          << num(p.py(v)) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(p.py(v) + 3) << "\" text-anchor=\"end\" font-size=\"10\">"
          << io::format_fixed(v, 3) << "</text>\n";
    }
    s << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(ybot + 34)
      << "\" text-anchor=\"middle\" font-size=\"11\">normalized time</text>\n";
    s << "<text x=\"14\" y=\"" << num((ytop + ybot) / 2) << "\" font-size=\"11\" transform=\"rotate(-90 14 "
      << num((ytop + ybot) / 2) << ")\" text-anchor=\"middle\">" << xml_escape(ylabel) << "</text>\n";
}

std::string header(double height) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           num(kWidth) + "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(height) +
           "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string curves_svg(std::span<const PriceCurve> curves, const std::string& title) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : curves) {
        for (double v : c.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const Panel p = make_panel(0.0, lo, hi);
    std::ostringstream s;
    s << header(kPanelHeight);
    axes(s, p, title, "price curve");
    for (const auto& c : curves) {
        s << "<polyline data-lot=\"" << xml_escape(c.lot_id) << "\" fill=\"none\" stroke=\"steelblue\" stroke-opacity=\"0.5\" points=\"";
        for (std::size_t i = 0; i < c.values.size(); ++i) {
            s << (i ? " " : "") << num(p.px(c.grid[i])) << ',' << num(p.py(c.values[i]));
        }
        s << "\"/>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::string coefficient_svg(std::span<const RegressionResult> results, std::size_t covariate) {
    std::ostringstream s;
    s << header(kPanelHeight * static_cast<double>(std::max<std::size_t>(1, results.size())));
    double y0 = 0.0;
    for (const auto& r : results) {
        const CoefficientCurve& c = r.curves.at(covariate);
        const std::size_t n = c.beta.size();
        double lo = 0.0;
        double hi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            lo = std::min({lo, c.ci_lo[i], c.beta[i]});
            hi = std::max({hi, c.ci_hi[i], c.beta[i]});
        }
        const Panel p = make_panel(y0, lo, hi);
        auto t_at = [n](std::size_t i) { return n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0; };
        std::string level = io::format_fixed(100.0 * (1.0 - r.alpha), 1);
        axes(s, p, c.covariate + ", " + std::string(to_string(r.kind)) + " (" + level + "% band)", "beta(t)");
        s << "<polygon fill=\"lightgray\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < n; ++i) s << (i ? " " : "") << num(p.px(t_at(i))) << ',' << num(p.py(c.ci_hi[i]));
        for (std::size_t i = n; i-- > 0;) s << ' ' << num(p.px(t_at(i))) << ',' << num(p.py(c.ci_lo[i]));
        s << "\"/>\n";
        s << "<line x1=\"" << num(p.px(0.0)) << "\" y1=\"" << num(p.py(0.0)) << "\" x2=\"" << num(p.px(1.0))
          << "\" y2=\"" << num(p.py(0.0)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
        s << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < n; ++i) s << (i ? " " : "") << num(p.px(t_at(i))) << ',' << num(p.py(c.beta[i]));
        s << "\"/>\n";
        y0 += kPanelHeight;
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace auctionfda::report
