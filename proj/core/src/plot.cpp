#include "cfeval/csv.hpp"
#include "cfeval/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace cfeval {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string &s) {
    std::string out;
    for (char c : s) {
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

class Svg {
  public:
    Svg(double width, double height) {
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
             << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width) << ' '
             << num(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
             << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
             << "\" fill=\"white\"/>\n";
    }

    void text(double x, double y, const std::string &s, const char *anchor = "start") {
        out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor
             << "\">" << escape(s) << "</text>\n";
    }
    void line(double x1, double y1, double x2, double y2, const char *stroke = "#444") {
        out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
             << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const char *fill) {
        out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
             << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\"/>\n";
    }
    void circle(double cx, double cy, double r, const char *fill, const char *stroke) {
        out_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
             << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>> &pts, const char *stroke) {
        out_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" points=\"";
        for (std::size_t k = 0; k < pts.size(); ++k) {
            out_ << (k ? " " : "") << num(pts[k].first) << ',' << num(pts[k].second);
        }
        out_ << "\"/>\n";
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

  private:
    std::ostringstream out_;
};

csv::Table require(const fs::path &dir, const char *name) {
    const auto path = dir / name;
    if (!fs::exists(path)) {
        throw ConfigError("plot: missing input " + path.string(), 0, name);
    }
    return csv::Table::read_file(path.string());
}

void save(const fs::path &path, const std::string &text) {
    std::ofstream f{path, std::ios::binary};
    f << text;
    if (!f) throw Error("plot: cannot write " + path.string());
}

// Ordered unique values of a text column, in first-seen order.
std::vector<std::string> levels(const csv::Table &t, std::string_view column) {
    std::vector<std::string> out;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const auto &v = t.text(r, column);
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
}

std::string variant_name(const std::string &approach, const std::string &variant) {
    return approach + " " + variant;
}

std::string density_plot(const csv::Table &dens, const csv::Table &report, std::size_t model) {
    const auto scenarios = levels(dens, "scenario");
    std::vector<std::pair<std::string, std::string>> variants;
    for (std::size_t r = 0; r < report.rows(); ++r) {
        std::pair key{report.text(r, "approach"), report.text(r, "variant")};
        if (std::find(variants.begin(), variants.end(), key) == variants.end()) {
            variants.push_back(key);
        }
    }

    // (approach, variant, scenario) -> (bin centre, density) for the chosen model.
    std::map<std::tuple<std::string, std::string, std::string>,
             std::vector<std::pair<double, double>>>
        curves;
    for (std::size_t r = 0; r < dens.rows(); ++r) {
        if (dens.integer(r, "model_id") != static_cast<long long>(model)) continue;
        const double mid = 0.5 * (dens.number(r, "bin_lo") + dens.number(r, "bin_hi"));
        curves[{dens.text(r, "approach"), dens.text(r, "variant"), dens.text(r, "scenario")}]
            .emplace_back(mid, dens.number(r, "density"));
    }
    std::map<std::tuple<std::string, std::string, std::string>, long long> sample_counts;
    for (std::size_t r = 0; r < report.rows(); ++r) {
        if (report.integer(r, "model_id") != static_cast<long long>(model)) continue;
        sample_counts[{report.text(r, "approach"), report.text(r, "variant"),
                       report.text(r, "scenario")}] = report.integer(r, "n_samples");
    }

    const double pw = 200, ph = 130, margin = 40, top = 40;
    Svg svg{margin + pw * static_cast<double>(variants.size()) + 20,
            top + (ph + margin) * static_cast<double>(scenarios.size())};
    svg.text(margin, 20,
             "Estimated (blue) vs true (black) error densities, model " + std::to_string(model));

    for (std::size_t si = 0; si < scenarios.size(); ++si) {
        for (std::size_t vi = 0; vi < variants.size(); ++vi) {
            const auto &[approach, variant] = variants[vi];
            const double x0 = margin + pw * static_cast<double>(vi);
            const double y0 = top + (ph + margin) * static_cast<double>(si);
            svg.line(x0 + 5, y0 + ph, x0 + pw - 5, y0 + ph);
            svg.text(x0 + pw / 2, y0 + ph + 14,
                     variant_name(approach, variant) + ", " + scenarios[si], "middle");

            const auto &est = curves[{approach, variant, scenarios[si]}];
            const auto &tru = curves[{"true", "true", scenarios[si]}];
            double top_density = 0.0;
            for (const auto *c : {&est, &tru}) {
                for (const auto &p : *c) top_density = std::max(top_density, p.second);
            }
            if (tru.empty()) continue;
            const double xlo = tru.front().first;
            const double xhi = tru.back().first;
            auto project = [&](const std::vector<std::pair<double, double>> &c) {
                std::vector<std::pair<double, double>> pts;
                for (const auto &[x, d] : c) {
                    const double px = x0 + 5 + (pw - 10) * (x - xlo) / (xhi - xlo);
                    const double py = y0 + ph - (ph - 10) * (top_density > 0 ? d / top_density : 0);
                    pts.emplace_back(px, py);
                }
                return pts;
            };
            svg.polyline(project(tru), "#000");
            if (sample_counts[{approach, variant, scenarios[si]}] == 0) {
                svg.text(x0 + pw / 2, y0 + ph / 2, "no plausible locations", "middle");
            } else {
                svg.polyline(project(est), "#1f5fbf");
            }
        }
    }
    return svg.finish();
}

std::string assessment_plot(const csv::Table &report) {
    const auto scenarios = levels(report, "scenario");
    std::vector<std::string> variants;
    for (std::size_t r = 0; r < report.rows(); ++r) {
        const auto name = variant_name(report.text(r, "approach"), report.text(r, "variant"));
        if (std::find(variants.begin(), variants.end(), name) == variants.end()) {
            variants.push_back(name);
        }
    }
    double max_mae = 0.0;
    for (std::size_t r = 0; r < report.rows(); ++r) {
        const double v = report.number(r, "mae_of_means");
        if (std::isfinite(v)) max_mae = std::max(max_mae, v);
    }
    if (max_mae <= 0.0) max_mae = 1.0;

    const double pw = 110, ph = 220, left = 60, top = 40;
    const double panel_w = pw * static_cast<double>(variants.size());
    Svg svg{left + (panel_w + 40) * static_cast<double>(scenarios.size()), top + ph + 60};
    svg.text(left, 20, "MAE of means per model; filled = KS not significant, open = significant");

    for (std::size_t si = 0; si < scenarios.size(); ++si) {
        const double x0 = left + (panel_w + 40) * static_cast<double>(si);
        svg.line(x0, top, x0, top + ph);
        svg.line(x0, top + ph, x0 + panel_w, top + ph);
        svg.text(x0 + panel_w / 2, top + ph + 40, scenarios[si], "middle");
        svg.text(x0 - 4, top + 4, num(max_mae), "end");
        svg.text(x0 - 4, top + ph, "0", "end");
        for (std::size_t vi = 0; vi < variants.size(); ++vi) {
            svg.text(x0 + pw * (static_cast<double>(vi) + 0.5), top + ph + 16, variants[vi],
                     "middle");
        }
        for (std::size_t r = 0; r < report.rows(); ++r) {
            if (report.text(r, "scenario") != scenarios[si]) continue;
            const double v = report.number(r, "mae_of_means");
            const auto name = variant_name(report.text(r, "approach"), report.text(r, "variant"));
            const auto vi = static_cast<double>(
                std::find(variants.begin(), variants.end(), name) - variants.begin());
            const double cx = x0 + pw * (vi + 0.5);
            if (!std::isfinite(v)) {
                svg.text(cx, top + ph - 6, "no plausible locations", "middle");
                continue;
            }
            const double jitter =
                (static_cast<double>(report.integer(r, "model_id") % 10) - 4.5) * 4.0;
            const double cy = top + ph - ph * v / max_mae;
            const bool significant = report.text(r, "significant") == "1";
            svg.circle(cx + jitter, cy, 3, significant ? "none" : "#1f5fbf", "#1f5fbf");
        }
    }
    return svg.finish();
}

std::string decomposition_plot(const csv::Table &dec) {
    const auto scenarios = levels(dec, "scenario");
    static constexpr const char *kParts[] = {"observed_deviation", "calibration_error",
                                             "scenario_spec_error", "total_error"};
    static constexpr const char *kColors[] = {"#777", "#1f5fbf", "#d9822b", "#2a9d4b"};
    std::vector<std::array<double, 4>> means(scenarios.size(), {0, 0, 0, 0});
    std::vector<double> counts(scenarios.size(), 0.0);
    for (std::size_t r = 0; r < dec.rows(); ++r) {
        const auto si = static_cast<std::size_t>(
            std::find(scenarios.begin(), scenarios.end(), dec.text(r, "scenario")) -
            scenarios.begin());
        for (std::size_t k = 0; k < 4; ++k) means[si][k] += dec.number(r, kParts[k]);
        counts[si] += 1.0;
    }
    double extent = 1e-9;
    for (std::size_t si = 0; si < scenarios.size(); ++si) {
        for (double &v : means[si]) {
            v /= std::max(counts[si], 1.0);
            extent = std::max(extent, std::abs(v));
        }
    }

    const double group_w = 200, left = 60, top = 40, ph = 240;
    Svg svg{left + group_w * static_cast<double>(scenarios.size()) + 160, top + ph + 40};
    svg.text(left, 20, "Mean error decomposition across models and locations");
    const double zero = top + ph / 2;
    svg.line(left, zero, left + group_w * static_cast<double>(scenarios.size()), zero);
    for (std::size_t si = 0; si < scenarios.size(); ++si) {
        const double x0 = left + group_w * static_cast<double>(si) + 20;
        for (std::size_t k = 0; k < 4; ++k) {
            const double h = (ph / 2 - 10) * means[si][k] / extent;
            svg.rect(x0 + 36 * static_cast<double>(k), h >= 0 ? zero - h : zero, 30, std::abs(h),
                     kColors[k]);
        }
        svg.text(x0 + 70, top + ph + 20, scenarios[si], "middle");
    }
    const double lx = left + group_w * static_cast<double>(scenarios.size()) + 10;
    for (std::size_t k = 0; k < 4; ++k) {
        svg.rect(lx, top + 20 * static_cast<double>(k), 12, 12, kColors[k]);
        svg.text(lx + 16, top + 10 + 20 * static_cast<double>(k), kParts[k]);
    }
    return svg.finish();
}

} // namespace

std::vector<fs::path> plot(const fs::path &report_dir, std::size_t model_id) {
    const auto report = require(report_dir, "report.csv");
    const auto dens = require(report_dir, "densities.csv");
    const auto dec = require(report_dir, "decomposition.csv");

    std::vector<fs::path> written{report_dir / "density.svg", report_dir / "assessment.svg",
                                  report_dir / "decomposition.svg"};
    save(written[0], density_plot(dens, report, model_id));
    save(written[1], assessment_plot(report));
    save(written[2], decomposition_plot(dec));
    return written;
}

} // namespace cfeval
