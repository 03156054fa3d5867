#include "curvflow/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "curvflow/errors.hpp"

namespace curvflow {
namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr double kLeft = 84.0;
constexpr double kRight = 24.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 56.0;

constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string escape(const std::string& s) {
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

bool plottable(double y, bool log_y) { return std::isfinite(y) && (!log_y || y > 0.0); }

// Ticks at 1, 2 or 5 times a power of ten, covering [lo, hi].
std::vector<double> linear_ticks(double& lo, double& hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (span / step <= 6.0) break;
    }
    lo = std::floor(lo / step) * step;
    hi = std::ceil(hi / step) * step;
    std::vector<double> ticks;
    for (double t = lo; t <= hi + 0.5 * step; t += step) ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return ticks;
}

}  // namespace

std::string render_svg(const PlotPanel& panel) {
    const bool log_y = panel.log_y;
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const auto& s : panel.series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !plottable(s.y[i], log_y)) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            const double y = log_y ? std::log10(s.y[i]) : s.y[i];
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (!(xmin <= xmax)) throw SchemaError("plot '" + panel.title + "' has no plottable points");
    if (xmax == xmin) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    if (ymax == ymin) {
        const double pad = ymin == 0.0 ? 1.0 : 0.1 * std::abs(ymin);
        ymin -= pad;
        ymax += pad;
    }

    std::vector<double> yticks;
    if (log_y) {
        ymin = std::floor(ymin);
        ymax = std::ceil(ymax);
        if (ymax == ymin) ymax += 1.0;
        const double stride = std::max(1.0, std::ceil((ymax - ymin) / 8.0));
        for (double e = ymin; e <= ymax; e += stride) yticks.push_back(e);
    } else {
        yticks = linear_ticks(ymin, ymax);
    }
    const auto xticks = linear_ticks(xmin, xmax);

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(kWidth / 2.0) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << escape(panel.title) << "</text>\n";

    svg << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    for (double t : xticks) {
        svg << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(sx(t)) << "\" y2=\""
            << num(kTop + ph) << "\"/>\n";
    }
    for (double t : yticks) {
        svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\""
            << num(sy(t)) << "\"/>\n";
    }
    svg << "</g>\n";
    svg << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
        << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    svg << "<g text-anchor=\"middle\">\n";
    for (double t : xticks) {
        svg << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(kTop + ph + 16) << "\">" << label(t) << "</text>\n";
    }
    svg << "</g>\n<g text-anchor=\"end\">\n";
    for (double t : yticks) {
        const std::string text = log_y ? "1e" + label(t) : label(t);
        svg << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(sy(t) + 4) << "\">" << text << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 14.0) << "\" text-anchor=\"middle\">"
        << escape(panel.x_label) << "</text>\n";
    svg << "<text x=\"18\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << num(kTop + ph / 2) << ")\">" << escape(panel.y_label + (log_y ? " (log scale)" : "")) << "</text>\n";

    for (std::size_t k = 0; k < panel.series.size(); ++k) {
        const auto& s = panel.series[k];
        const char* color = kPalette[k % kPalette.size()];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !plottable(s.y[i], log_y)) continue;
            const double y = log_y ? std::log10(s.y[i]) : s.y[i];
            svg << (first ? "" : " ") << num(sx(s.x[i])) << ',' << num(sy(y));
            first = false;
        }
        svg << "\"/>\n";
    }

    svg << "<g class=\"legend\">\n";
    for (std::size_t k = 0; k < panel.series.size(); ++k) {
        const double y = kTop + 14.0 + 16.0 * static_cast<double>(k);
        const double x = kLeft + pw - 150.0;
        svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(y - 4) << "\" x2=\"" << num(x + 20) << "\" y2=\""
            << num(y - 4) << "\" stroke=\"" << kPalette[k % kPalette.size()] << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << num(x + 26) << "\" y=\"" << num(y) << "\">" << escape(panel.series[k].label)
            << "</text>\n";
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

std::array<PlotPanel, 3> metric_panels(const std::vector<LabeledRecords>& inputs) {
    std::array<PlotPanel, 3> panels;
    panels[0] = {"Convergence", "step", "mass-weighted displacement per step", true, {}};
    panels[1] = {"Conformality", "step", "quasi-conformal error", false, {}};
    panels[2] = {"Sphericity", "step", "variance of distance to barycenter (unit area)", false, {}};
    for (const auto& in : inputs) {
        PlotSeries delta{in.label, {}, {}};
        PlotSeries qc{in.label, {}, {}};
        PlotSeries sph{in.label, {}, {}};
        for (const auto& r : in.records) {
            const auto x = static_cast<double>(r.step);
            delta.x.push_back(x);
            delta.y.push_back(r.convergence_delta);
            qc.x.push_back(x);
            qc.y.push_back(r.qc_error);
            sph.x.push_back(x);
            sph.y.push_back(r.sphericity_variance);
        }
        panels[0].series.push_back(std::move(delta));
        panels[1].series.push_back(std::move(qc));
        panels[2].series.push_back(std::move(sph));
    }
    return panels;
}

std::vector<std::filesystem::path> write_metric_plots(const std::vector<LabeledRecords>& inputs,
                                                      const std::filesystem::path& directory,
                                                      const std::string& prefix) {
    const auto panels = metric_panels(inputs);
    const std::array<const char*, 3> names = {"convergence", "conformality", "sphericity"};
    std::vector<std::string> documents;
    for (const auto& p : panels) documents.push_back(render_svg(p));
    std::vector<std::filesystem::path> written;
    for (std::size_t k = 0; k < panels.size(); ++k) {
        const auto path = directory / (prefix + names[k] + ".svg");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << documents[k];
        out.flush();
        if (!out) throw IoError("write failed: " + path.string());
        written.push_back(path);
    }
    return written;
}

}  // namespace curvflow
