#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "curvflow/metrics.hpp"

namespace curvflow {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotPanel {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::vector<PlotSeries> series;
};

// Standalone SVG line plot with axes, ticks and a legend with one entry per
// series. Points that are not finite (or not positive on a log axis) are
// skipped. Output depends only on the input. Throws SchemaError when no
// series has a plottable point.
[[nodiscard]] std::string render_svg(const PlotPanel& panel);

struct LabeledRecords {
    std::string label;
    std::vector<MetricRecord> records;
};

// Convergence delta (log axis), quasi-conformal error and sphericity
// variance against the step index.
[[nodiscard]] std::array<PlotPanel, 3> metric_panels(const std::vector<LabeledRecords>& inputs);

// Writes `{prefix}convergence.svg`, `{prefix}conformality.svg` and
// `{prefix}sphericity.svg` into `directory`. Throws IoError.
std::vector<std::filesystem::path> write_metric_plots(const std::vector<LabeledRecords>& inputs,
                                                      const std::filesystem::path& directory,
                                                      const std::string& prefix = "");

}  // namespace curvflow
