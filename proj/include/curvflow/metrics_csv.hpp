#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "curvflow/metrics.hpp"

namespace curvflow {

// Column order of the per-step metrics file. The header row is mandatory.
inline constexpr std::array<std::string_view, 11> kMetricColumns = {
    "step",      "flow_time", "area",    "convergence_delta",  "qc_error", "sphericity_variance",
    "dirichlet_energy", "tildeEA", "tildeEC", "min_tri_area_ratio", "status"};

// Reals use 17 significant digits; infinities and NaN are written as inf
// and nan.
void write_metrics_csv(std::ostream& out, const std::vector<MetricRecord>& records);
// Throws IoError.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRecord>& records);

// Throws SchemaError on a wrong header, malformed rows or when there are no
// data rows. Fields outside the schema keep their defaults.
[[nodiscard]] std::vector<MetricRecord> read_metrics_csv(std::istream& in);
// Throws IoError when the file cannot be opened.
[[nodiscard]] std::vector<MetricRecord> read_metrics_csv(const std::filesystem::path& path);

}  // namespace curvflow
