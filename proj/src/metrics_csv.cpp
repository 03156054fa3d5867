#include "curvflow/metrics_csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "curvflow/errors.hpp"

namespace curvflow {
namespace {

std::string real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_real(const std::string& text, std::size_t line, std::string_view column) {
    const char* begin = text.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw SchemaError("line " + std::to_string(line) + ": column " + std::string(column) + " is not a number: '" +
                          text + "'");
    }
    return v;
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricRecord>& records) {
    for (std::size_t c = 0; c < kMetricColumns.size(); ++c) out << (c ? "," : "") << kMetricColumns[c];
    out << '\n';
    for (const auto& r : records) {
        out << r.step << ',' << real(r.flow_time) << ',' << real(r.area) << ',' << real(r.convergence_delta) << ','
            << real(r.qc_error) << ',' << real(r.sphericity_variance) << ',' << real(r.dirichlet_energy) << ','
            << real(r.area_energy_tilde) << ',' << real(r.conformal_energy_tilde) << ','
            << real(r.min_tri_area_ratio) << ',' << r.status << '\n';
    }
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_metrics_csv(out, records);
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<MetricRecord> read_metrics_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty metrics file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    if (header.size() != kMetricColumns.size()) {
        throw SchemaError("header has " + std::to_string(header.size()) + " columns, expected " +
                          std::to_string(kMetricColumns.size()));
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] != kMetricColumns[c]) {
            throw SchemaError("column " + std::to_string(c + 1) + " is '" + header[c] + "', expected '" +
                              std::string(kMetricColumns[c]) + "'");
        }
    }
    std::vector<MetricRecord> rows;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != kMetricColumns.size()) {
            throw SchemaError("line " + std::to_string(number) + " has " + std::to_string(f.size()) + " fields");
        }
        MetricRecord r;
        const double step = parse_real(f[0], number, kMetricColumns[0]);
        if (!(step >= 0.0) || step != std::floor(step)) {
            throw SchemaError("line " + std::to_string(number) + ": step must be a non-negative integer");
        }
        r.step = static_cast<std::size_t>(step);
        r.flow_time = parse_real(f[1], number, kMetricColumns[1]);
        r.area = parse_real(f[2], number, kMetricColumns[2]);
        r.convergence_delta = parse_real(f[3], number, kMetricColumns[3]);
        r.qc_error = parse_real(f[4], number, kMetricColumns[4]);
        r.sphericity_variance = parse_real(f[5], number, kMetricColumns[5]);
        r.dirichlet_energy = parse_real(f[6], number, kMetricColumns[6]);
        r.area_energy_tilde = parse_real(f[7], number, kMetricColumns[7]);
        r.conformal_energy_tilde = parse_real(f[8], number, kMetricColumns[8]);
        r.min_tri_area_ratio = parse_real(f[9], number, kMetricColumns[9]);
        r.status = f[10];
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw SchemaError("metrics file has a header but no data rows");
    return rows;
}

std::vector<MetricRecord> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_metrics_csv(in);
}

}  // namespace curvflow
