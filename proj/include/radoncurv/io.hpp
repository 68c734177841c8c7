#ifndef RADONCURV_IO_HPP
#define RADONCURV_IO_HPP

#include "radoncurv/curvature.hpp"
#include "radoncurv/transform.hpp"

#include <filesystem>
#include <string>

namespace radoncurv {

/// {dim, extent: [[lo, hi], ...], n: [...], margin}
nlohmann::json grid_to_json(const GridDomain& domain);
GridDomain grid_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const CurvatureReport& report);

/// Decimal text with 17 significant digits.
std::string format_double(double v);

/// JSON text with every floating-point number printed by format_double
/// (non-finite values become null). Two-space indentation, sorted keys.
std::string json_text(const nlohmann::json& j);

/// Header row "value", then one entry per line in C-order node indexing.
std::string vector_to_csv(const Eigen::VectorXd& values);
Eigen::VectorXd vector_from_csv(const std::string& text);

/// Header row of chart axis names plus "value".
std::string sampled_transform_to_csv(const SampledTransform& t, const Chart& chart);

/// Binary 16-bit PGM (P5, max value 65535, big-endian samples), min-max
/// normalized. A constant image maps to zero.
std::string to_pgm16(std::span<const double> values, int width, int height);

/// Writes to a temporary sibling, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace radoncurv

#endif  // RADONCURV_IO_HPP
