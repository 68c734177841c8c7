#include "radoncurv/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace radoncurv {

nlohmann::json grid_to_json(const GridDomain& domain) {
  nlohmann::json extent = nlohmann::json::array();
  for (const auto& e : domain.extent()) extent.push_back({e.lo, e.hi});
  return {{"dim", domain.dim()}, {"extent", extent}, {"n", domain.n()}, {"margin", domain.margin()}};
}

GridDomain grid_from_json(const nlohmann::json& j) {
  const int dim = j.at("dim").get<int>();
  std::vector<Interval> extent;
  for (const auto& e : j.at("extent")) extent.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
  return make_grid(dim, std::move(extent), j.at("n").get<std::vector<int>>(), j.at("margin").get<int>());
}

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

nlohmann::json report_to_json(const CurvatureReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : report.records) {
    records.push_back({{"direction", r.direction},
                       {"function", r.function},
                       {"X", vec_json(r.X)},
                       {"Y", vec_json(r.Y)},
                       {"sff_value", r.sff_value},
                       {"hessian_value", r.hessian_value},
                       {"abs_residual", r.abs_residual},
                       {"rel_residual", r.rel_residual}});
  }
  return {{"embedding", report.embedding},
          {"grid", report.grid},
          {"y", vec_json(report.y)},
          {"tolerance", report.tolerance},
          {"seed", report.seed},
          {"hessian_route", to_string(report.route)},
          {"basis_size", report.basis_size},
          {"annihilator_residual", report.annihilator_residual},
          {"records", records},
          {"errors", report.errors},
          {"max_rel_residual", report.max_rel_residual},
          {"pass", report.pass}};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void append_json(std::string& out, const nlohmann::json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad + nlohmann::json(it.key()).dump() + ": ";
      append_json(out, it.value(), depth + 1);
    }
    out += "\n" + close_pad + "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) out += ",\n";
      out += pad;
      append_json(out, j[i], depth + 1);
    }
    out += "\n" + close_pad + "]";
  } else if (j.is_number_float()) {
    const double v = j.get<double>();
    out += std::isfinite(v) ? format_double(v) : "null";
  } else {
    out += j.dump();
  }
}

}  // namespace

std::string json_text(const nlohmann::json& j) {
  std::string out;
  append_json(out, j, 0);
  out += '\n';
  return out;
}

std::string vector_to_csv(const Eigen::VectorXd& values) {
  std::string out = "value\n";
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out += format_double(values[i]);
    out += '\n';
  }
  return out;
}

Eigen::VectorXd vector_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> vals;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == "value") continue;
    }
    std::size_t used = 0;
    const double v = std::stod(line, &used);
    if (used != line.size()) throw std::invalid_argument("vector_from_csv: bad line '" + line + "'");
    vals.push_back(v);
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::string sampled_transform_to_csv(const SampledTransform& t, const Chart& chart) {
  std::string out;
  for (const auto& name : chart.axis_names) out += name + ",";
  out += "value\n";
  for (std::size_t j = 0; j < t.values.size(); ++j) {
    for (Eigen::Index a = 0; a < t.chart_samples[j].size(); ++a) {
      out += format_double(t.chart_samples[j][a]);
      out += ',';
    }
    out += format_double(t.values[j]);
    out += '\n';
  }
  return out;
}

std::string to_pgm16(std::span<const double> values, int width, int height) {
  if (width < 1 || height < 1 || values.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("to_pgm16: image size does not match data");
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
  out.reserve(out.size() + 2 * values.size());
  for (double v : values) {
    unsigned level = 0;
    if (hi > lo) level = static_cast<unsigned>(std::lround((v - lo) / (hi - lo) * 65535.0));
    out.push_back(static_cast<char>((level >> 8) & 0xFF));
    out.push_back(static_cast<char>(level & 0xFF));
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace radoncurv
