#include "cli.hpp"

#include "radoncurv/curvature.hpp"
#include "radoncurv/embedding.hpp"
#include "radoncurv/io.hpp"
#include "radoncurv/test_functions.hpp"
#include "radoncurv/transform.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <random>

namespace radoncurv::cli {

namespace {

using nlohmann::json;

const char* command_name(Command c) {
  switch (c) {
    case Command::Sinogram: return "sinogram";
    case Command::Verify: return "verify";
    case Command::Kernel: return "kernel";
    case Command::DiracDemo: return "dirac-demo";
  }
  return "?";
}

RunConfig defaults_for(Command c) {
  RunConfig cfg;
  cfg.command = c;
  switch (c) {
    case Command::Sinogram:
      break;
    case Command::Verify:
      break;
    case Command::Kernel:
      cfg.grid_n = 32;
      cfg.angles = 1;
      cfg.offsets = 64;
      cfg.t_samples = 128;
      break;
    case Command::DiracDemo:
      cfg.embedding = "dirac";
      cfg.grid_n = 64;
      break;
  }
  return cfg;
}

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

// One place that knows every setting by its flag name; used for both the
// config file and the flags themselves.
void apply_setting(RunConfig& cfg, const std::string& key, const json& v) {
  if (key == "dim") cfg.dim = get_as<int>(v, key);
  else if (key == "grid-n") cfg.grid_n = get_as<int>(v, key);
  else if (key == "extent") {
    const auto e = get_as<std::vector<double>>(v, key);
    if (e.size() != 2) throw ConfigError("--extent takes two numbers: lo hi");
    cfg.extent_lo = e[0];
    cfg.extent_hi = e[1];
  } else if (key == "margin") cfg.margin = get_as<int>(v, key);
  else if (key == "embedding") cfg.embedding = get_as<std::string>(v, key);
  else if (key == "radius") cfg.radius = get_as<double>(v, key);
  else if (key == "t-samples") cfg.t_samples = get_as<int>(v, key);
  else if (key == "s-max") cfg.s_max = get_as<double>(v, key);
  else if (key == "kernel-order") cfg.kernel_order = get_as<int>(v, key);
  else if (key == "angles") cfg.angles = get_as<int>(v, key);
  else if (key == "offsets") cfg.offsets = get_as<int>(v, key);
  else if (key == "f") cfg.f = get_as<std::string>(v, key);
  else if (key == "width") cfg.width = get_as<double>(v, key);
  else if (key == "y") cfg.y = get_as<std::vector<double>>(v, key);
  else if (key == "directions") cfg.directions = get_as<int>(v, key);
  else if (key == "pool-size") cfg.pool_size = get_as<int>(v, key);
  else if (key == "tol") cfg.tol = get_as<double>(v, key);
  else if (key == "seed") cfg.seed = get_as<std::uint64_t>(v, key);
  else if (key == "route") cfg.route = get_as<std::string>(v, key);
  else if (key == "basis-csv") cfg.basis_csv = get_as<bool>(v, key);
  else if (key == "out-dir") cfg.out_dir = get_as<std::string>(v, key);
  else throw ConfigError("unknown config key '" + key + "'");
}

struct FlagValues {
  std::optional<int> dim, grid_n, margin, t_samples, kernel_order, angles, offsets, directions,
      pool_size;
  std::optional<double> radius, s_max, width, tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> embedding, f, route, out_dir, config;
  std::vector<double> extent, y;
  bool basis_csv = false;
};

void add_options(CLI::App& app, FlagValues& v) {
  app.add_option("--config", v.config, "JSON file with settings; flags override it");
  app.add_option("--dim", v.dim, "grid dimension (line and circle need 2)");
  app.add_option("--grid-n", v.grid_n, "nodes per axis");
  app.add_option("--extent", v.extent, "lo hi of every axis")->expected(2)->delimiter(',');
  app.add_option("--margin", v.margin, "margin band width in nodes");
  app.add_option("--embedding", v.embedding, "dirac, line or circle");
  app.add_option("--radius", v.radius, "circle radius");
  app.add_option("--t-samples", v.t_samples, "quadrature samples per line or circle");
  app.add_option("--s-max", v.s_max, "largest line offset in the chart");
  app.add_option("--kernel-order", v.kernel_order, "1 (linear) or 3 (cubic)");
  app.add_option("--angles", v.angles, "angle samples");
  app.add_option("--offsets", v.offsets, "offset samples");
  app.add_option("--f", v.f, "test function: gaussian, bump, two-bumps, zero");
  app.add_option("--width", v.width, "gaussian width or bump radius");
  app.add_option("--y", v.y, "chart point, comma separated")->delimiter(',');
  app.add_option("--directions", v.directions, "random direction pairs");
  app.add_option("--pool-size", v.pool_size, "annihilator pool size");
  app.add_option("--tol", v.tol, "relative residual tolerance");
  app.add_option("--seed", v.seed, "random seed");
  app.add_option("--route", v.route, "Hessian route: fd, analytic or pairing");
  app.add_flag("--basis-csv", v.basis_csv, "also write the kernel basis");
  app.add_option("--out-dir", v.out_dir, "output directory");
}

json flags_to_json(const FlagValues& v) {
  json j = json::object();
  auto put = [&](const char* key, const auto& opt) {
    if (opt) j[key] = *opt;
  };
  put("dim", v.dim);
  put("grid-n", v.grid_n);
  put("margin", v.margin);
  put("t-samples", v.t_samples);
  put("kernel-order", v.kernel_order);
  put("angles", v.angles);
  put("offsets", v.offsets);
  put("directions", v.directions);
  put("pool-size", v.pool_size);
  put("radius", v.radius);
  put("s-max", v.s_max);
  put("width", v.width);
  put("tol", v.tol);
  put("seed", v.seed);
  put("embedding", v.embedding);
  put("f", v.f);
  put("route", v.route);
  put("out-dir", v.out_dir);
  if (!v.extent.empty()) j["extent"] = v.extent;
  if (!v.y.empty()) j["y"] = v.y;
  if (v.basis_csv) j["basis-csv"] = true;
  return j;
}

GridDomain build_grid(const RunConfig& cfg) {
  std::vector<Interval> extent(static_cast<std::size_t>(cfg.dim), {cfg.extent_lo, cfg.extent_hi});
  std::vector<int> n(static_cast<std::size_t>(cfg.dim), cfg.grid_n);
  return make_grid(cfg.dim, std::move(extent), std::move(n), cfg.margin);
}

FamilyEmbedding build_embedding(const RunConfig& cfg, const GridDomain& grid) {
  if (cfg.embedding == "dirac") return dirac_embedding(grid, kernel_order_from_int(cfg.kernel_order));
  if (cfg.kernel_order != 3) throw ConfigError("--kernel-order 1 is only available for dirac");
  if (cfg.embedding == "line") return line_embedding(grid, cfg.t_samples, cfg.s_max);
  return circle_embedding(grid, cfg.radius, cfg.t_samples);
}

ChartPoint chart_point(const RunConfig& cfg, const FamilyEmbedding& emb) {
  const Chart& chart = emb.chart();
  ChartPoint y(chart.k());
  if (!cfg.y.empty()) {
    if (static_cast<int>(cfg.y.size()) != chart.k()) {
      throw ConfigError("--y needs " + std::to_string(chart.k()) + " coordinates for this embedding");
    }
    for (int a = 0; a < chart.k(); ++a) y[a] = cfg.y[static_cast<std::size_t>(a)];
    return y;
  }
  // middle half of the chart box
  std::mt19937_64 rng(cfg.seed);
  for (int a = 0; a < chart.k(); ++a) {
    const Interval b = chart.box[static_cast<std::size_t>(a)];
    std::uniform_real_distribution<double> u(b.lo + 0.25 * b.width(), b.hi - 0.25 * b.width());
    y[a] = u(rng);
  }
  return y;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

int cmd_sinogram(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.embedding != "line") throw ConfigError("sinogram needs --embedding line");
  const GridDomain grid = build_grid(cfg);
  const FamilyEmbedding emb = build_embedding(cfg, grid);
  const TestFunction f = builtin_test_function(grid, cfg.f, cfg.width);
  const auto samples = sinogram_samples(emb, cfg.angles, cfg.offsets);
  const SampledTransform t = radon_forward(emb, f, samples);
  for (const auto& w : t.warnings) err << "warning: " << w << "\n";

  ensure_dir(cfg.out_dir);
  write_file_atomic(cfg.out_dir / "sinogram.csv", sampled_transform_to_csv(t, emb.chart()));
  write_file_atomic(cfg.out_dir / "sinogram.pgm", to_pgm16(t.values, cfg.offsets, cfg.angles));
  out << "sinogram: " << cfg.angles << " angles x " << cfg.offsets << " offsets -> "
      << (cfg.out_dir / "sinogram.csv").string() << "\n";
  return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const GridDomain grid = build_grid(cfg);
  const FamilyEmbedding emb = build_embedding(cfg, grid);
  if (emb.kernel_order() != KernelOrder::Cubic) throw ConfigError("verify needs --kernel-order 3");
  const ChartPoint y = chart_point(cfg, emb);
  if (cfg.pool_size <= emb.chart().k()) {
    throw ConfigError("--pool-size must exceed the chart dimension " + std::to_string(emb.chart().k()));
  }
  const auto pool = annihilator_pool(emb, y, static_cast<std::size_t>(cfg.pool_size), cfg.seed);

  VerifyOptions options;
  options.n_directions = static_cast<std::size_t>(cfg.directions);
  options.tol = cfg.tol;
  options.seed = cfg.seed;
  options.route = hessian_route_from_string(cfg.route);
  const CurvatureReport report = verify_curvature_theorem(emb, y, pool, options);

  ensure_dir(cfg.out_dir);
  write_file_atomic(cfg.out_dir / "report.json", json_text(report_to_json(report)));
  out << "verify: " << cfg.embedding << " basis " << report.basis_size << ", "
      << report.records.size() << " comparisons, max relative residual "
      << format_double(report.max_rel_residual) << " (tol " << format_double(cfg.tol) << ") "
      << (report.pass ? "PASS" : "FAIL") << "\n";
  for (const auto& e : report.errors) out << "  " << e << "\n";
  return report.pass ? 0 : 1;
}

int cmd_kernel(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const GridDomain grid = build_grid(cfg);
  const FamilyEmbedding emb = build_embedding(cfg, grid);
  std::vector<ChartPoint> samples;
  if (cfg.embedding == "line") {
    samples = sinogram_samples(emb, cfg.angles, cfg.offsets);
  } else if (cfg.embedding == "dirac") {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!grid.in_margin(i)) samples.push_back(grid.node(i));
    }
  } else {
    const std::vector<int> counts(static_cast<std::size_t>(emb.chart().k()), cfg.offsets);
    samples = chart_grid_samples(emb.chart(), counts);
  }
  const double entries = static_cast<double>(samples.size()) * static_cast<double>(grid.size());
  if (entries > kOperatorEntryCap) {
    throw ConfigError("operator matrix would have " + format_double(entries) +
                      " entries, above the cap of " + format_double(kOperatorEntryCap));
  }
  const OperatorMatrix op = operator_matrix(emb, samples);
  const KernelDiagnostics d = kernel_diagnostics(op, grid);

  double worst = 0.0;
  for (double r : d.residuals) worst = std::max(worst, r);
  json j = {{"embedding", emb.descriptor()},
            {"grid", grid_to_json(grid)},
            {"rows", samples.size()},
            {"interior_size", d.interior_size},
            {"rank", d.rank},
            {"kernel_dim", d.kernel_dim},
            {"basis_size", d.kernel_basis.cols()},
            {"sigma_max", d.sigma_max},
            {"residuals", d.residuals},
            {"max_residual", worst}};
  ensure_dir(cfg.out_dir);
  write_file_atomic(cfg.out_dir / "kernel.json", json_text(j));
  if (cfg.basis_csv) {
    std::string csv;
    for (Eigen::Index c = 0; c < d.kernel_basis.cols(); ++c) csv += (c ? ",v" : "v") + std::to_string(c);
    csv += '\n';
    for (Eigen::Index r = 0; r < d.kernel_basis.rows(); ++r) {
      for (Eigen::Index c = 0; c < d.kernel_basis.cols(); ++c) {
        if (c) csv += ',';
        csv += format_double(d.kernel_basis(r, c));
      }
      csv += '\n';
    }
    write_file_atomic(cfg.out_dir / "kernel_basis.csv", csv);
  }
  out << "kernel: " << samples.size() << " rows, " << d.interior_size << " interior nodes, rank "
      << d.rank << ", kernel_dim " << d.kernel_dim << ", max residual " << format_double(worst) << "\n";
  return 0;
}

int cmd_dirac_demo(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const GridDomain grid = build_grid(cfg);
  const FamilyEmbedding emb = dirac_embedding(grid, kernel_order_from_int(cfg.kernel_order));
  const TestFunction f = builtin_test_function(grid, cfg.f, cfg.width);
  if (!f.support_ok) err << "warning: test function clipped at the margin\n";

  std::vector<ChartPoint> nodes;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.in_margin(i)) continue;
    nodes.push_back(grid.node(i));
    index.push_back(i);
  }
  const SampledTransform t = radon_forward(emb, f, nodes);

  std::string csv;
  for (const auto& name : emb.chart().axis_names) csv += name + ",";
  csv += "f,value\n";
  double worst = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double fv = f.values[static_cast<Eigen::Index>(index[j])];
    worst = std::max(worst, std::fabs(t.values[j] - fv));
    for (Eigen::Index a = 0; a < nodes[j].size(); ++a) csv += format_double(nodes[j][a]) + ",";
    csv += format_double(fv) + "," + format_double(t.values[j]) + "\n";
  }
  const bool pass = worst <= 1e-12;
  json j = {{"grid", grid_to_json(grid)},
            {"f", cfg.f},
            {"nodes", nodes.size()},
            {"max_abs_error", worst},
            {"tolerance", 1e-12},
            {"pass", pass}};
  ensure_dir(cfg.out_dir);
  write_file_atomic(cfg.out_dir / "dirac_demo.csv", csv);
  write_file_atomic(cfg.out_dir / "dirac_demo.json", json_text(j));
  out << "dirac-demo: " << nodes.size() << " interior nodes, max |R f - f| = " << format_double(worst)
      << (pass ? " PASS" : " FAIL") << "\n";
  return pass ? 0 : 1;
}

}  // namespace

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Generalized Radon transforms and the curvature of distribution families"};
  app.require_subcommand(1);
  FlagValues values;
  std::vector<std::pair<Command, CLI::App*>> subs;
  for (Command c : {Command::Sinogram, Command::Verify, Command::Kernel, Command::DiracDemo}) {
    const char* help = "";
    switch (c) {
      case Command::Sinogram: help = "line transform of a built-in function: CSV and PGM"; break;
      case Command::Verify: help = "second fundamental form vs Hessian of the transform"; break;
      case Command::Kernel: help = "rank and kernel of the sampled operator matrix"; break;
      case Command::DiracDemo: help = "delta family reproduces nodal values"; break;
    }
    CLI::App* sub = app.add_subcommand(command_name(c), help);
    add_options(*sub, values);
    subs.emplace_back(c, sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  Command command = Command::Verify;
  for (const auto& [c, sub] : subs) {
    if (sub->parsed()) command = c;
  }
  RunConfig cfg = defaults_for(command);
  if (values.config) {
    json file;
    try {
      file = json::parse(read_file(*values.config));
    } catch (const json::exception& e) {
      throw ConfigError("cannot parse " + *values.config + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
    if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
    for (auto it = file.begin(); it != file.end(); ++it) apply_setting(cfg, it.key(), it.value());
  }
  const json flags = flags_to_json(values);
  for (auto it = flags.begin(); it != flags.end(); ++it) apply_setting(cfg, it.key(), it.value());
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(c.dim >= 1 && c.dim <= 3, "--dim must be 1, 2 or 3");
  require(c.grid_n >= 8, "--grid-n must be >= 8");
  require(std::isfinite(c.extent_lo) && std::isfinite(c.extent_hi) && c.extent_lo < c.extent_hi,
          "--extent needs lo < hi");
  require(c.margin >= 3, "--margin must be >= 3");
  require(2 * c.margin < c.grid_n - 1, "--margin leaves no interior");
  require(c.embedding == "dirac" || c.embedding == "line" || c.embedding == "circle",
          "--embedding must be dirac, line or circle");
  require(c.embedding == "dirac" || c.dim == 2, "line and circle embeddings need --dim 2");
  require(c.radius > 0.0, "--radius must be > 0");
  require(c.t_samples >= 64, "--t-samples must be >= 64");
  require(!c.s_max || *c.s_max > 0.0, "--s-max must be > 0");
  require(c.kernel_order == 1 || c.kernel_order == 3, "--kernel-order must be 1 or 3");
  require(c.angles >= 1, "--angles must be >= 1");
  require(c.offsets >= 1, "--offsets must be >= 1");
  require(c.f == "gaussian" || c.f == "bump" || c.f == "two-bumps" || c.f == "zero",
          "--f must be gaussian, bump, two-bumps or zero");
  require(std::isfinite(c.width), "--width must be finite");
  for (double v : c.y) require(std::isfinite(v), "--y must be finite");
  require(c.directions >= 1, "--directions must be >= 1");
  require(c.pool_size >= 2, "--pool-size must be >= 2");
  require(c.tol > 0.0 && std::isfinite(c.tol), "--tol must be > 0");
  require(c.route == "fd" || c.route == "analytic" || c.route == "pairing",
          "--route must be fd, analytic or pairing");
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  switch (config.command) {
    case Command::Sinogram: return cmd_sinogram(config, out, err);
    case Command::Verify: return cmd_verify(config, out, err);
    case Command::Kernel: return cmd_kernel(config, out, err);
    case Command::DiracDemo: return cmd_dirac_demo(config, out, err);
  }
  return 2;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const auto cfg = parse_args(argc, argv, out);
    if (!cfg) return 0;
    return run(*cfg, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    // Library precondition failures (bad chart point, cap, degenerate
    // pool) all come from the configuration.
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace radoncurv::cli
