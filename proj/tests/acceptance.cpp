// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include "cli.hpp"
#include "radoncurv/curvature.hpp"
#include "radoncurv/io.hpp"
#include "radoncurv/kernel.hpp"
#include "radoncurv/test_functions.hpp"
#include "radoncurv/transform.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace radoncurv;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel(double value, double reference) {
  return std::fabs(value - reference) / (std::fabs(reference) + 1e-12);
}

ChartPoint interior_point(const Chart& chart, std::mt19937_64& rng, double inset) {
  ChartPoint y(chart.k());
  for (int a = 0; a < chart.k(); ++a) {
    const Interval b = chart.box[static_cast<std::size_t>(a)];
    y[a] = std::uniform_real_distribution<double>(b.lo + inset * b.width(), b.hi - inset * b.width())(rng);
  }
  return y;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

GridDomain desk_grid() { return make_grid(2, {{-5.5, 5.5}, {-5.5, 5.5}}, {128, 128}, 4); }

std::vector<FamilyEmbedding> shipped(const GridDomain& g) {
  return {dirac_embedding(g), line_embedding(g, 256), circle_embedding(g, 1.5, 256)};
}

std::string type_of(const FamilyEmbedding& e) { return e.descriptor().at("type").get<std::string>(); }

Outcome dirac_identity() {
  const GridDomain g = make_grid(2, {{-4.0, 4.0}, {-4.0, 4.0}}, {64, 64}, 4);
  const FamilyEmbedding emb = dirac_embedding(g);
  const TestFunction f = make_test_function(g, [](const Point& x) {
    return std::exp(-0.3 * x.squaredNorm()) * std::cos(x[0] - 0.5 * x[1]);
  });
  std::vector<ChartPoint> nodes;
  std::vector<double> expected;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.in_margin(i)) continue;
    nodes.push_back(g.node(i));
    expected.push_back(f.values[static_cast<Eigen::Index>(i)]);
  }
  const SampledTransform t = radon_forward(emb, f, nodes);
  double worst = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) worst = std::max(worst, std::fabs(t.values[j] - expected[j]));
  return {worst <= 1e-12, std::to_string(nodes.size()) + " nodes, max abs error " + fmt(worst) + " (tol 1e-12)"};
}

Outcome gaussian_sinogram() {
  // tighter box: the theta variation is cubic interpolation error and scales with h^4
  const GridDomain g = make_grid(2, {{-4.5, 4.5}, {-4.5, 4.5}}, {128, 128}, 4);
  const FamilyEmbedding emb = line_embedding(g, 256);
  const TestFunction f = make_test_function(g, [](const Point& x) { return std::exp(-x.squaredNorm()); });
  const int n_angles = 32, n_offsets = 41;
  const auto samples = sinogram_samples(emb, n_angles, n_offsets);
  const SampledTransform t = radon_forward(emb, f, samples);
  double closed = 0.0, variation = 0.0;
  for (int o = 0; o < n_offsets; ++o) {
    double lo = 1e300, hi = -1e300;
    for (int a = 0; a < n_angles; ++a) {
      const std::size_t j = static_cast<std::size_t>(a * n_offsets + o);
      const double s = samples[j][1];
      if (std::fabs(s) <= 1.0) closed = std::max(closed, rel(t.values[j], std::sqrt(std::numbers::pi) * std::exp(-s * s)));
      lo = std::min(lo, t.values[j]);
      hi = std::max(hi, t.values[j]);
    }
    const double s = samples[static_cast<std::size_t>(o)][1];
    if (std::fabs(s) <= 1.0) variation = std::max(variation, (hi - lo) / std::fabs(hi));
  }
  return {closed <= 1e-3 && variation <= 1e-6,
          "closed-form error " + fmt(closed) + " (tol 1e-3), theta variation " + fmt(variation) + " (tol 1e-6)"};
}

Outcome curvature_theorem() {
  const GridDomain g = desk_grid();
  std::string detail;
  bool pass = true;
  std::mt19937_64 rng(2024);
  for (const auto& emb : shipped(g)) {
    double fd_worst = 0.0, an_worst = 0.0;
    std::size_t comparisons = 0;
    for (int i = 0; i < 5; ++i) {
      const ChartPoint y = interior_point(emb.chart(), rng, 0.2);
      const auto pool = annihilator_pool(emb, y, 12, 1000 + static_cast<std::uint64_t>(i));
      VerifyOptions o;
      o.n_directions = 10;
      o.seed = 500 + static_cast<std::uint64_t>(i);
      o.tol = 1e-4;
      const CurvatureReport fd = verify_curvature_theorem(emb, y, pool, o);
      o.route = HessianRoute::InterpolantChainRule;
      o.tol = 1e-6;
      const CurvatureReport an = verify_curvature_theorem(emb, y, pool, o);
      pass = pass && fd.pass && an.pass;
      fd_worst = std::max(fd_worst, fd.max_rel_residual);
      an_worst = std::max(an_worst, an.max_rel_residual);
      comparisons += fd.records.size();
    }
    detail += type_of(emb) + " fd " + fmt(fd_worst) + " analytic " + fmt(an_worst) + " (" +
              std::to_string(comparisons) + " comparisons); ";
  }
  return {pass, detail + "tol fd 1e-4, analytic 1e-6"};
}

Outcome symmetry_bilinearity() {
  const GridDomain g = desk_grid();
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd;
  double asym = 0.0, lin = 0.0;
  for (const auto& emb : shipped(g)) {
    const ChartPoint y = interior_point(emb.chart(), rng, 0.2);
    const AnnihilatorBasis basis = annihilator_basis(emb, y, annihilator_pool(emb, y, 12, 77));
    for (int t = 0; t < 100; ++t) {
      const Eigen::VectorXd X = random_unit_vector(2, rng), Y = random_unit_vector(2, rng);
      const Eigen::VectorXd Z = random_unit_vector(2, rng);
      const TestFunction& f = basis.functions[static_cast<std::size_t>(t) % basis.functions.size()];
      const TestFunction& h = basis.functions[static_cast<std::size_t>(t + 1) % basis.functions.size()];
      const auto S = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v, const TestFunction& p) {
        return sff_pairing(emb, y, u, v, p);
      };
      asym = std::max(asym, rel(S(X, Y, f), S(Y, X, f)));
      const double a = nd(rng), b = nd(rng);
      const double sx = std::fabs(a * S(X, Y, f)) + std::fabs(b * S(Z, Y, f)) + 1e-12;
      lin = std::max(lin, std::fabs(S(a * X + b * Z, Y, f) - (a * S(X, Y, f) + b * S(Z, Y, f))) / sx);
      const double sy = std::fabs(a * S(Y, X, f)) + std::fabs(b * S(Y, Z, f)) + 1e-12;
      lin = std::max(lin, std::fabs(S(Y, a * X + b * Z, f) - (a * S(Y, X, f) + b * S(Y, Z, f))) / sy);
      TestFunction mix;
      mix.values = a * f.values + b * h.values;
      const double sf = std::fabs(a * S(X, Y, f)) + std::fabs(b * S(X, Y, h)) + 1e-12;
      lin = std::max(lin, std::fabs(S(X, Y, mix) - (a * S(X, Y, f) + b * S(X, Y, h))) / sf);
    }
  }
  return {asym <= 1e-10 && lin <= 1e-10,
          "asymmetry " + fmt(asym) + ", linearity " + fmt(lin) + " over 300 triples (tol 1e-10)"};
}

Outcome differential_order() {
  const GridDomain g = desk_grid();
  Point c(2);
  c << 1.0, -0.7;
  const TestFunction f = gaussian(g, c, 1.2);
  const InterpolatedField field(g, f);
  std::mt19937_64 rng(5);
  std::string detail;
  bool pass = true;
  for (const auto& emb : shipped(g)) {
    double worst = 1e300;
    for (int i = 0; i < 20; ++i) {
      const ChartPoint y = interior_point(emb.chart(), rng, 0.1);
      const Eigen::VectorXd d = differential_of_transform(emb, f, y);
      for (int a = 0; a < 2; ++a) {
        const long double h0 = 1e-4L * emb.chart().width(a);
        double err[2];
        for (int j = 0; j < 2; ++j) {
          const long double h = h0 / (1 << j);
          ExtendedPoint p = y.cast<long double>(), m = p;
          p[a] += h;
          m[a] -= h;
          const long double fd = (transform_value_extended(emb, field, p) -
                                  transform_value_extended(emb, field, m)) / (2 * h);
          err[j] = std::fabs(static_cast<double>(fd) - d[a]);
        }
        worst = std::min(worst, std::log2(err[0] / err[1]));
      }
    }
    pass = pass && worst >= 1.8;
    detail += type_of(emb) + " " + fmt(worst) + "; ";
  }
  return {pass, "min observed order " + detail + "bound 1.8"};
}

Outcome kernel_diagnostics_check() {
  struct Case {
    std::string name;
    GridDomain grid;
    std::function<FamilyEmbedding(const GridDomain&)> make;
    std::function<std::vector<ChartPoint>(const FamilyEmbedding&, const GridDomain&)> samples;
  };
  const auto line_samples = [](int angles, int offsets) {
    return [=](const FamilyEmbedding& e, const GridDomain&) { return sinogram_samples(e, angles, offsets); };
  };
  const auto all_nodes = [](const FamilyEmbedding&, const GridDomain& g) {
    std::vector<ChartPoint> out;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.in_margin(i)) out.push_back(g.node(i));
    }
    return out;
  };
  const GridDomain g32 = make_grid(2, {{-5.5, 5.5}, {-5.5, 5.5}}, {32, 32}, 4);
  const std::vector<Case> cases{
      {"line 1x64", g32, [](const GridDomain& g) { return line_embedding(g, 128); }, line_samples(1, 64)},
      {"line 8x33", g32, [](const GridDomain& g) { return line_embedding(g, 128); }, line_samples(8, 33)},
      {"line 40x41", g32, [](const GridDomain& g) { return line_embedding(g, 128); }, line_samples(40, 41)},
      {"dirac all", g32, [](const GridDomain& g) { return dirac_embedding(g); }, all_nodes},
      {"circle 12x12", g32, [](const GridDomain& g) { return circle_embedding(g, 1.5, 128); },
       [](const FamilyEmbedding& e, const GridDomain&) {
         return chart_grid_samples(e.chart(), std::array<int, 2>{12, 12});
       }},
  };
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    const FamilyEmbedding emb = c.make(c.grid);
    const auto rows = c.samples(emb, c.grid);
    const OperatorMatrix op = operator_matrix(emb, rows);
    const KernelDiagnostics kd = kernel_diagnostics(op, c.grid);
    const bool bound = kd.rank <= static_cast<int>(std::min(rows.size(), kd.interior_size));
    double worst = 0.0;
    for (Eigen::Index k = 0; k < kd.kernel_basis.cols(); ++k) {
      const Eigen::VectorXd v = kd.kernel_basis.col(k);
      worst = std::max(worst, (op.matrix * v).norm() / v.norm());
    }
    pass = pass && bound && worst <= 1e-8;
    if (c.name == "line 1x64") pass = pass && kd.kernel_dim > 0;
    if (c.name == "dirac all") pass = pass && kd.kernel_dim == 0;
    detail += c.name + ": rank " + std::to_string(kd.rank) + ", kernel " + std::to_string(kd.kernel_dim) +
              ", residual " + fmt(worst) + "; ";
  }
  return {pass, detail + "residual tol 1e-8"};
}

Outcome flow_identity() {
  const GridDomain g = desk_grid();
  const auto embs = shipped(g);
  std::mt19937_64 rng(31);
  double worst = 0.0;
  std::size_t pairs = 0;
  for (int i = 0; i < 20; ++i) {
    const FamilyEmbedding& emb = embs[static_cast<std::size_t>(i) % embs.size()];
    const ChartPoint y = interior_point(emb.chart(), rng, 0.2);
    const AnnihilatorBasis basis = annihilator_basis(emb, y, annihilator_pool(emb, y, 12, 300 + static_cast<std::uint64_t>(i)));
    const Eigen::VectorXd X = random_unit_vector(2, rng), Y = random_unit_vector(2, rng);
    const DistributionVector v = flat_covariant_derivative(emb, y, X, [&](const ChartPoint&) { return Y; });
    for (const auto& f : basis.functions) {
      worst = std::max(worst, rel(pair(v, f), sff_pairing(emb, y, X, Y, f)));
      ++pairs;
    }
  }
  return {worst <= 1e-8, "20 cases, " + std::to_string(pairs) + " pairings, max relative " + fmt(worst) + " (tol 1e-8)"};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "radoncurv_acceptance";
  fs::remove_all(root);
  bool pass = true;
  std::string detail;
  for (const char* emb : {"dirac", "line", "circle"}) {
    std::string first;
    for (int run = 0; run < 2; ++run) {
      const std::string dir = (root / (std::string(emb) + std::to_string(run))).string();
      const char* argv[] = {"radoncurv", "verify", "--embedding", emb, "--seed", "42", "--out-dir", dir.c_str()};
      std::ostringstream out, err;
      const int code = cli::main_entry(8, argv, out, err);
      const std::string text = read_file(fs::path(dir) / "report.json");
      if (run == 0) {
        first = text;
        pass = pass && code == 0;
      } else {
        pass = pass && code == 0 && text == first;
      }
    }
    detail += std::string(emb) + " " + std::to_string(first.size()) + " bytes; ";
  }
  fs::remove_all(root);
  return {pass, detail + "two runs per embedding, byte-identical"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "dirac identity", 1.0, dirac_identity},
      {2, "gaussian sinogram", 10.0, gaussian_sinogram},
      {3, "curvature theorem", 60.0, curvature_theorem},
      {4, "symmetry and bilinearity", 0.0, symmetry_bilinearity},
      {5, "differential identity order", 0.0, differential_order},
      {6, "kernel diagnostics", 30.0, kernel_diagnostics_check},
      {7, "flow identity", 0.0, flow_identity},
      {8, "determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt(secs) + " s";
    if (c.budget_s > 0.0) {
      timing += " (budget " + fmt(c.budget_s) + " s)";
      if (secs > c.budget_s) o.pass = false;
    }
    if (!o.pass) ++failed;
    std::printf("criterion %d %-28s %s  %s  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
