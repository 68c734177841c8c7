#include "radoncurv/curvature.hpp"
#include "radoncurv/error.hpp"
#include "radoncurv/io.hpp"
#include "radoncurv/test_functions.hpp"
#include "radoncurv/transform.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace radoncurv;

namespace {

using RowArray = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<ChartPoint> rows_of(const RowArray& a) {
  std::vector<ChartPoint> out;
  out.reserve(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) out.emplace_back(a.row(i).transpose());
  return out;
}

RowArray stack(const std::vector<ChartPoint>& pts) {
  RowArray a(static_cast<Eigen::Index>(pts.size()), pts.empty() ? 0 : pts.front().size());
  for (std::size_t i = 0; i < pts.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Radon transforms of distribution families on a grid";

  py::register_exception<RankDeficiencyError>(m, "RankDeficiencyError", PyExc_RuntimeError);
  py::register_exception<AnnihilatorViolation>(m, "AnnihilatorViolation", PyExc_ValueError);

  py::class_<GridDomain>(m, "Grid")
      .def_property_readonly("dim", &GridDomain::dim)
      .def_property_readonly("n", &GridDomain::n)
      .def_property_readonly("spacing", &GridDomain::spacing)
      .def_property_readonly("margin", &GridDomain::margin)
      .def_property_readonly("size", &GridDomain::size)
      .def("node", &GridDomain::node)
      .def("in_margin", &GridDomain::in_margin)
      .def("safe_interval", [](const GridDomain& g, int axis) {
        const Interval s = g.safe_interval(axis);
        return std::make_pair(s.lo, s.hi);
      })
      .def("nodes", [](const GridDomain& g) {
        std::vector<ChartPoint> pts;
        for (std::size_t i = 0; i < g.size(); ++i) pts.push_back(g.node(i));
        return stack(pts);
      })
      .def("__repr__", [](const GridDomain& g) { return "<Grid " + grid_to_json(g).dump() + ">"; });

  m.def("make_grid",
        [](int dim, const std::vector<std::pair<double, double>>& extent, const std::vector<int>& n, int margin) {
          std::vector<Interval> e;
          for (const auto& [lo, hi] : extent) e.push_back({lo, hi});
          return make_grid(dim, std::move(e), n, margin);
        },
        py::arg("dim"), py::arg("extent"), py::arg("n"), py::arg("margin") = 4);

  py::class_<TestFunction>(m, "TestFunction")
      .def_readonly("values", &TestFunction::values)
      .def_readonly("support_ok", &TestFunction::support_ok)
      .def("sup_norm", &TestFunction::sup_norm);

  m.def("make_test_function",
        [](const GridDomain& g, const Eigen::VectorXd& samples) { return make_test_function(g, samples); },
        py::arg("grid"), py::arg("samples"), "Samples in C node order; margin nodes are zeroed.");
  m.def("gaussian", &gaussian, py::arg("grid"), py::arg("center"), py::arg("width"), py::arg("amplitude") = 1.0);
  m.def("smooth_bump", &smooth_bump, py::arg("grid"), py::arg("center"), py::arg("radius"));
  m.def("builtin_test_function", &builtin_test_function, py::arg("grid"), py::arg("name"), py::arg("width") = 0.0);

  py::class_<FamilyEmbedding>(m, "Embedding")
      .def_property_readonly("k", [](const FamilyEmbedding& e) { return e.chart().k(); })
      .def_property_readonly("chart_box", [](const FamilyEmbedding& e) {
        std::vector<std::pair<double, double>> box;
        for (const auto& b : e.chart().box) box.emplace_back(b.lo, b.hi);
        return box;
      })
      .def_property_readonly("axis_names", [](const FamilyEmbedding& e) { return e.chart().axis_names; })
      .def_property_readonly("descriptor", [](const FamilyEmbedding& e) { return e.descriptor().dump(); })
      .def("sigma", [](const FamilyEmbedding& e, const ChartPoint& y) { return e.sigma(y).weights; })
      .def("d_sigma", [](const FamilyEmbedding& e, const ChartPoint& y, int a) { return e.d_sigma(y, a).weights; })
      .def("d2_sigma", [](const FamilyEmbedding& e, const ChartPoint& y, int a, int b) {
        return e.d2_sigma(y, a, b).weights;
      });

  m.def("dirac_embedding", [](const GridDomain& g) { return dirac_embedding(g); }, py::arg("grid"));
  m.def("line_embedding", &line_embedding, py::arg("grid"), py::arg("t_samples") = 256,
        py::arg("s_max") = std::nullopt);
  m.def("circle_embedding", &circle_embedding, py::arg("grid"), py::arg("radius"), py::arg("t_samples") = 256);

  m.def("pair", [](const Eigen::VectorXd& w, const TestFunction& f) { return pair(DistributionVector(w), f); },
        py::arg("weights"), py::arg("f"));

  m.def("sinogram_samples",
        [](const FamilyEmbedding& e, int angles, int offsets) { return stack(sinogram_samples(e, angles, offsets)); },
        py::arg("embedding"), py::arg("angles"), py::arg("offsets"));
  m.def("radon_forward",
        [](const FamilyEmbedding& e, const TestFunction& f, const RowArray& samples) {
          const auto pts = rows_of(samples);
          const SampledTransform t = radon_forward(e, f, pts);
          return py::make_tuple(t.values, t.warnings);
        },
        py::arg("embedding"), py::arg("f"), py::arg("samples"),
        "Returns (values, warnings) for chart samples given as rows.");
  m.def("operator_matrix",
        [](const FamilyEmbedding& e, const RowArray& samples) {
          const auto pts = rows_of(samples);
          return operator_matrix(e, pts).matrix;
        },
        py::arg("embedding"), py::arg("samples"));
  m.def("kernel_diagnostics",
        [](const FamilyEmbedding& e, const RowArray& samples, double tol) {
          const auto pts = rows_of(samples);
          KernelOptions o;
          o.tol = tol;
          const KernelDiagnostics d = kernel_diagnostics(operator_matrix(e, pts), e.domain(), o);
          py::dict out;
          out["rank"] = d.rank;
          out["interior_size"] = d.interior_size;
          out["kernel_dim"] = d.kernel_dim;
          out["singular_values"] = d.singular_values;
          out["kernel_basis"] = d.kernel_basis;
          out["residuals"] = d.residuals;
          return out;
        },
        py::arg("embedding"), py::arg("samples"), py::arg("tol") = 1e-10);

  m.def("differential_of_transform", &differential_of_transform, py::arg("embedding"), py::arg("f"), py::arg("y"));
  m.def("hessian_of_transform",
        [](const FamilyEmbedding& e, const TestFunction& f, const ChartPoint& y, const std::string& route) {
          return hessian_of_transform(e, f, y, hessian_route_from_string(route)).H;
        },
        py::arg("embedding"), py::arg("f"), py::arg("y"), py::arg("route") = "fd");
  m.def("annihilator_pool", &annihilator_pool, py::arg("embedding"), py::arg("y"), py::arg("count") = 12,
        py::arg("seed") = 1, py::arg("radius_fraction") = 0.15);
  m.def("annihilator_basis",
        [](const FamilyEmbedding& e, const ChartPoint& y, const std::vector<TestFunction>& pool, double eta) {
          return annihilator_basis(e, y, pool, eta).functions;
        },
        py::arg("embedding"), py::arg("y"), py::arg("pool"), py::arg("eta") = kAnnihilatorEta);
  m.def("sff_pairing",
        [](const FamilyEmbedding& e, const ChartPoint& y, const Eigen::VectorXd& X, const Eigen::VectorXd& Y,
           const TestFunction& f, double eta) { return sff_pairing(e, y, X, Y, f, eta); },
        py::arg("embedding"), py::arg("y"), py::arg("X"), py::arg("Y"), py::arg("f"),
        py::arg("eta") = kAnnihilatorEta);
  m.def("flat_covariant_derivative",
        [](const FamilyEmbedding& e, const ChartPoint& y, const Eigen::VectorXd& X, const Eigen::VectorXd& Y) {
          return flat_covariant_derivative(e, y, X, [Y](const ChartPoint&) { return Y; }).weights;
        },
        py::arg("embedding"), py::arg("y"), py::arg("X"), py::arg("Y"),
        "Flat derivative of the constant chart field Y along X, as nodal weights.");
  m.def("verify_curvature_theorem",
        [](const FamilyEmbedding& e, const ChartPoint& y, const std::vector<TestFunction>& pool,
           std::size_t n_directions, double tol, std::uint64_t seed, const std::string& route) {
          VerifyOptions o;
          o.n_directions = n_directions;
          o.tol = tol;
          o.seed = seed;
          o.route = hessian_route_from_string(route);
          return json_text(report_to_json(verify_curvature_theorem(e, y, pool, o)));
        });
}
