#include "radoncurv/grid.hpp"

#include "radoncurv/kernel.hpp"

#include <cmath>
#include <sstream>

namespace radoncurv {

KernelOrder kernel_order_from_int(int order) {
  if (order == 1) return KernelOrder::Linear;
  if (order == 3) return KernelOrder::Cubic;
  throw std::invalid_argument("unsupported kernel order " + std::to_string(order) +
                              " (expected 1 or 3)");
}

GridDomain make_grid(int dim, std::vector<Interval> extent, std::vector<int> n, int margin) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("make_grid: dim must be 1, 2 or 3");
  if (static_cast<int>(extent.size()) != dim || static_cast<int>(n.size()) != dim) {
    throw std::invalid_argument("make_grid: extent and n must have one entry per axis");
  }
  if (margin < 3) throw std::invalid_argument("make_grid: margin must be >= 3");
  for (int a = 0; a < dim; ++a) {
    if (n[a] < 8) {
      throw std::invalid_argument("make_grid: axis " + std::to_string(a) +
                                  " has n=" + std::to_string(n[a]) + " < 8");
    }
    if (!(extent[a].hi > extent[a].lo) || !std::isfinite(extent[a].lo) ||
        !std::isfinite(extent[a].hi)) {
      throw std::invalid_argument("make_grid: axis " + std::to_string(a) +
                                  " extent must satisfy lo < hi");
    }
    if (2 * margin >= n[a] - 1) {
      throw std::invalid_argument("make_grid: margin leaves no interior on axis " +
                                  std::to_string(a));
    }
  }

  GridDomain g;
  g.extent_ = std::move(extent);
  g.n_ = std::move(n);
  g.margin_ = margin;
  g.spacing_.resize(dim);
  g.quad_weight_ = 1.0;
  g.size_ = 1;
  auto kernels = std::make_shared<std::vector<AxisKernel>>();
  for (int a = 0; a < dim; ++a) {
    g.spacing_[a] = (g.extent_[a].hi - g.extent_[a].lo) / (g.n_[a] - 1);
    g.quad_weight_ *= g.spacing_[a];
    g.size_ *= static_cast<std::size_t>(g.n_[a]);
    kernels->emplace_back(g.extent_[a].lo, g.spacing_[a], g.n_[a]);
  }
  g.kernels_ = std::move(kernels);
  return g;
}

const AxisKernel& GridDomain::axis_kernel(int axis) const { return (*kernels_)[static_cast<std::size_t>(axis)]; }

std::vector<int> GridDomain::multi_index(std::size_t flat) const {
  std::vector<int> idx(n_.size());
  for (int a = dim() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_[a]);
    flat /= n_[a];
  }
  return idx;
}

std::size_t GridDomain::flat_index(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim(); ++a) flat = flat * n_[a] + idx[a];
  return flat;
}

Point GridDomain::node(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Point p(dim());
  for (int a = 0; a < dim(); ++a) p[a] = coordinate(a, idx[a]);
  return p;
}

bool GridDomain::in_margin(std::size_t flat) const {
  const auto idx = multi_index(flat);
  for (int a = 0; a < dim(); ++a) {
    if (idx[a] < margin_ || idx[a] > n_[a] - 1 - margin_) return true;
  }
  return false;
}

Interval GridDomain::safe_interval(int axis) const {
  return {extent_[axis].lo + margin_ * spacing_[axis],
          extent_[axis].hi - margin_ * spacing_[axis]};
}

bool GridDomain::is_safe(const Point& x) const {
  if (x.size() != dim()) return false;
  for (int a = 0; a < dim(); ++a) {
    const Interval s = safe_interval(a);
    const double slack = 1e-12 * spacing_[a];
    if (!(x[a] >= s.lo - slack && x[a] <= s.hi + slack)) return false;
  }
  return true;
}

Point GridDomain::center() const {
  Point c(dim());
  for (int a = 0; a < dim(); ++a) c[a] = extent_[a].center();
  return c;
}

double GridDomain::diameter() const {
  double s = 0.0;
  for (const auto& e : extent_) s += e.width() * e.width();
  return std::sqrt(s);
}

DistributionVector::DistributionVector(Eigen::VectorXd w) : weights(std::move(w)) {
  if (!weights.allFinite()) {
    throw std::domain_error("DistributionVector: non-finite weight");
  }
}

double TestFunction::sup_norm() const {
  return values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff();
}

TestFunction make_test_function(const GridDomain& domain, Eigen::VectorXd samples) {
  if (samples.size() != static_cast<Eigen::Index>(domain.size())) {
    throw std::invalid_argument("make_test_function: expected " +
                                std::to_string(domain.size()) + " samples");
  }
  TestFunction f;
  const double amplitude = samples.size() ? samples.cwiseAbs().maxCoeff() : 0.0;
  double clipped = 0.0;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (domain.in_margin(i)) {
      clipped = std::max(clipped, std::fabs(samples[static_cast<Eigen::Index>(i)]));
      samples[static_cast<Eigen::Index>(i)] = 0.0;
    }
  }
  f.values = std::move(samples);
  f.support_ok = !(clipped > 1e-12 * amplitude);
  return f;
}

TestFunction make_test_function(const GridDomain& domain, const FieldEvaluator& fn) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(domain.size()));
  for (std::size_t i = 0; i < domain.size(); ++i) v[static_cast<Eigen::Index>(i)] = fn(domain.node(i));
  return make_test_function(domain, std::move(v));
}

double dot_sequential(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double pair(const DistributionVector& w, const TestFunction& f) {
  if (w.size() != f.size()) {
    throw std::invalid_argument("pair: length mismatch (" + std::to_string(w.size()) +
                                " vs " + std::to_string(f.size()) + ")");
  }
  return dot_sequential({w.weights.data(), w.size()}, {f.values.data(), f.size()});
}

namespace {

void require_evaluable(const GridDomain& domain, const Point& x, const char* who) {
  if (x.size() != domain.dim()) {
    throw std::invalid_argument(std::string(who) + ": point dimension mismatch");
  }
  if (!domain.is_safe(x)) {
    std::ostringstream os;
    os << who << ": point (" << x.transpose() << ") is closer than " << domain.margin()
       << " nodes to the boundary";
    throw std::domain_error(os.str());
  }
}

}  // namespace

DistributionVector eval_functional(const GridDomain& domain, const Point& x, KernelOrder order) {
  require_evaluable(domain, x, "eval_functional");
  const int dim = domain.dim();
  std::vector<Eigen::VectorXd> axis(dim);
  for (int a = 0; a < dim; ++a) {
    const AxisKernel& k = domain.axis_kernel(a);
    axis[a].resize(k.n());
    if (order == KernelOrder::Cubic) {
      k.cubic_weights(x[a], 0, axis[a]);
    } else {
      k.linear_weights(x[a], axis[a]);
    }
  }
  std::array<const Eigen::VectorXd*, 3> factors{};
  for (int a = 0; a < dim; ++a) factors[a] = &axis[a];
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.size()));
  add_tensor(domain, 1.0, std::span(factors.data(), dim), w);
  return DistributionVector(std::move(w));
}

DistributionVector eval_functional_derivative(const GridDomain& domain, const Point& x,
                                              std::span<const int> axes) {
  require_evaluable(domain, x, "eval_functional_derivative");
  if (axes.empty() || axes.size() > 2) {
    throw std::invalid_argument("eval_functional_derivative: one or two axes expected");
  }
  const int dim = domain.dim();
  std::vector<int> order(dim, 0);
  for (int a : axes) {
    if (a < 0 || a >= dim) throw std::invalid_argument("eval_functional_derivative: bad axis");
    ++order[a];
  }
  std::vector<Eigen::VectorXd> axis(dim);
  std::array<const Eigen::VectorXd*, 3> factors{};
  for (int a = 0; a < dim; ++a) {
    const AxisKernel& k = domain.axis_kernel(a);
    axis[a].resize(k.n());
    k.cubic_weights(x[a], order[a], axis[a]);
    factors[a] = &axis[a];
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.size()));
  add_tensor(domain, 1.0, std::span(factors.data(), dim), w);
  return DistributionVector(std::move(w));
}

}  // namespace radoncurv
