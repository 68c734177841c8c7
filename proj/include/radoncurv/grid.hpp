#ifndef RADONCURV_GRID_HPP
#define RADONCURV_GRID_HPP

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace radoncurv {

using Point = Eigen::VectorXd;
using ExtendedPoint = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
};

enum class KernelOrder : int { Linear = 1, Cubic = 3 };

// Throws std::invalid_argument for anything other than 1 or 3.
KernelOrder kernel_order_from_int(int order);

class AxisKernel;

/// Rectangular node lattice standing in for the base manifold M.
///
/// Nodes are stored in C order (last axis fastest). Nodes with an index
/// closer than `margin` to either end of some axis form the margin band;
/// test functions vanish there, which is the discrete form of compact
/// support.
class GridDomain {
 public:
  int dim() const { return static_cast<int>(n_.size()); }
  const std::vector<Interval>& extent() const { return extent_; }
  const std::vector<int>& n() const { return n_; }
  const std::vector<double>& spacing() const { return spacing_; }
  double quad_weight() const { return quad_weight_; }
  int margin() const { return margin_; }
  std::size_t size() const { return size_; }

  double coordinate(int axis, int index) const {
    return extent_[axis].lo + index * spacing_[axis];
  }
  std::vector<int> multi_index(std::size_t flat) const;
  std::size_t flat_index(std::span<const int> idx) const;
  Point node(std::size_t flat) const;
  bool in_margin(std::size_t flat) const;

  /// Box of points at least `margin` nodes away from the boundary.
  Interval safe_interval(int axis) const;
  bool is_safe(const Point& x) const;
  Point center() const;
  double diameter() const;

  const AxisKernel& axis_kernel(int axis) const;

 private:
  friend GridDomain make_grid(int, std::vector<Interval>, std::vector<int>, int);
  GridDomain() = default;

  std::vector<Interval> extent_;
  std::vector<int> n_;
  std::vector<double> spacing_;
  double quad_weight_ = 0.0;
  int margin_ = 0;
  std::size_t size_ = 0;
  std::shared_ptr<const std::vector<AxisKernel>> kernels_;
};

/// Validates and builds a grid: 1 <= dim <= 3, n >= 8 and margin >= 3 per axis.
GridDomain make_grid(int dim, std::vector<Interval> extent, std::vector<int> n,
                     int margin);

/// An order-0 distribution on M, stored as one weight per grid node.
/// Quadrature factors are already folded in, so pairing is a plain dot.
struct DistributionVector {
  Eigen::VectorXd weights;

  DistributionVector() = default;
  explicit DistributionVector(Eigen::VectorXd w);
  static DistributionVector zero(std::size_t n) {
    return DistributionVector(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
  }
  std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
};

/// Sampled test function. Values on margin nodes are exactly zero.
struct TestFunction {
  Eigen::VectorXd values;
  bool support_ok = true;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double sup_norm() const;
};

using FieldEvaluator = std::function<double(const Point&)>;

TestFunction make_test_function(const GridDomain& domain, const FieldEvaluator& f);
TestFunction make_test_function(const GridDomain& domain, Eigen::VectorXd samples);

/// Sequential dot product. Every pairing in the library goes through this
/// so that matrix rows and transform values agree bit for bit.
double dot_sequential(std::span<const double> a, std::span<const double> b);

double pair(const DistributionVector& w, const TestFunction& f);

/// Discrete point evaluation delta_x. Cubic order uses the interpolating
/// (cardinal) cubic B-spline, which is C^2 in x and exact at nodes.
DistributionVector eval_functional(const GridDomain& domain, const Point& x,
                                   KernelOrder order = KernelOrder::Cubic);

/// Derivative of eval_functional with respect to x along the given axes
/// (one axis for a gradient component, two for a Hessian entry).
DistributionVector eval_functional_derivative(const GridDomain& domain, const Point& x,
                                              std::span<const int> axes);

}  // namespace radoncurv

#endif  // RADONCURV_GRID_HPP
