#ifndef RADONCURV_KERNEL_HPP
#define RADONCURV_KERNEL_HPP

#include "radoncurv/grid.hpp"

#include <array>

namespace radoncurv {

/// Interpolation weights along one grid axis.
///
/// The cubic form is the natural cubic spline interpolant written in the
/// B-spline basis: s(x) = sum_k c_k B((x - x_k)/h), k = -1..n, with
/// c = Q f. Q is (n+2) x n and is computed once per axis. Natural end
/// conditions make the interpolant reproduce affine data exactly.
class AxisKernel {
 public:
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  AxisKernel(double lo, double spacing, int n);

  int n() const { return n_; }
  double lo() const { return lo_; }
  double spacing() const { return h_; }

  /// Dense weights w (length n) with s^{(deriv)}(x) = sum_i w_i f_i.
  void cubic_weights(double x, int deriv, Eigen::Ref<Eigen::VectorXd> out) const;
  void linear_weights(double x, Eigen::Ref<Eigen::VectorXd> out) const;

  /// B-spline index window for x: returns the first of the four active
  /// coefficients (0-based into the n+2 coefficient vector) and their
  /// basis values / derivatives.
  int bspline_window(double x, int deriv, std::array<double, 4>& basis) const;

  const RowMatrix& coefficient_map() const { return q_; }

 private:
  double lo_;
  double h_;
  int n_;
  RowMatrix q_;
};

/// Per-axis cubic weights and their first two derivatives at one point.
struct PointStencil {
  // axis -> derivative order (0, 1, 2) -> weights along that axis
  std::vector<std::array<Eigen::VectorXd, 3>> axis;
};

PointStencil cubic_stencil(const GridDomain& domain, const Point& x);

/// out += coef * (f0 (x) f1 (x) f2) with one factor per grid axis.
void add_tensor(const GridDomain& domain, double coef,
                std::span<const Eigen::VectorXd* const> factors, Eigen::VectorXd& out);

/// Coefficients of a weight vector expressed in the value/gradient/Hessian
/// basis of a point functional: sum coef_value*e + g.grad(e) + H:hess(e).
struct JetCoefficients {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;  // symmetric use; (d,e) and (e,d) both counted
};

/// out += combination of derivatives of delta_x described by `jet`.
void add_point_jet(const GridDomain& domain, const PointStencil& stencil,
                   const JetCoefficients& jet, Eigen::VectorXd& out);

/// The cubic spline interpolant of a test function, evaluated locally
/// from its B-spline coefficients (4^dim terms per point).
class InterpolatedField {
 public:
  InterpolatedField(const GridDomain& domain, const TestFunction& f);

  struct Jet {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
  };

  double value(const Point& x) const;
  /// Same interpolant, with basis values and the sum in long double.
  long double value_extended(const ExtendedPoint& x) const;
  Jet jet(const Point& x) const;

 private:
  const GridDomain* domain_;
  std::vector<int> shape_;  // n[a] + 2
  Eigen::VectorXd coef_;
};

/// A distribution held on the B-spline coefficient lattice (n_a + 2 per
/// axis) in long double. Its nodal weights are (Q_1 x ... x Q_d)^T b, so
/// differences of nearby distributions can be formed before the map to
/// nodes, where they lose far less to rounding.
class BsplineDistribution {
 public:
  explicit BsplineDistribution(const GridDomain& domain);

  /// b += value * delta_x + gradient . grad(delta_x); an empty gradient
  /// is skipped.
  void add_jet(const ExtendedPoint& x, long double value, const ExtendedPoint& gradient);

  BsplineDistribution& operator-=(const BsplineDistribution& other);

  /// Nodal weights of scale * b.
  Eigen::VectorXd nodal_weights(long double scale = 1.0L) const;

 private:
  const GridDomain* domain_;
  std::array<int, 3> shape_{1, 1, 1};
  std::vector<long double> b_;
};

}  // namespace radoncurv

#endif  // RADONCURV_KERNEL_HPP
