#ifndef RADONCURV_EMBEDDING_HPP
#define RADONCURV_EMBEDDING_HPP

#include "radoncurv/grid.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace radoncurv {

using ChartPoint = Eigen::VectorXd;

/// Coordinate rectangle on the parameter manifold.
struct Chart {
  std::vector<Interval> box;
  std::vector<bool> periodic;
  std::vector<std::string> axis_names;

  int k() const { return static_cast<int>(box.size()); }
  double width(int axis) const { return box[axis].width(); }
  /// True if y is at least `clearance[a]` inside every non-periodic axis.
  bool contains(const ChartPoint& y, std::span<const double> clearance) const;
};

/// One term c(y) * delta_{p(y)} of a family written as a weighted sum of
/// moving point evaluations, together with its chart derivatives up to
/// second order. Index conventions: dp(d, a) = d p_d / d y_a and
/// d2p[a * k + b][d] = d^2 p_d / d y_a d y_b.
template <typename T>
struct BasicQuadratureNode {
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  Vector p;
  Matrix dp;
  std::vector<Vector> d2p;
  T c = 0;
  Vector dc;
  Matrix d2c;
};
using QuadratureNode = BasicQuadratureNode<double>;
using ExtendedNode = BasicQuadratureNode<long double>;

/// sigma(y) = sum_j c_j(y) delta_{p_j(y)}. Every shipped family has this
/// form, which gives both the weight-vector derivatives and an
/// interpolant-side evaluation of the transform and its derivatives.
class QuadratureFamily {
 public:
  virtual ~QuadratureFamily() = default;
  /// Nodes with nonzero weight at y; derivative fields are filled up to
  /// `order` (0, 1 or 2).
  virtual std::vector<QuadratureNode> nodes(const ChartPoint& y, int order) const = 0;
  /// The same nodes in long double. Finite differences with very small
  /// steps use these, since double rounding of sigma(y) would otherwise
  /// swamp the difference.
  virtual std::vector<ExtendedNode> nodes_extended(const ExtendedPoint& y, int order) const = 0;
};

/// sigma: chart -> D'(M) with optional analytic first and second derivatives.
class FamilyEmbedding {
 public:
  using Sigma = std::function<DistributionVector(const ChartPoint&)>;
  using FirstDerivative = std::function<DistributionVector(const ChartPoint&, int)>;
  using SecondDerivative = std::function<DistributionVector(const ChartPoint&, int, int)>;

  FamilyEmbedding(GridDomain domain, Chart chart, Sigma sigma,
                  std::optional<FirstDerivative> d_sigma = std::nullopt,
                  std::optional<SecondDerivative> d2_sigma = std::nullopt,
                  KernelOrder order = KernelOrder::Cubic);

  const GridDomain& domain() const { return domain_; }
  const Chart& chart() const { return chart_; }
  KernelOrder kernel_order() const { return order_; }

  DistributionVector sigma(const ChartPoint& y) const { return sigma_(y); }
  bool has_analytic_first() const { return d_sigma_.has_value(); }
  bool has_analytic_second() const { return d2_sigma_.has_value(); }
  DistributionVector d_sigma(const ChartPoint& y, int a) const;
  DistributionVector d2_sigma(const ChartPoint& y, int a, int b) const;

  /// Finite-difference steps per chart axis (first and second derivatives).
  const std::vector<double>& fd_step_first() const { return fd_first_; }
  const std::vector<double>& fd_step_second() const { return fd_second_; }
  void set_fd_steps(std::vector<double> first, std::vector<double> second);

  /// Throws std::domain_error unless y clears every non-periodic chart edge
  /// by 2 * step[a].
  void require_interior(const ChartPoint& y, std::span<const double> step,
                        const char* who) const;

  const nlohmann::json& descriptor() const { return descriptor_; }
  void set_descriptor(nlohmann::json d) { descriptor_ = std::move(d); }

  std::shared_ptr<const QuadratureFamily> quadrature() const { return quadrature_; }
  void set_quadrature(std::shared_ptr<const QuadratureFamily> q) { quadrature_ = std::move(q); }

  /// Drops analytic derivatives so that every derivative goes through
  /// finite differences of sigma.
  FamilyEmbedding without_analytic_derivatives() const;

 private:
  GridDomain domain_;
  Chart chart_;
  Sigma sigma_;
  std::optional<FirstDerivative> d_sigma_;
  std::optional<SecondDerivative> d2_sigma_;
  KernelOrder order_;
  std::vector<double> fd_first_;
  std::vector<double> fd_second_;
  nlohmann::json descriptor_;
  std::shared_ptr<const QuadratureFamily> quadrature_;
};

/// Embedding built from a quadrature family; analytic derivatives follow
/// from the chain rule through the cubic kernel.
FamilyEmbedding embedding_from_quadrature(const GridDomain& domain, Chart chart,
                                          std::shared_ptr<const QuadratureFamily> family,
                                          KernelOrder order = KernelOrder::Cubic);

/// y -> delta_y over the safe interior of M.
FamilyEmbedding dirac_embedding(const GridDomain& domain,
                                KernelOrder order = KernelOrder::Cubic);

/// Lines in a 2D domain, chart (theta, s): points s*n(theta) + t*n_perp(theta)
/// about the domain center, t on a fixed uniform grid over [-D/2, D/2].
/// `s_max` defaults to the inscribed radius of the safe box.
FamilyEmbedding line_embedding(const GridDomain& domain, int t_samples,
                               std::optional<double> s_max = std::nullopt);

/// Circles of fixed radius in a 2D domain, chart = admissible centers.
FamilyEmbedding circle_embedding(const GridDomain& domain, double radius, int t_samples);

/// Rebuilds an embedding from {"type": "dirac"|"line"|"circle", ...}.
FamilyEmbedding embedding_from_descriptor(const GridDomain& domain, const nlohmann::json& d);

/// C^2 cutoff on the safe box: product over axes and sides of the quintic
/// smoothstep of (distance to the safe edge) / (2 * spacing).
template <typename T>
struct BasicCutoffJet {
  T value = 0;
  Eigen::Matrix<T, Eigen::Dynamic, 1> gradient;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> hessian;
};
using CutoffJet = BasicCutoffJet<double>;
CutoffJet safe_cutoff(const GridDomain& domain, const Point& x);
BasicCutoffJet<long double> safe_cutoff(const GridDomain& domain, const ExtendedPoint& x);

struct TangentFrame {
  ChartPoint y;
  std::vector<DistributionVector> basis;
  Eigen::VectorXd singular_values;
};

/// d sigma / d y_a: analytic when available, else central differences
/// with the first-derivative step (periodic axes wrap freely).
DistributionVector first_derivative(const FamilyEmbedding& emb, const ChartPoint& y, int a);

/// Columns d sigma / d y_a at y; throws RankDeficiencyError when their
/// numeric rank (tolerance 1e-8 * largest singular value) is below k.
TangentFrame fd_tangent(const FamilyEmbedding& emb, const ChartPoint& y);

/// d^2 sigma / d y_a d y_b: analytic when available, else the second-order
/// central stencil on sigma with the second-derivative step.
DistributionVector fd_second(const FamilyEmbedding& emb, const ChartPoint& y, int a, int b);

}  // namespace radoncurv

#endif  // RADONCURV_EMBEDDING_HPP
