#ifndef RADONCURV_CURVATURE_HPP
#define RADONCURV_CURVATURE_HPP

#include "radoncurv/embedding.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace radoncurv {

/// Default bound on |d(R f)_y| / |f|_inf for annihilator members.
inline constexpr double kAnnihilatorEta = 1e-9;

/// Component a is pair(d sigma / d y_a, f).
Eigen::VectorXd differential_of_transform(const FamilyEmbedding& emb, const TestFunction& f,
                                          const ChartPoint& y);

enum class HessianRoute {
  /// pair(d^2 sigma / dy_a dy_b, f): the weight-vector side.
  SecondDerivativePairing,
  /// Chain rule through the spline interpolant of f at the moving
  /// quadrature points. Never materializes a weight vector.
  InterpolantChainRule,
  /// Central differences of the scalar map y -> pair(sigma(y), f).
  FiniteDifference,
};

std::string to_string(HessianRoute route);
HessianRoute hessian_route_from_string(const std::string& name);

struct HessianMatrix {
  ChartPoint y;
  Eigen::MatrixXd H;
  /// max |H - H^T| before symmetrization.
  double asymmetry = 0.0;
};

/// Steps of the scalar finite-difference Hessian, as fractions of each
/// chart axis width. Quadrature families are summed in long double and
/// take the smaller step; anything else is paired in double.
inline constexpr double kHessianFdFraction = 1e-4;
inline constexpr double kHessianFdFractionExtended = 3e-6;

/// Hessian of R_sigma f at y. Without an explicit route, the pairing route
/// is used when the embedding has analytic second derivatives and finite
/// differences otherwise.
HessianMatrix hessian_of_transform(const FamilyEmbedding& emb, const TestFunction& f,
                                   const ChartPoint& y);
HessianMatrix hessian_of_transform(const FamilyEmbedding& emb, const TestFunction& f,
                                   const ChartPoint& y, HessianRoute route);

/// The same Hessian for several test functions sharing one stencil.
std::vector<HessianMatrix> hessians_of_transform(const FamilyEmbedding& emb,
                                                 std::span<const TestFunction> fs,
                                                 const ChartPoint& y, HessianRoute route);

struct AnnihilatorBasis {
  ChartPoint y;
  std::vector<TestFunction> functions;
  /// Column m holds the pool coefficients of functions[m].
  Eigen::MatrixXd coefficients;
  /// max over members of |d(R f)_y| / |f|_inf, re-measured on the output.
  double construction_residual = 0.0;
  double eta = kAnnihilatorEta;
};

/// Combinations of the pool whose transforms have vanishing differential
/// at y (the nullspace of G^T with G[p][a] = d(R pool_p)_y(e_a)).
AnnihilatorBasis annihilator_basis(const FamilyEmbedding& emb, const ChartPoint& y,
                                   std::span<const TestFunction> pool,
                                   double eta = kAnnihilatorEta);

/// <S(X, Y)(y), f> = pair(sum_ab X_a Y_b d^2 sigma / dy_a dy_b, f).
/// Throws AnnihilatorViolation if |d(R f)_y| > eta * |f|_inf.
double sff_pairing(const FamilyEmbedding& emb, const ChartPoint& y, const Eigen::VectorXd& X,
                   const Eigen::VectorXd& Y, const TestFunction& f, double eta = kAnnihilatorEta);

/// Chart vector field given by its coefficient functions.
using ChartVectorField = std::function<Eigen::VectorXd(const ChartPoint&)>;

/// d/dt at t = 0 of (d sigma . Y)(y + t X): the flat derivative of the
/// pushed-forward field along the constant chart field X, whose flow is
/// translation. One central difference; `step` defaults to 2e-8 times the
/// smallest chart width. Quadrature families difference in long double
/// on the B-spline lattice, so the small step does not cost accuracy.
DistributionVector flat_covariant_derivative(const FamilyEmbedding& emb, const ChartPoint& y,
                                             const Eigen::VectorXd& X, const ChartVectorField& Y,
                                             std::optional<double> step = std::nullopt);

/// Euclidean projection of the weight vector off the tangent span. A
/// non-canonical normal representative, for visualization only.
DistributionVector normal_representative(const FamilyEmbedding& emb, const ChartPoint& y,
                                         const DistributionVector& v);

struct CurvatureRecord {
  std::size_t direction = 0;
  std::size_t function = 0;
  Eigen::VectorXd X;
  Eigen::VectorXd Y;
  double sff_value = 0.0;
  double hessian_value = 0.0;
  double abs_residual = 0.0;
  double rel_residual = 0.0;
};

struct CurvatureReport {
  nlohmann::json embedding;
  nlohmann::json grid;
  ChartPoint y;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  HessianRoute route = HessianRoute::FiniteDifference;
  std::size_t basis_size = 0;
  double annihilator_residual = 0.0;
  std::vector<CurvatureRecord> records;
  /// Precondition failures (e.g. a non-annihilating probe); any entry fails the report.
  std::vector<std::string> errors;
  double max_rel_residual = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  std::size_t n_directions = 10;
  double tol = 1e-4;
  std::uint64_t seed = 1;
  HessianRoute route = HessianRoute::FiniteDifference;
  double eta = kAnnihilatorEta;
  /// Probes appended to the annihilator basis as-is. Each must pass the
  /// annihilator guard or it is reported in `errors`.
  std::vector<TestFunction> extra_probes;
};

/// Compares <S(X, Y)(y), f> with X^T H Y for random unit directions and
/// every annihilator basis function. Throws if the pool yields no
/// annihilator or the embedding is not an immersion at y.
CurvatureReport verify_curvature_theorem(const FamilyEmbedding& emb, const ChartPoint& y,
                                         std::span<const TestFunction> pool,
                                         const VerifyOptions& options = {});

/// Unit vector uniformly distributed on the sphere in R^k.
Eigen::VectorXd random_unit_vector(int k, std::mt19937_64& rng);

}  // namespace radoncurv

#endif  // RADONCURV_CURVATURE_HPP
