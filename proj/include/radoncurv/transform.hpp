#ifndef RADONCURV_TRANSFORM_HPP
#define RADONCURV_TRANSFORM_HPP

#include "radoncurv/embedding.hpp"
#include "radoncurv/kernel.hpp"

#include <string>
#include <vector>

namespace radoncurv {

/// R_sigma f sampled at chart points.
struct SampledTransform {
  std::vector<ChartPoint> chart_samples;
  std::vector<double> values;
  std::vector<std::string> warnings;
};

/// Rows are sigma(y_j) weights. Row-major so that each row is contiguous
/// and pairs in the same order as `pair`.
struct OperatorMatrix {
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  std::vector<ChartPoint> rows;
  Matrix matrix;
};

/// Dense matrices above this many entries are refused.
inline constexpr double kOperatorEntryCap = 5e7;

/// values[j] = pair(sigma(y_j), f). Clipped support is reported in
/// `warnings`, not treated as an error.
SampledTransform radon_forward(const FamilyEmbedding& emb, const TestFunction& f,
                               std::span<const ChartPoint> chart_samples);

/// R_sigma f(y) summed in long double over the quadrature nodes of the
/// family, through the spline interpolant of f. Throws
/// std::invalid_argument for embeddings without a quadrature family.
long double transform_value_extended(const FamilyEmbedding& emb, const InterpolatedField& field,
                                     const ExtendedPoint& y);

OperatorMatrix operator_matrix(const FamilyEmbedding& emb, std::span<const ChartPoint> chart_samples);

/// matrix * f with the same summation order as radon_forward.
std::vector<double> apply(const OperatorMatrix& op, const TestFunction& f);

struct KernelOptions {
  double tol = 1e-10;
  /// Upper bound on the number of kernel vectors returned.
  std::size_t max_basis = 256;
};

struct KernelDiagnostics {
  int rank = 0;
  std::size_t interior_size = 0;
  std::size_t kernel_dim = 0;
  double sigma_max = 0.0;
  Eigen::VectorXd singular_values;
  /// Orthonormal kernel vectors (full grid length, zero on margin nodes).
  /// Spans the numeric nullspace on interior coordinates when
  /// kernel_dim <= max_basis, otherwise an orthonormal subset of it.
  Eigen::MatrixXd kernel_basis;
  /// |A v| / |v| for every returned kernel vector.
  std::vector<double> residuals;
};

/// Numeric rank of A restricted to interior (non-margin) columns and a
/// basis of its nullspace there.
KernelDiagnostics kernel_diagnostics(const OperatorMatrix& op, const GridDomain& domain,
                                     const KernelOptions& options = {});

struct SeparationReport {
  struct Pair {
    std::size_t first = 0;
    std::size_t second = 0;
    double transform_diff = 0.0;
    double function_diff = 0.0;
  };
  /// Distinct candidates with indistinguishable sampled transforms.
  std::vector<Pair> witnesses;
  /// Candidates that are equal as functions (and so trivially as transforms).
  std::vector<Pair> identical;
  double tol = 0.0;
  std::string summary;
};

/// Looks for pairs (f, g) with max|R f - R g| <= tol * scale but f != g.
/// Finding none says nothing about injectivity beyond this sampling.
SeparationReport separates_points_check(const FamilyEmbedding& emb,
                                        std::span<const ChartPoint> chart_samples,
                                        std::span<const TestFunction> candidates,
                                        double tol = 1e-9);

/// Regular (theta, s) grid over the line chart: angles k*pi/n_angles and
/// offsets spread uniformly over [-s_max, s_max].
std::vector<ChartPoint> sinogram_samples(const FamilyEmbedding& emb, int n_angles, int n_offsets);

/// Regular product grid over any chart, shrunk by `inset` on non-periodic axes.
std::vector<ChartPoint> chart_grid_samples(const Chart& chart, std::span<const int> counts,
                                           double inset = 0.0);

}  // namespace radoncurv

#endif  // RADONCURV_TRANSFORM_HPP
