#include "radoncurv/transform.hpp"

#include <cmath>
#include <sstream>

namespace radoncurv {

namespace {

void require_samples(const FamilyEmbedding& emb, std::span<const ChartPoint> samples,
                     const char* who) {
  const std::vector<double> none(static_cast<std::size_t>(emb.chart().k()), 0.0);
  for (std::size_t j = 0; j < samples.size(); ++j) {
    if (!emb.chart().contains(samples[j], none)) {
      throw std::domain_error(std::string(who) + ": chart sample " + std::to_string(j) +
                              " lies outside the chart");
    }
  }
}

}  // namespace

SampledTransform radon_forward(const FamilyEmbedding& emb, const TestFunction& f,
                               std::span<const ChartPoint> chart_samples) {
  if (f.size() != emb.domain().size()) {
    throw std::invalid_argument("radon_forward: test function length does not match grid");
  }
  require_samples(emb, chart_samples, "radon_forward");
  SampledTransform out;
  out.chart_samples.assign(chart_samples.begin(), chart_samples.end());
  out.values.resize(chart_samples.size());
  if (!f.support_ok) {
    out.warnings.emplace_back(
        "test function was clipped on the margin; it is not compactly supported on this grid");
  }
  for (std::size_t j = 0; j < chart_samples.size(); ++j) {
    out.values[j] = pair(emb.sigma(chart_samples[j]), f);
  }
  return out;
}

long double transform_value_extended(const FamilyEmbedding& emb, const InterpolatedField& field,
                                     const ExtendedPoint& y) {
  const auto family = emb.quadrature();
  if (!family) throw std::invalid_argument("transform_value_extended: embedding has no quadrature family");
  long double sum = 0.0L;
  for (const auto& node : family->nodes_extended(y, 0)) sum += node.c * field.value_extended(node.p);
  return sum;
}

OperatorMatrix operator_matrix(const FamilyEmbedding& emb, std::span<const ChartPoint> chart_samples) {
  const double entries = static_cast<double>(chart_samples.size()) *
                         static_cast<double>(emb.domain().size());
  if (entries > kOperatorEntryCap) {
    std::ostringstream os;
    os << "operator_matrix: " << chart_samples.size() << " x " << emb.domain().size()
       << " exceeds the dense cap of " << kOperatorEntryCap << " entries";
    throw std::length_error(os.str());
  }
  require_samples(emb, chart_samples, "operator_matrix");
  OperatorMatrix op;
  op.rows.assign(chart_samples.begin(), chart_samples.end());
  op.matrix.resize(static_cast<Eigen::Index>(chart_samples.size()),
                   static_cast<Eigen::Index>(emb.domain().size()));
  for (std::size_t j = 0; j < chart_samples.size(); ++j) {
    op.matrix.row(static_cast<Eigen::Index>(j)) = emb.sigma(chart_samples[j]).weights.transpose();
  }
  return op;
}

std::vector<double> apply(const OperatorMatrix& op, const TestFunction& f) {
  if (static_cast<Eigen::Index>(f.size()) != op.matrix.cols()) {
    throw std::invalid_argument("apply: test function length does not match operator");
  }
  std::vector<double> out(static_cast<std::size_t>(op.matrix.rows()));
  const auto n = static_cast<std::size_t>(op.matrix.cols());
  for (Eigen::Index j = 0; j < op.matrix.rows(); ++j) {
    out[static_cast<std::size_t>(j)] =
        dot_sequential({op.matrix.row(j).data(), n}, {f.values.data(), n});
  }
  return out;
}

KernelDiagnostics kernel_diagnostics(const OperatorMatrix& op, const GridDomain& domain,
                                     const KernelOptions& options) {
  if (op.matrix.rows() == 0 || op.matrix.cols() == 0) {
    throw std::invalid_argument("kernel_diagnostics: empty operator matrix");
  }
  if (!(options.tol > 0.0)) throw std::invalid_argument("kernel_diagnostics: tol must be > 0");
  if (op.matrix.cols() != static_cast<Eigen::Index>(domain.size())) {
    throw std::invalid_argument("kernel_diagnostics: operator does not match grid");
  }

  std::vector<Eigen::Index> interior;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (!domain.in_margin(i)) interior.push_back(static_cast<Eigen::Index>(i));
  }
  const auto n_int = static_cast<Eigen::Index>(interior.size());
  Eigen::MatrixXd a_int(op.matrix.rows(), n_int);
  for (Eigen::Index c = 0; c < n_int; ++c) a_int.col(c) = op.matrix.col(interior[static_cast<std::size_t>(c)]);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a_int, Eigen::ComputeThinV);
  KernelDiagnostics out;
  out.interior_size = interior.size();
  out.singular_values = svd.singularValues();
  out.sigma_max = out.singular_values.size() ? out.singular_values[0] : 0.0;
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    if (out.sigma_max > 0.0 && out.singular_values[i] >= options.tol * out.sigma_max) ++out.rank;
  }
  out.kernel_dim = interior.size() - static_cast<std::size_t>(out.rank);

  // Project coordinate vectors off the numeric row space and orthonormalize.
  const Eigen::MatrixXd row_space = svd.matrixV().leftCols(out.rank);
  const std::size_t wanted = std::min(out.kernel_dim, options.max_basis);
  std::vector<Eigen::VectorXd> accepted;
  for (Eigen::Index i = 0; i < n_int && accepted.size() < wanted; ++i) {
    Eigen::VectorXd v = -row_space * row_space.row(i).transpose();
    v[i] += 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      v -= row_space * (row_space.transpose() * v);
      for (const auto& u : accepted) v -= u.dot(v) * u;
    }
    const double norm = v.norm();
    if (norm < 1e-3) continue;
    accepted.push_back(v / norm);
  }

  out.kernel_basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(domain.size()),
                                           static_cast<Eigen::Index>(accepted.size()));
  for (std::size_t c = 0; c < accepted.size(); ++c) {
    for (Eigen::Index r = 0; r < n_int; ++r) {
      out.kernel_basis(interior[static_cast<std::size_t>(r)], static_cast<Eigen::Index>(c)) = accepted[c][r];
    }
    const Eigen::VectorXd image = op.matrix * out.kernel_basis.col(static_cast<Eigen::Index>(c));
    out.residuals.push_back(image.norm() / out.kernel_basis.col(static_cast<Eigen::Index>(c)).norm());
  }
  return out;
}

SeparationReport separates_points_check(const FamilyEmbedding& emb,
                                        std::span<const ChartPoint> chart_samples,
                                        std::span<const TestFunction> candidates, double tol) {
  require_samples(emb, chart_samples, "separates_points_check");
  const std::size_t m = candidates.size();
  std::vector<std::vector<double>> transforms(m, std::vector<double>(chart_samples.size()));
  for (std::size_t j = 0; j < chart_samples.size(); ++j) {
    const DistributionVector w = emb.sigma(chart_samples[j]);
    for (std::size_t c = 0; c < m; ++c) transforms[c][j] = pair(w, candidates[c]);
  }
  double scale = 0.0;
  for (const auto& t : transforms) for (double v : t) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) scale = 1.0;

  SeparationReport report;
  report.tol = tol;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = i + 1; k < m; ++k) {
      double td = 0.0;
      for (std::size_t j = 0; j < chart_samples.size(); ++j) {
        td = std::max(td, std::fabs(transforms[i][j] - transforms[k][j]));
      }
      if (td > tol * scale) continue;
      const double fd = (candidates[i].values - candidates[k].values).cwiseAbs().maxCoeff();
      const double fscale = std::max({candidates[i].sup_norm(), candidates[k].sup_norm(), 1e-300});
      SeparationReport::Pair p{i, k, td, fd};
      if (fd > tol * fscale) {
        report.witnesses.push_back(p);
      } else {
        report.identical.push_back(p);
      }
    }
  }
  std::ostringstream os;
  if (report.witnesses.empty()) {
    os << "no non-injectivity witnesses among " << m << " candidates at this sampling ("
       << chart_samples.size() << " chart points); injectivity is not certified";
  } else {
    os << report.witnesses.size() << " non-injectivity witness pair(s) among " << m
       << " candidates at this sampling (" << chart_samples.size() << " chart points)";
  }
  report.summary = os.str();
  return report;
}

std::vector<ChartPoint> chart_grid_samples(const Chart& chart, std::span<const int> counts,
                                           double inset) {
  if (static_cast<int>(counts.size()) != chart.k()) {
    throw std::invalid_argument("chart_grid_samples: one count per chart axis expected");
  }
  std::vector<std::vector<double>> axes(static_cast<std::size_t>(chart.k()));
  for (int a = 0; a < chart.k(); ++a) {
    const int m = counts[static_cast<std::size_t>(a)];
    if (m < 1) throw std::invalid_argument("chart_grid_samples: counts must be >= 1");
    const Interval box = chart.box[static_cast<std::size_t>(a)];
    auto& ax = axes[static_cast<std::size_t>(a)];
    if (chart.periodic[static_cast<std::size_t>(a)]) {
      for (int j = 0; j < m; ++j) ax.push_back(box.lo + j * box.width() / m);
    } else if (m == 1) {
      ax.push_back(box.center());
    } else {
      const double lo = box.lo + inset, hi = box.hi - inset;
      for (int j = 0; j < m; ++j) ax.push_back(lo + j * (hi - lo) / (m - 1));
    }
  }
  std::vector<ChartPoint> out;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    ChartPoint y(chart.k());
    for (int a = 0; a < chart.k(); ++a) y[a] = axes[static_cast<std::size_t>(a)][idx[static_cast<std::size_t>(a)]];
    out.push_back(std::move(y));
    int a = chart.k() - 1;
    for (; a >= 0; --a) {
      if (++idx[static_cast<std::size_t>(a)] < axes[static_cast<std::size_t>(a)].size()) break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
    if (a < 0) break;
  }
  return out;
}

std::vector<ChartPoint> sinogram_samples(const FamilyEmbedding& emb, int n_angles, int n_offsets) {
  if (emb.descriptor().value("type", "") != "line") {
    throw std::invalid_argument("sinogram_samples: requires a line embedding");
  }
  if (n_angles < 1 || n_offsets < 1) {
    throw std::invalid_argument("sinogram_samples: angle and offset counts must be >= 1");
  }
  const std::array<int, 2> counts{n_angles, n_offsets};
  return chart_grid_samples(emb.chart(), counts);
}

}  // namespace radoncurv
