#include "radoncurv/curvature.hpp"

#include "radoncurv/error.hpp"
#include "radoncurv/io.hpp"
#include "radoncurv/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace radoncurv {

namespace {

void require_cubic(const FamilyEmbedding& emb, const char* who) {
  if (emb.kernel_order() != KernelOrder::Cubic) {
    throw std::invalid_argument(std::string(who) +
                                ": curvature needs a C^2 family; use the cubic kernel");
  }
}

void require_function(const FamilyEmbedding& emb, const TestFunction& f, const char* who) {
  if (f.size() != emb.domain().size()) {
    throw std::invalid_argument(std::string(who) + ": test function length does not match grid");
  }
}

// First and second chart derivatives of sigma at one point, computed once
// and reused for every probe function and direction pair.
struct LocalJet {
  std::vector<DistributionVector> first;
  std::vector<DistributionVector> second;  // index a * k + b, shared for a > b
  int k = 0;

  LocalJet(const FamilyEmbedding& emb, const ChartPoint& y) : k(emb.chart().k()) {
    for (int a = 0; a < k; ++a) first.push_back(first_derivative(emb, y, a));
    second.resize(static_cast<std::size_t>(k * k));
    for (int a = 0; a < k; ++a) {
      for (int b = a; b < k; ++b) {
        second[static_cast<std::size_t>(a * k + b)] = fd_second(emb, y, a, b);
      }
    }
  }

  Eigen::VectorXd differential(const TestFunction& f) const {
    Eigen::VectorXd d(k);
    for (int a = 0; a < k; ++a) d[a] = pair(first[static_cast<std::size_t>(a)], f);
    return d;
  }

  // sum_ab X_a Y_b d^2 sigma / dy_a dy_b; the a < b coefficient is formed
  // as X_a Y_b + X_b Y_a, which is exactly symmetric under X <-> Y.
  DistributionVector directional_second(const Eigen::VectorXd& X, const Eigen::VectorXd& Y) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(second[0].weights.size());
    for (int a = 0; a < k; ++a) {
      w += (X[a] * Y[a]) * second[static_cast<std::size_t>(a * k + a)].weights;
      for (int b = a + 1; b < k; ++b) {
        w += (X[a] * Y[b] + X[b] * Y[a]) * second[static_cast<std::size_t>(a * k + b)].weights;
      }
    }
    return DistributionVector(std::move(w));
  }
};

void check_annihilator(const Eigen::VectorXd& differential, const TestFunction& f, double eta,
                       const char* who) {
  const double measured = differential.norm();
  const double bound = eta * f.sup_norm();
  if (measured > bound) {
    std::ostringstream os;
    os.precision(6);
    os << who << ": test function does not annihilate the tangent space: |d(R f)_y| = "
       << measured << " > " << eta << " * |f|_inf = " << bound;
    throw AnnihilatorViolation(os.str(), measured);
  }
}

void check_direction(const Eigen::VectorXd& v, int k, const char* who) {
  if (v.size() != k) throw std::invalid_argument(std::string(who) + ": direction has wrong dimension");
}

double pairing_sff(const LocalJet& jet, const Eigen::VectorXd& X, const Eigen::VectorXd& Y,
                   const TestFunction& f) {
  return pair(jet.directional_second(X, Y), f);
}

std::vector<HessianMatrix> fd_hessians(const FamilyEmbedding& emb, std::span<const TestFunction> fs,
                                       const ChartPoint& y) {
  const int k = emb.chart().k();
  const auto family = emb.quadrature();
  const double fraction = family ? kHessianFdFractionExtended : kHessianFdFraction;
  std::vector<double> step(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) step[static_cast<std::size_t>(a)] = fraction * emb.chart().width(a);
  emb.require_interior(y, step, "hessian_of_transform");

  std::vector<InterpolatedField> fields;
  if (family) {
    fields.reserve(fs.size());
    for (const auto& f : fs) fields.emplace_back(emb.domain(), f);
  }
  auto values_at = [&](const ExtendedPoint& z) {
    std::vector<long double> v(fs.size(), 0.0L);
    if (family) {
      for (const auto& node : family->nodes_extended(z, 0)) {
        for (std::size_t m = 0; m < fs.size(); ++m) v[m] += node.c * fields[m].value_extended(node.p);
      }
    } else {
      const DistributionVector w = emb.sigma(z.cast<double>());
      for (std::size_t m = 0; m < fs.size(); ++m) v[m] = pair(w, fs[m]);
    }
    return v;
  };
  const ExtendedPoint base = y.cast<long double>();
  auto shifted = [&](int a, long double da, int b, long double db) {
    ExtendedPoint z = base;
    z[a] += da;
    if (b >= 0) z[b] += db;
    return values_at(z);
  };

  std::vector<HessianMatrix> out(fs.size());
  for (auto& h : out) {
    h.y = y;
    h.H = Eigen::MatrixXd::Zero(k, k);
  }
  const std::vector<long double> center = values_at(base);
  for (int a = 0; a < k; ++a) {
    const long double ha = step[static_cast<std::size_t>(a)];
    const auto plus = shifted(a, ha, -1, 0.0);
    const auto minus = shifted(a, -ha, -1, 0.0);
    for (std::size_t m = 0; m < fs.size(); ++m) {
      out[m].H(a, a) = static_cast<double>((plus[m] - 2.0L * center[m] + minus[m]) / (ha * ha));
    }
    for (int b = a + 1; b < k; ++b) {
      const long double hb = step[static_cast<std::size_t>(b)];
      const auto pp = shifted(a, ha, b, hb);
      const auto pm = shifted(a, ha, b, -hb);
      const auto mp = shifted(a, -ha, b, hb);
      const auto mm = shifted(a, -ha, b, -hb);
      for (std::size_t m = 0; m < fs.size(); ++m) {
        out[m].H(a, b) = out[m].H(b, a) =
            static_cast<double>((pp[m] - pm[m] - mp[m] + mm[m]) / (4.0L * ha * hb));
      }
    }
  }
  return out;
}

std::vector<HessianMatrix> pairing_hessians(const FamilyEmbedding& emb,
                                            std::span<const TestFunction> fs, const ChartPoint& y) {
  const int k = emb.chart().k();
  std::vector<HessianMatrix> out(fs.size());
  for (auto& h : out) {
    h.y = y;
    h.H = Eigen::MatrixXd::Zero(k, k);
  }
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      const DistributionVector d2 = fd_second(emb, y, a, b);
      for (std::size_t m = 0; m < fs.size(); ++m) out[m].H(a, b) = out[m].H(b, a) = pair(d2, fs[m]);
    }
  }
  return out;
}

std::vector<HessianMatrix> chain_rule_hessians(const FamilyEmbedding& emb,
                                               std::span<const TestFunction> fs, const ChartPoint& y) {
  const auto family = emb.quadrature();
  if (!family) {
    throw std::invalid_argument(
        "hessian_of_transform: interpolant route needs a quadrature-backed embedding");
  }
  emb.require_interior(y, std::vector<double>(static_cast<std::size_t>(emb.chart().k()), 0.0),
                       "hessian_of_transform");
  const int k = emb.chart().k();
  const auto nodes = family->nodes(y, 2);
  std::vector<HessianMatrix> out;
  out.reserve(fs.size());
  for (const auto& f : fs) {
    const InterpolatedField field(emb.domain(), f);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(k, k);
    for (const auto& node : nodes) {
      const InterpolatedField::Jet s = field.jet(node.p);
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
          const auto pa = node.dp.col(a);
          const auto pb = node.dp.col(b);
          H(a, b) += node.d2c(a, b) * s.value + node.dc[a] * s.gradient.dot(pb) +
                     node.dc[b] * s.gradient.dot(pa) +
                     node.c * (pa.dot(s.hessian * pb) +
                               s.gradient.dot(node.d2p[static_cast<std::size_t>(a * k + b)]));
        }
      }
    }
    HessianMatrix h;
    h.y = y;
    h.asymmetry = (H - H.transpose()).cwiseAbs().maxCoeff();
    h.H = 0.5 * (H + H.transpose());
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace

std::string to_string(HessianRoute route) {
  switch (route) {
    case HessianRoute::SecondDerivativePairing: return "pairing";
    case HessianRoute::InterpolantChainRule: return "analytic";
    case HessianRoute::FiniteDifference: return "fd";
  }
  return "fd";
}

HessianRoute hessian_route_from_string(const std::string& name) {
  if (name == "pairing") return HessianRoute::SecondDerivativePairing;
  if (name == "analytic") return HessianRoute::InterpolantChainRule;
  if (name == "fd") return HessianRoute::FiniteDifference;
  throw std::invalid_argument("unknown Hessian route '" + name + "' (fd, analytic, pairing)");
}

Eigen::VectorXd differential_of_transform(const FamilyEmbedding& emb, const TestFunction& f,
                                          const ChartPoint& y) {
  require_cubic(emb, "differential_of_transform");
  require_function(emb, f, "differential_of_transform");
  const int k = emb.chart().k();
  Eigen::VectorXd d(k);
  for (int a = 0; a < k; ++a) d[a] = pair(first_derivative(emb, y, a), f);
  return d;
}

HessianMatrix hessian_of_transform(const FamilyEmbedding& emb, const TestFunction& f,
                                   const ChartPoint& y) {
  return hessian_of_transform(emb, f, y,
                              emb.has_analytic_second() ? HessianRoute::SecondDerivativePairing
                                                        : HessianRoute::FiniteDifference);
}

HessianMatrix hessian_of_transform(const FamilyEmbedding& emb, const TestFunction& f,
                                   const ChartPoint& y, HessianRoute route) {
  return hessians_of_transform(emb, std::span(&f, 1), y, route).front();
}

std::vector<HessianMatrix> hessians_of_transform(const FamilyEmbedding& emb,
                                                 std::span<const TestFunction> fs,
                                                 const ChartPoint& y, HessianRoute route) {
  require_cubic(emb, "hessian_of_transform");
  for (const auto& f : fs) require_function(emb, f, "hessian_of_transform");
  switch (route) {
    case HessianRoute::SecondDerivativePairing: return pairing_hessians(emb, fs, y);
    case HessianRoute::InterpolantChainRule: return chain_rule_hessians(emb, fs, y);
    case HessianRoute::FiniteDifference: return fd_hessians(emb, fs, y);
  }
  return {};
}

AnnihilatorBasis annihilator_basis(const FamilyEmbedding& emb, const ChartPoint& y,
                                   std::span<const TestFunction> pool, double eta) {
  require_cubic(emb, "annihilator_basis");
  if (pool.empty()) throw std::invalid_argument("annihilator_basis: pool is empty");
  const auto n = static_cast<Eigen::Index>(emb.domain().size());
  const auto p_count = static_cast<Eigen::Index>(pool.size());
  Eigen::MatrixXd samples(n, p_count);
  for (Eigen::Index p = 0; p < p_count; ++p) {
    require_function(emb, pool[static_cast<std::size_t>(p)], "annihilator_basis");
    samples.col(p) = pool[static_cast<std::size_t>(p)].values;
  }
  {
    const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(samples).singularValues();
    if (sv.size() == 0 || sv[0] == 0.0 || sv[sv.size() - 1] <= 1e-10 * sv[0]) {
      throw std::invalid_argument("annihilator_basis: pool is not linearly independent");
    }
  }

  const int k = emb.chart().k();
  std::vector<DistributionVector> tangent;
  for (int a = 0; a < k; ++a) tangent.push_back(first_derivative(emb, y, a));
  Eigen::MatrixXd G(p_count, k);
  for (Eigen::Index p = 0; p < p_count; ++p) {
    for (int a = 0; a < k; ++a) G(p, a) = pair(tangent[static_cast<std::size_t>(a)], pool[static_cast<std::size_t>(p)]);
  }

  // Right singular vectors of G^T, smallest singular values last.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G.transpose(), Eigen::ComputeFullV);
  const Eigen::MatrixXd& V = svd.matrixV();

  AnnihilatorBasis out;
  out.y = y;
  out.eta = eta;
  std::vector<Eigen::VectorXd> coefs;
  bool support_ok = true;
  for (const auto& f : pool) support_ok = support_ok && f.support_ok;
  for (Eigen::Index col = p_count - 1; col >= 0; --col) {
    Eigen::VectorXd alpha = V.col(col);
    Eigen::Index big = 0;
    alpha.cwiseAbs().maxCoeff(&big);
    if (alpha[big] < 0.0) alpha = -alpha;

    TestFunction f;
    f.values = samples * alpha;
    f.support_ok = support_ok;
    Eigen::VectorXd d(k);
    for (int a = 0; a < k; ++a) d[a] = pair(tangent[static_cast<std::size_t>(a)], f);
    const double norm = f.sup_norm();
    if (!(norm > 0.0)) continue;
    const double residual = d.norm() / norm;
    if (residual > eta) continue;
    out.construction_residual = std::max(out.construction_residual, residual);
    out.functions.push_back(std::move(f));
    coefs.push_back(std::move(alpha));
  }
  if (out.functions.empty()) {
    throw std::runtime_error("annihilator_basis: no pool combination annihilates the tangent space");
  }
  std::reverse(out.functions.begin(), out.functions.end());
  std::reverse(coefs.begin(), coefs.end());
  out.coefficients.resize(p_count, static_cast<Eigen::Index>(coefs.size()));
  for (std::size_t m = 0; m < coefs.size(); ++m) out.coefficients.col(static_cast<Eigen::Index>(m)) = coefs[m];
  return out;
}

double sff_pairing(const FamilyEmbedding& emb, const ChartPoint& y, const Eigen::VectorXd& X,
                   const Eigen::VectorXd& Y, const TestFunction& f, double eta) {
  require_cubic(emb, "sff_pairing");
  require_function(emb, f, "sff_pairing");
  const int k = emb.chart().k();
  check_direction(X, k, "sff_pairing");
  check_direction(Y, k, "sff_pairing");
  const LocalJet jet(emb, y);
  check_annihilator(jet.differential(f), f, eta, "sff_pairing");
  return pairing_sff(jet, X, Y, f);
}

DistributionVector flat_covariant_derivative(const FamilyEmbedding& emb, const ChartPoint& y,
                                             const Eigen::VectorXd& X, const ChartVectorField& Y,
                                             std::optional<double> step) {
  require_cubic(emb, "flat_covariant_derivative");
  const int k = emb.chart().k();
  check_direction(X, k, "flat_covariant_derivative");
  double h = std::numeric_limits<double>::infinity();
  for (int a = 0; a < k; ++a) h = std::min(h, emb.chart().width(a));
  h = step.value_or(2e-8 * h);
  if (!(h > 0.0)) throw std::invalid_argument("flat_covariant_derivative: step must be > 0");

  const std::vector<double> none(static_cast<std::size_t>(k), 0.0);
  auto field_at = [&](const ChartPoint& z) {
    if (!emb.chart().contains(z, none)) {
      throw std::domain_error("flat_covariant_derivative: stencil leaves the chart");
    }
    Eigen::VectorXd coeffs = Y(z);
    if (coeffs.size() != k) throw std::invalid_argument("flat_covariant_derivative: field has wrong dimension");
    return coeffs;
  };

  if (const auto family = emb.quadrature()) {
    const GridDomain& domain = emb.domain();
    // Both ends are accumulated on the coefficient lattice in long double
    // and subtracted there; only the difference goes through the map to
    // nodal weights.
    auto pushed = [&](const ExtendedPoint& z) {
      const ExtendedPoint coeffs = field_at(z.cast<double>()).cast<long double>();
      BsplineDistribution b(domain);
      for (const auto& node : family->nodes_extended(z, 1)) {
        if (!domain.is_safe(node.p.cast<double>())) {
          throw std::domain_error("flat_covariant_derivative: quadrature point leaves the safe interior");
        }
        b.add_jet(node.p, node.dc.dot(coeffs), node.c * (node.dp * coeffs));
      }
      return b;
    };
    const ExtendedPoint base = y.cast<long double>();
    const ExtendedPoint dx = static_cast<long double>(h) * X.cast<long double>();
    BsplineDistribution diff = pushed(base + dx);
    diff -= pushed(base - dx);
    return DistributionVector(diff.nodal_weights(1.0L / (2.0L * h)));
  }

  auto pushed = [&](const ChartPoint& z) {
    const Eigen::VectorXd coeffs = field_at(z);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(emb.domain().size()));
    for (int a = 0; a < k; ++a) {
      if (coeffs[a] != 0.0) w += coeffs[a] * first_derivative(emb, z, a).weights;
    }
    return w;
  };
  Eigen::VectorXd w = (pushed(y + h * X) - pushed(y - h * X)) / (2.0 * h);
  return DistributionVector(std::move(w));
}

DistributionVector normal_representative(const FamilyEmbedding& emb, const ChartPoint& y,
                                         const DistributionVector& v) {
  const TangentFrame frame = fd_tangent(emb, y);
  Eigen::MatrixXd T(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(frame.basis.size()));
  for (std::size_t a = 0; a < frame.basis.size(); ++a) T.col(static_cast<Eigen::Index>(a)) = frame.basis[a].weights;
  const Eigen::VectorXd coeffs = T.colPivHouseholderQr().solve(v.weights);
  return DistributionVector(v.weights - T * coeffs);
}

Eigen::VectorXd random_unit_vector(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(k);
  do {
    for (int a = 0; a < k; ++a) v[a] = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

CurvatureReport verify_curvature_theorem(const FamilyEmbedding& emb, const ChartPoint& y,
                                         std::span<const TestFunction> pool,
                                         const VerifyOptions& options) {
  require_cubic(emb, "verify_curvature_theorem");
  const int k = emb.chart().k();
  fd_tangent(emb, y);
  const AnnihilatorBasis basis = annihilator_basis(emb, y, pool, options.eta);

  CurvatureReport report;
  report.embedding = emb.descriptor();
  report.grid = grid_to_json(emb.domain());
  report.y = y;
  report.tolerance = options.tol;
  report.seed = options.seed;
  report.route = options.route;
  report.basis_size = basis.functions.size();
  report.annihilator_residual = basis.construction_residual;

  const LocalJet jet(emb, y);
  const std::vector<HessianMatrix> hessians =
      hessians_of_transform(emb, basis.functions, y, options.route);

  std::mt19937_64 rng(options.seed);
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> directions;
  for (std::size_t d = 0; d < options.n_directions; ++d) {
    Eigen::VectorXd X = random_unit_vector(k, rng);
    Eigen::VectorXd Y = random_unit_vector(k, rng);
    directions.emplace_back(std::move(X), std::move(Y));
  }

  auto add_records = [&](std::size_t index, const TestFunction& f, const HessianMatrix& h) {
    for (std::size_t d = 0; d < directions.size(); ++d) {
      const auto& [X, Y] = directions[d];
      CurvatureRecord r;
      r.direction = d;
      r.function = index;
      r.X = X;
      r.Y = Y;
      r.sff_value = pairing_sff(jet, X, Y, f);
      r.hessian_value = X.dot(h.H * Y);
      r.abs_residual = std::fabs(r.sff_value - r.hessian_value);
      r.rel_residual = r.abs_residual / (std::fabs(r.hessian_value) + 1e-12);
      report.max_rel_residual = std::max(report.max_rel_residual, r.rel_residual);
      report.records.push_back(std::move(r));
    }
  };

  for (std::size_t m = 0; m < basis.functions.size(); ++m) {
    const TestFunction& f = basis.functions[m];
    check_annihilator(jet.differential(f), f, options.eta, "verify_curvature_theorem");
    add_records(m, f, hessians[m]);
  }

  // Extra probes go through the same guard; a violation is reported, never compared.
  for (std::size_t e = 0; e < options.extra_probes.size(); ++e) {
    const TestFunction& f = options.extra_probes[e];
    require_function(emb, f, "verify_curvature_theorem");
    try {
      check_annihilator(jet.differential(f), f, options.eta, "verify_curvature_theorem");
    } catch (const AnnihilatorViolation& err) {
      report.errors.push_back("extra probe " + std::to_string(e) + ": " + err.what());
      continue;
    }
    add_records(basis.functions.size() + e, f, hessian_of_transform(emb, f, y, options.route));
  }

  report.pass = report.errors.empty() && report.max_rel_residual <= options.tol;
  return report;
}

}  // namespace radoncurv
