#include "radoncurv/embedding.hpp"

#include "radoncurv/error.hpp"
#include "radoncurv/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace radoncurv {

namespace {

std::string format_point(const ChartPoint& y) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y[i];
  os << ")";
  return os.str();
}

// Weight vector of sum_j c_j delta_{p_j} differentiated along chart axes
// a and b (-1 for none).
Eigen::VectorXd assemble(const GridDomain& domain, KernelOrder order,
                         const std::vector<QuadratureNode>& nodes, int a, int b) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.size()));
  if (order == KernelOrder::Linear) {
    for (const auto& node : nodes) out += node.c * eval_functional(domain, node.p, order).weights;
    return out;
  }
  for (const auto& node : nodes) {
    if (!domain.is_safe(node.p)) {
      throw std::domain_error("embedding: quadrature point " + format_point(node.p) +
                              " leaves the safe interior of the grid");
    }
    const PointStencil stencil = cubic_stencil(domain, node.p);
    JetCoefficients jet;
    if (a < 0) {
      jet.value = node.c;
    } else if (b < 0) {
      jet.value = node.dc[a];
      jet.gradient = node.c * node.dp.col(a);
    } else {
      const int k = static_cast<int>(node.dp.cols());
      jet.value = node.d2c(a, b);
      jet.gradient = node.dc[a] * node.dp.col(b) + node.dc[b] * node.dp.col(a) +
                     node.c * node.d2p[static_cast<std::size_t>(a * k + b)];
      jet.hessian = node.c * node.dp.col(a) * node.dp.col(b).transpose();
    }
    add_point_jet(domain, stencil, jet, out);
  }
  return out;
}

template <typename T>
T smoothstep(T u) {
  if (u <= 0 || u >= 1) return u <= 0 ? T(0) : T(1);
  return u * u * u * (10 + u * (-15 + 6 * u));
}
template <typename T>
T smoothstep_d1(T u) {
  if (u <= 0 || u >= 1) return 0;
  return 30 * u * u * (u - 1) * (u - 1);
}
template <typename T>
T smoothstep_d2(T u) {
  if (u <= 0 || u >= 1) return 0;
  return 60 * u * (u - 1) * (2 * u - 1);
}

template <typename T>
BasicCutoffJet<T> cutoff_jet(const GridDomain& domain, const Eigen::Matrix<T, Eigen::Dynamic, 1>& x) {
  const int dim = domain.dim();
  std::vector<T> g(dim), g1(dim), g2(dim);
  for (int a = 0; a < dim; ++a) {
    const Interval safe = domain.safe_interval(a);
    const T width = 2 * T(domain.spacing()[a]);
    const T u = (x[a] - safe.lo) / width;
    const T v = (safe.hi - x[a]) / width;
    const T su = smoothstep(u), sv = smoothstep(v);
    const T du = smoothstep_d1(u) / width, dv = -smoothstep_d1(v) / width;
    const T ddu = smoothstep_d2(u) / (width * width);
    const T ddv = smoothstep_d2(v) / (width * width);
    g[a] = su * sv;
    g1[a] = du * sv + su * dv;
    g2[a] = ddu * sv + 2 * du * dv + su * ddv;
  }
  BasicCutoffJet<T> out;
  out.value = 1;
  for (T v : g) out.value *= v;
  out.gradient.setZero(dim);
  out.hessian.setZero(dim, dim);
  if (out.value == 0 && std::all_of(g1.begin(), g1.end(), [](T v) { return v == 0; })) {
    return out;
  }
  auto prod_except = [&](int a, int b) {
    T p = 1;
    for (int c = 0; c < dim; ++c) if (c != a && c != b) p *= g[c];
    return p;
  };
  for (int a = 0; a < dim; ++a) {
    out.gradient[a] = g1[a] * prod_except(a, a);
    out.hessian(a, a) = g2[a] * prod_except(a, a);
    for (int b = a + 1; b < dim; ++b) {
      out.hessian(a, b) = out.hessian(b, a) = g1[a] * g1[b] * prod_except(a, b);
    }
  }
  return out;
}

class DiracFamily final : public QuadratureFamily {
 public:
  explicit DiracFamily(int dim) : dim_(dim) {}
  std::vector<QuadratureNode> nodes(const ChartPoint& y, int order) const override {
    return make(y, order);
  }
  std::vector<ExtendedNode> nodes_extended(const ExtendedPoint& y, int order) const override {
    return make(y, order);
  }

 private:
  template <typename T>
  std::vector<BasicQuadratureNode<T>> make(const Eigen::Matrix<T, Eigen::Dynamic, 1>& y, int) const {
    using Node = BasicQuadratureNode<T>;
    Node n;
    n.p = y;
    n.dp = Node::Matrix::Identity(dim_, dim_);
    n.d2p.assign(static_cast<std::size_t>(dim_ * dim_), Node::Vector::Zero(dim_));
    n.c = 1;
    n.dc = Node::Vector::Zero(dim_);
    n.d2c = Node::Matrix::Zero(dim_, dim_);
    return {std::move(n)};
  }

  int dim_;
};

class LineFamily final : public QuadratureFamily {
 public:
  LineFamily(const GridDomain& domain, int t_samples) : domain_(domain), origin_(domain.center()) {
    const double half = 0.5 * domain.diameter();
    dt_ = 2.0 * half / (t_samples - 1);
    t_.resize(static_cast<std::size_t>(t_samples));
    for (int j = 0; j < t_samples; ++j) t_[static_cast<std::size_t>(j)] = -half + j * dt_;
  }

  std::vector<QuadratureNode> nodes(const ChartPoint& y, int order) const override {
    return make(y, order);
  }
  std::vector<ExtendedNode> nodes_extended(const ExtendedPoint& y, int order) const override {
    return make(y, order);
  }

 private:
  template <typename T>
  std::vector<BasicQuadratureNode<T>> make(const Eigen::Matrix<T, Eigen::Dynamic, 1>& y, int order) const {
    using Node = BasicQuadratureNode<T>;
    using V2 = Eigen::Matrix<T, 2, 1>;
    const T theta = y[0];
    const T s = y[1];
    const V2 n(std::cos(theta), std::sin(theta));
    const V2 np(-std::sin(theta), std::cos(theta));
    const V2 origin = origin_.cast<T>();
    std::vector<Node> out;
    out.reserve(t_.size());
    for (double td : t_) {
      const T t = td;
      typename Node::Vector p = origin + s * n + t * np;
      const BasicCutoffJet<T> chi = cutoff_jet(domain_, p);
      if (chi.value == 0) continue;
      Node q;
      q.p = std::move(p);
      q.c = T(dt_) * chi.value;
      if (order >= 1) {
        q.dp.resize(2, 2);
        q.dp.col(0) = s * np - t * n;
        q.dp.col(1) = n;
        q.dc = T(dt_) * (q.dp.transpose() * chi.gradient);
      }
      if (order >= 2) {
        q.d2p.resize(4);
        q.d2p[0] = -s * n - t * np;
        q.d2p[1] = np;
        q.d2p[2] = np;
        q.d2p[3] = V2::Zero();
        q.d2c.resize(2, 2);
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            q.d2c(a, b) = T(dt_) * (q.dp.col(a).dot(chi.hessian * q.dp.col(b)) +
                                    chi.gradient.dot(q.d2p[static_cast<std::size_t>(2 * a + b)]));
          }
        }
      }
      out.push_back(std::move(q));
    }
    return out;
  }

  GridDomain domain_;
  Point origin_;
  double dt_;
  std::vector<double> t_;
};

class CircleFamily final : public QuadratureFamily {
 public:
  CircleFamily(double radius, int t_samples) {
    const double dphi = 2.0 * std::numbers::pi / t_samples;
    weight_ = radius * dphi;
    offsets_.reserve(static_cast<std::size_t>(t_samples));
    for (int j = 0; j < t_samples; ++j) {
      offsets_.emplace_back(radius * std::cos(j * dphi), radius * std::sin(j * dphi));
    }
  }

  std::vector<QuadratureNode> nodes(const ChartPoint& y, int order) const override {
    return make(y, order);
  }
  std::vector<ExtendedNode> nodes_extended(const ExtendedPoint& y, int order) const override {
    return make(y, order);
  }

 private:
  template <typename T>
  std::vector<BasicQuadratureNode<T>> make(const Eigen::Matrix<T, Eigen::Dynamic, 1>& y, int) const {
    using Node = BasicQuadratureNode<T>;
    std::vector<Node> out;
    out.reserve(offsets_.size());
    for (const auto& off : offsets_) {
      Node q;
      q.p = y + off.cast<T>();
      q.dp = Node::Matrix::Identity(2, 2);
      q.d2p.assign(4, Node::Vector::Zero(2));
      q.c = weight_;
      q.dc = Node::Vector::Zero(2);
      q.d2c = Node::Matrix::Zero(2, 2);
      out.push_back(std::move(q));
    }
    return out;
  }

  double weight_;
  std::vector<Eigen::Vector2d> offsets_;
};

}  // namespace

bool Chart::contains(const ChartPoint& y, std::span<const double> clearance) const {
  if (y.size() != k()) return false;
  for (int a = 0; a < k(); ++a) {
    if (!std::isfinite(y[a])) return false;
    if (periodic[static_cast<std::size_t>(a)]) continue;
    const Interval& b = box[static_cast<std::size_t>(a)];
    // slack for grid nodes computed as lo + i * h landing a rounding past the edge
    const double c = (clearance.empty() ? 0.0 : clearance[static_cast<std::size_t>(a)]) -
                     1e-12 * b.width();
    if (y[a] - b.lo < c || b.hi - y[a] < c) {
      return false;
    }
  }
  return true;
}

FamilyEmbedding::FamilyEmbedding(GridDomain domain, Chart chart, Sigma sigma,
                                 std::optional<FirstDerivative> d_sigma,
                                 std::optional<SecondDerivative> d2_sigma, KernelOrder order)
    : domain_(std::move(domain)),
      chart_(std::move(chart)),
      sigma_(std::move(sigma)),
      d_sigma_(std::move(d_sigma)),
      d2_sigma_(std::move(d2_sigma)),
      order_(order) {
  if (chart_.k() < 1) throw std::invalid_argument("FamilyEmbedding: chart dimension must be >= 1");
  if (chart_.periodic.size() != chart_.box.size()) chart_.periodic.resize(chart_.box.size(), false);
  if (chart_.axis_names.size() != chart_.box.size()) {
    chart_.axis_names.resize(chart_.box.size());
    for (int a = 0; a < chart_.k(); ++a) chart_.axis_names[static_cast<std::size_t>(a)] = "y" + std::to_string(a + 1);
  }
  for (int a = 0; a < chart_.k(); ++a) {
    const double w = chart_.width(a);
    if (!(w > 0.0)) throw std::invalid_argument("FamilyEmbedding: degenerate chart axis");
    fd_first_.push_back(1e-3 * w);
    fd_second_.push_back(1e-2 * w);
  }
}

DistributionVector FamilyEmbedding::d_sigma(const ChartPoint& y, int a) const {
  if (!d_sigma_) throw std::logic_error("FamilyEmbedding: no analytic first derivative");
  return (*d_sigma_)(y, a);
}

DistributionVector FamilyEmbedding::d2_sigma(const ChartPoint& y, int a, int b) const {
  if (!d2_sigma_) throw std::logic_error("FamilyEmbedding: no analytic second derivative");
  return (*d2_sigma_)(y, std::min(a, b), std::max(a, b));
}

void FamilyEmbedding::set_fd_steps(std::vector<double> first, std::vector<double> second) {
  if (static_cast<int>(first.size()) != chart_.k() || static_cast<int>(second.size()) != chart_.k()) {
    throw std::invalid_argument("set_fd_steps: one step per chart axis expected");
  }
  for (double h : first) if (!(h > 0.0)) throw std::invalid_argument("set_fd_steps: steps must be > 0");
  for (double h : second) if (!(h > 0.0)) throw std::invalid_argument("set_fd_steps: steps must be > 0");
  fd_first_ = std::move(first);
  fd_second_ = std::move(second);
}

void FamilyEmbedding::require_interior(const ChartPoint& y, std::span<const double> step,
                                       const char* who) const {
  std::vector<double> clearance(step.begin(), step.end());
  for (double& c : clearance) c *= 2.0;
  if (!chart_.contains(y, clearance)) {
    throw std::domain_error(std::string(who) + ": chart point " + format_point(y) +
                            " is outside the safe chart interior");
  }
}

FamilyEmbedding FamilyEmbedding::without_analytic_derivatives() const {
  FamilyEmbedding copy = *this;
  copy.d_sigma_.reset();
  copy.d2_sigma_.reset();
  return copy;
}

FamilyEmbedding embedding_from_quadrature(const GridDomain& domain, Chart chart,
                                          std::shared_ptr<const QuadratureFamily> family,
                                          KernelOrder order) {
  auto sigma = [domain, family, order](const ChartPoint& y) {
    return DistributionVector(assemble(domain, order, family->nodes(y, 0), -1, -1));
  };
  std::optional<FamilyEmbedding::FirstDerivative> d1;
  std::optional<FamilyEmbedding::SecondDerivative> d2;
  if (order == KernelOrder::Cubic) {
    d1 = [domain, family](const ChartPoint& y, int a) {
      return DistributionVector(assemble(domain, KernelOrder::Cubic, family->nodes(y, 1), a, -1));
    };
    d2 = [domain, family](const ChartPoint& y, int a, int b) {
      return DistributionVector(assemble(domain, KernelOrder::Cubic, family->nodes(y, 2), a, b));
    };
  }
  FamilyEmbedding emb(domain, std::move(chart), std::move(sigma), std::move(d1), std::move(d2), order);
  emb.set_quadrature(std::move(family));
  return emb;
}

CutoffJet safe_cutoff(const GridDomain& domain, const Point& x) { return cutoff_jet(domain, x); }

BasicCutoffJet<long double> safe_cutoff(const GridDomain& domain, const ExtendedPoint& x) {
  return cutoff_jet(domain, x);
}

FamilyEmbedding dirac_embedding(const GridDomain& domain, KernelOrder order) {
  Chart chart;
  for (int a = 0; a < domain.dim(); ++a) {
    chart.box.push_back(domain.safe_interval(a));
    chart.periodic.push_back(false);
    chart.axis_names.push_back("x" + std::to_string(a + 1));
  }
  auto emb = embedding_from_quadrature(domain, std::move(chart),
                                       std::make_shared<DiracFamily>(domain.dim()), order);
  emb.set_descriptor({{"type", "dirac"}, {"kernel_order", static_cast<int>(order)}});
  return emb;
}

FamilyEmbedding line_embedding(const GridDomain& domain, int t_samples, std::optional<double> s_max) {
  if (domain.dim() != 2) throw std::invalid_argument("line_embedding: domain must be 2D");
  if (t_samples < 64) throw std::invalid_argument("line_embedding: t_samples must be >= 64");
  double reach = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 2; ++a) reach = std::min(reach, 0.5 * domain.safe_interval(a).width());
  const double smax = s_max.value_or(reach);
  if (!(smax > 0.0)) throw std::invalid_argument("line_embedding: s_max must be > 0");
  Chart chart;
  chart.box = {{0.0, std::numbers::pi}, {-smax, smax}};
  chart.periodic = {true, false};
  chart.axis_names = {"theta", "s"};
  auto emb = embedding_from_quadrature(domain, std::move(chart),
                                       std::make_shared<LineFamily>(domain, t_samples));
  emb.set_descriptor({{"type", "line"}, {"t_samples", t_samples}, {"s_max", smax}});
  return emb;
}

FamilyEmbedding circle_embedding(const GridDomain& domain, double radius, int t_samples) {
  if (domain.dim() != 2) throw std::invalid_argument("circle_embedding: domain must be 2D");
  if (t_samples < 64) throw std::invalid_argument("circle_embedding: t_samples must be >= 64");
  if (!(radius > 0.0)) throw std::invalid_argument("circle_embedding: radius must be > 0");
  Chart chart;
  for (int a = 0; a < 2; ++a) {
    const Interval safe = domain.safe_interval(a);
    const Interval centers{safe.lo + radius, safe.hi - radius};
    if (!(centers.hi > centers.lo)) {
      throw std::invalid_argument("circle_embedding: radius too large for the domain");
    }
    chart.box.push_back(centers);
  }
  chart.periodic = {false, false};
  chart.axis_names = {"c1", "c2"};
  auto emb = embedding_from_quadrature(domain, std::move(chart),
                                       std::make_shared<CircleFamily>(radius, t_samples));
  emb.set_descriptor({{"type", "circle"}, {"radius", radius}, {"t_samples", t_samples}});
  return emb;
}

FamilyEmbedding embedding_from_descriptor(const GridDomain& domain, const nlohmann::json& d) {
  const std::string type = d.at("type").get<std::string>();
  if (type == "dirac") {
    return dirac_embedding(domain, kernel_order_from_int(d.value("kernel_order", 3)));
  }
  if (type == "line") {
    std::optional<double> smax;
    if (d.contains("s_max")) smax = d.at("s_max").get<double>();
    return line_embedding(domain, d.value("t_samples", 256), smax);
  }
  if (type == "circle") {
    return circle_embedding(domain, d.at("radius").get<double>(), d.value("t_samples", 256));
  }
  throw std::invalid_argument("unknown embedding type '" + type + "'");
}

DistributionVector first_derivative(const FamilyEmbedding& emb, const ChartPoint& y, int a) {
  if (emb.has_analytic_first()) return emb.d_sigma(y, a);
  const double h = emb.fd_step_first()[static_cast<std::size_t>(a)];
  emb.require_interior(y, emb.fd_step_first(), "first_derivative");
  ChartPoint yp = y, ym = y;
  yp[a] += h;
  ym[a] -= h;
  Eigen::VectorXd w = (emb.sigma(yp).weights - emb.sigma(ym).weights) / (2.0 * h);
  return DistributionVector(std::move(w));
}

TangentFrame fd_tangent(const FamilyEmbedding& emb, const ChartPoint& y) {
  if (emb.has_analytic_first()) {
    emb.require_interior(y, std::vector<double>(static_cast<std::size_t>(emb.chart().k()), 0.0), "fd_tangent");
  }
  TangentFrame frame;
  frame.y = y;
  const int k = emb.chart().k();
  Eigen::MatrixXd cols(static_cast<Eigen::Index>(emb.domain().size()), k);
  for (int a = 0; a < k; ++a) {
    frame.basis.push_back(first_derivative(emb, y, a));
    cols.col(a) = frame.basis.back().weights;
  }
  frame.singular_values = Eigen::JacobiSVD<Eigen::MatrixXd>(cols).singularValues();
  const double smax = frame.singular_values.size() ? frame.singular_values[0] : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < frame.singular_values.size(); ++i) {
    if (frame.singular_values[i] > 1e-8 * smax) ++rank;
  }
  if (rank < k) {
    throw RankDeficiencyError("fd_tangent: tangent frame has rank " + std::to_string(rank) +
                              " < " + std::to_string(k) + " at chart point " + format_point(y) +
                              "; the embedding is not an immersion there");
  }
  return frame;
}

DistributionVector fd_second(const FamilyEmbedding& emb, const ChartPoint& y, int a, int b) {
  if (emb.has_analytic_second()) return emb.d2_sigma(y, a, b);
  if (a > b) std::swap(a, b);
  const auto& step = emb.fd_step_second();
  emb.require_interior(y, step, "fd_second");
  const double ha = step[static_cast<std::size_t>(a)];
  const double hb = step[static_cast<std::size_t>(b)];
  auto at = [&](double da, double db) {
    ChartPoint z = y;
    z[a] += da;
    z[b] += db;
    return emb.sigma(z).weights;
  };
  Eigen::VectorXd w;
  if (a == b) {
    w = (at(ha, 0.0) - 2.0 * emb.sigma(y).weights + at(-ha, 0.0)) / (ha * ha);
  } else {
    w = (at(ha, hb) - at(ha, -hb) - at(-ha, hb) + at(-ha, -hb)) / (4.0 * ha * hb);
  }
  return DistributionVector(std::move(w));
}

}  // namespace radoncurv
