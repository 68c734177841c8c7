#include "radoncurv/kernel.hpp"

#include <cmath>

namespace radoncurv {

namespace {

// Centered cubic B-spline (support (-2, 2)) and its first two derivatives.
template <typename T>
T bspline(T t, int deriv) {
  const T a = std::fabs(t);
  if (a >= 2) return 0;
  if (a < 1) {
    switch (deriv) {
      case 0: return T(2) / 3 - a * a + a * a * a / 2;
      case 1: return t * (-2 + T(1.5) * a);
      default: return -2 + 3 * a;
    }
  }
  const T r = 2 - a;
  switch (deriv) {
    case 0: return r * r * r / 6;
    case 1: return (t < 0 ? T(0.5) : T(-0.5)) * r * r;
    default: return r;
  }
}

template <typename T>
int cell_of(T u, int n) {
  int i = static_cast<int>(std::floor(u));
  if (i < 0) i = 0;
  if (i > n - 2) i = n - 2;
  return i;
}

}  // namespace

AxisKernel::AxisKernel(double lo, double spacing, int n) : lo_(lo), h_(spacing), n_(n) {
  const int m = n + 2;
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m, m);
  // s''(x_0) = 0 and s''(x_{n-1}) = 0
  sys(0, 0) = 1.0;
  sys(0, 1) = -2.0;
  sys(0, 2) = 1.0;
  sys(m - 1, m - 3) = 1.0;
  sys(m - 1, m - 2) = -2.0;
  sys(m - 1, m - 1) = 1.0;
  for (int i = 0; i < n; ++i) {
    sys(i + 1, i) = 1.0 / 6.0;
    sys(i + 1, i + 1) = 4.0 / 6.0;
    sys(i + 1, i + 2) = 1.0 / 6.0;
  }
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, n);
  for (int i = 0; i < n; ++i) rhs(i + 1, i) = 1.0;
  q_ = sys.partialPivLu().solve(rhs);
}

int AxisKernel::bspline_window(double x, int deriv, std::array<double, 4>& basis) const {
  const double u = (x - lo_) / h_;
  const int i = cell_of(u, n_);
  const double scale = deriv == 0 ? 1.0 : (deriv == 1 ? 1.0 / h_ : 1.0 / (h_ * h_));
  for (int m = 0; m < 4; ++m) basis[m] = scale * bspline<double>(u - (i - 1 + m), deriv);
  return i;
}

void AxisKernel::cubic_weights(double x, int deriv, Eigen::Ref<Eigen::VectorXd> out) const {
  std::array<double, 4> basis;
  const int first = bspline_window(x, deriv, basis);
  out.setZero();
  for (int m = 0; m < 4; ++m) {
    if (basis[m] != 0.0) out += basis[m] * q_.row(first + m).transpose();
  }
}

void AxisKernel::linear_weights(double x, Eigen::Ref<Eigen::VectorXd> out) const {
  const double u = (x - lo_) / h_;
  const int i = cell_of(u, n_);
  const double t = u - i;
  out.setZero();
  out[i] = 1.0 - t;
  out[i + 1] = t;
}

PointStencil cubic_stencil(const GridDomain& domain, const Point& x) {
  PointStencil st;
  st.axis.resize(domain.dim());
  for (int a = 0; a < domain.dim(); ++a) {
    const AxisKernel& k = domain.axis_kernel(a);
    for (int d = 0; d < 3; ++d) {
      st.axis[a][d].resize(k.n());
      k.cubic_weights(x[a], d, st.axis[a][d]);
    }
  }
  return st;
}

void add_tensor(const GridDomain& domain, double coef,
                std::span<const Eigen::VectorXd* const> factors, Eigen::VectorXd& out) {
  if (coef == 0.0) return;
  const auto& n = domain.n();
  double* dst = out.data();
  switch (domain.dim()) {
    case 1: {
      const double* f0 = factors[0]->data();
      for (int i = 0; i < n[0]; ++i) dst[i] += coef * f0[i];
      break;
    }
    case 2: {
      const double* f0 = factors[0]->data();
      const double* f1 = factors[1]->data();
      for (int i = 0; i < n[0]; ++i) {
        const double s = coef * f0[i];
        if (s == 0.0) continue;
        double* row = dst + static_cast<std::size_t>(i) * n[1];
        for (int j = 0; j < n[1]; ++j) row[j] += s * f1[j];
      }
      break;
    }
    default: {
      const double* f0 = factors[0]->data();
      const double* f1 = factors[1]->data();
      const double* f2 = factors[2]->data();
      for (int i = 0; i < n[0]; ++i) {
        for (int j = 0; j < n[1]; ++j) {
          const double s = coef * f0[i] * f1[j];
          if (s == 0.0) continue;
          double* row = dst + (static_cast<std::size_t>(i) * n[1] + j) * n[2];
          for (int l = 0; l < n[2]; ++l) row[l] += s * f2[l];
        }
      }
      break;
    }
  }
}

void add_point_jet(const GridDomain& domain, const PointStencil& stencil,
                   const JetCoefficients& jet, Eigen::VectorXd& out) {
  const int dim = domain.dim();
  std::array<const Eigen::VectorXd*, 3> factors{};
  auto reset = [&] {
    for (int a = 0; a < dim; ++a) factors[a] = &stencil.axis[a][0];
  };

  reset();
  add_tensor(domain, jet.value, std::span(factors.data(), dim), out);
  if (jet.gradient.size() == dim) {
    for (int a = 0; a < dim; ++a) {
      reset();
      factors[a] = &stencil.axis[a][1];
      add_tensor(domain, jet.gradient[a], std::span(factors.data(), dim), out);
    }
  }
  if (jet.hessian.rows() == dim) {
    for (int a = 0; a < dim; ++a) {
      reset();
      factors[a] = &stencil.axis[a][2];
      add_tensor(domain, jet.hessian(a, a), std::span(factors.data(), dim), out);
      for (int b = a + 1; b < dim; ++b) {
        reset();
        factors[a] = &stencil.axis[a][1];
        factors[b] = &stencil.axis[b][1];
        add_tensor(domain, jet.hessian(a, b) + jet.hessian(b, a),
                   std::span(factors.data(), dim), out);
      }
    }
  }
}

namespace {

// Apply an (m x n) matrix along `axis` of a C-ordered 3-index array.
Eigen::VectorXd apply_along_axis(const Eigen::VectorXd& src, std::array<int, 3>& shape,
                                 int axis, const AxisKernel::RowMatrix& q) {
  std::array<int, 3> out_shape = shape;
  out_shape[axis] = static_cast<int>(q.rows());
  Eigen::VectorXd dst = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(out_shape[0]) * out_shape[1] * out_shape[2]);
  auto at = [](const std::array<int, 3>& s, int i, int j, int l) {
    return (static_cast<std::size_t>(i) * s[1] + j) * s[2] + l;
  };
  for (int i = 0; i < out_shape[0]; ++i) {
    for (int j = 0; j < out_shape[1]; ++j) {
      for (int l = 0; l < out_shape[2]; ++l) {
        std::array<int, 3> idx{i, j, l};
        const int row = idx[axis];
        double acc = 0.0;
        for (int c = 0; c < shape[axis]; ++c) {
          idx[axis] = c;
          acc += q(row, c) * src[at(shape, idx[0], idx[1], idx[2])];
        }
        dst[at(out_shape, i, j, l)] = acc;
      }
    }
  }
  shape = out_shape;
  return dst;
}

}  // namespace

InterpolatedField::InterpolatedField(const GridDomain& domain, const TestFunction& f)
    : domain_(&domain) {
  if (f.size() != domain.size()) {
    throw std::invalid_argument("InterpolatedField: test function length does not match grid");
  }
  std::array<int, 3> shape{1, 1, 1};
  for (int a = 0; a < domain.dim(); ++a) shape[a] = domain.n()[a];
  Eigen::VectorXd c = f.values;
  for (int a = 0; a < domain.dim(); ++a) {
    c = apply_along_axis(c, shape, a, domain.axis_kernel(a).coefficient_map());
  }
  shape_.assign(shape.begin(), shape.begin() + domain.dim());
  coef_ = std::move(c);
}

double InterpolatedField::value(const Point& x) const { return jet(x).value; }

long double InterpolatedField::value_extended(const ExtendedPoint& x) const {
  const int dim = domain_->dim();
  std::array<int, 3> first{0, 0, 0};
  std::array<int, 3> count{1, 1, 1};
  std::array<int, 3> shape{1, 1, 1};
  std::array<std::array<long double, 4>, 3> basis{};
  for (int a = 0; a < 3; ++a) basis[a][0] = 1.0L;
  for (int a = 0; a < dim; ++a) {
    const AxisKernel& k = domain_->axis_kernel(a);
    const long double u = (x[a] - k.lo()) / static_cast<long double>(k.spacing());
    const int i = cell_of(u, k.n());
    for (int m = 0; m < 4; ++m) basis[a][m] = bspline<long double>(u - (i - 1 + m), 0);
    first[a] = i;
    count[a] = 4;
    shape[a] = shape_[a];
  }
  long double sum = 0.0L;
  for (int i = 0; i < count[0]; ++i) {
    for (int j = 0; j < count[1]; ++j) {
      for (int l = 0; l < count[2]; ++l) {
        const std::size_t flat =
            (static_cast<std::size_t>(first[0] + i) * shape[1] + first[1] + j) * shape[2] +
            first[2] + l;
        sum += coef_[static_cast<Eigen::Index>(flat)] * basis[0][i] * basis[1][j] * basis[2][l];
      }
    }
  }
  return sum;
}

InterpolatedField::Jet InterpolatedField::jet(const Point& x) const {
  const int dim = domain_->dim();
  std::array<int, 3> first{0, 0, 0};
  std::array<int, 3> count{1, 1, 1};
  std::array<int, 3> shape{1, 1, 1};
  // basis[axis][deriv][m]
  std::array<std::array<std::array<double, 4>, 3>, 3> basis{};
  for (int a = 0; a < 3; ++a) basis[a][0][0] = 1.0;
  for (int a = 0; a < dim; ++a) {
    const AxisKernel& k = domain_->axis_kernel(a);
    for (int d = 0; d < 3; ++d) first[a] = k.bspline_window(x[a], d, basis[a][d]);
    count[a] = 4;
    shape[a] = shape_[a];
  }

  Jet out;
  out.gradient = Eigen::VectorXd::Zero(dim);
  out.hessian = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < count[0]; ++i) {
    for (int j = 0; j < count[1]; ++j) {
      for (int l = 0; l < count[2]; ++l) {
        const std::array<int, 3> m{i, j, l};
        const std::size_t flat =
            (static_cast<std::size_t>(first[0] + i) * shape[1] + first[1] + j) * shape[2] +
            first[2] + l;
        const double c = coef_[static_cast<Eigen::Index>(flat)];
        // product of order-0 factors with axis a replaced by order da
        auto term = [&](int a, int da, int b, int db) {
          double p = 1.0;
          for (int ax = 0; ax < dim; ++ax) {
            int order = 0;
            if (ax == a) order += da;
            if (ax == b) order += db;
            p *= basis[ax][order][m[ax]];
          }
          return p;
        };
        out.value += c * term(-1, 0, -1, 0);
        for (int a = 0; a < dim; ++a) {
          out.gradient[a] += c * term(a, 1, -1, 0);
          for (int b = a; b < dim; ++b) out.hessian(a, b) += c * term(a, 1, b, 1);
        }
      }
    }
  }
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < a; ++b) out.hessian(a, b) = out.hessian(b, a);
  }
  return out;
}

BsplineDistribution::BsplineDistribution(const GridDomain& domain) : domain_(&domain) {
  std::size_t total = 1;
  for (int a = 0; a < domain.dim(); ++a) {
    shape_[a] = domain.n()[a] + 2;
    total *= static_cast<std::size_t>(shape_[a]);
  }
  b_.assign(total, 0.0L);
}

void BsplineDistribution::add_jet(const ExtendedPoint& x, long double value,
                                  const ExtendedPoint& gradient) {
  const int dim = domain_->dim();
  std::array<int, 3> first{0, 0, 0};
  std::array<int, 3> count{1, 1, 1};
  // basis[axis][deriv][m]
  std::array<std::array<std::array<long double, 4>, 2>, 3> basis{};
  for (int a = 0; a < 3; ++a) basis[a][0][0] = 1.0L;
  for (int a = 0; a < dim; ++a) {
    const AxisKernel& k = domain_->axis_kernel(a);
    const long double h = k.spacing();
    const long double u = (x[a] - k.lo()) / h;
    const int i = cell_of(u, k.n());
    for (int m = 0; m < 4; ++m) {
      basis[a][0][m] = bspline<long double>(u - (i - 1 + m), 0);
      basis[a][1][m] = bspline<long double>(u - (i - 1 + m), 1) / h;
    }
    first[a] = i;
    count[a] = 4;
  }
  const bool with_gradient = gradient.size() == dim;
  for (int i = 0; i < count[0]; ++i) {
    for (int j = 0; j < count[1]; ++j) {
      for (int l = 0; l < count[2]; ++l) {
        const std::array<int, 3> m{i, j, l};
        long double term = value;
        for (int a = 0; a < dim; ++a) term *= basis[a][0][m[a]];
        if (with_gradient) {
          for (int d = 0; d < dim; ++d) {
            long double g = gradient[d];
            for (int a = 0; a < dim; ++a) g *= basis[a][a == d ? 1 : 0][m[a]];
            term += g;
          }
        }
        const std::size_t flat =
            (static_cast<std::size_t>(first[0] + i) * shape_[1] + first[1] + j) * shape_[2] +
            first[2] + l;
        b_[flat] += term;
      }
    }
  }
}

Eigen::VectorXd BsplineDistribution::nodal_weights(long double scale) const {
  Eigen::VectorXd c(static_cast<Eigen::Index>(b_.size()));
  for (std::size_t i = 0; i < b_.size(); ++i) c[static_cast<Eigen::Index>(i)] = static_cast<double>(scale * b_[i]);
  std::array<int, 3> shape = shape_;
  for (int a = 0; a < domain_->dim(); ++a) {
    const AxisKernel::RowMatrix qt = domain_->axis_kernel(a).coefficient_map().transpose();
    c = apply_along_axis(c, shape, a, qt);
  }
  return c;
}

BsplineDistribution& BsplineDistribution::operator-=(const BsplineDistribution& other) {
  if (other.b_.size() != b_.size()) throw std::invalid_argument("BsplineDistribution: size mismatch");
  for (std::size_t i = 0; i < b_.size(); ++i) b_[i] -= other.b_[i];
  return *this;
}

}  // namespace radoncurv
