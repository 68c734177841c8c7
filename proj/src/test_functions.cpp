#include "radoncurv/test_functions.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace radoncurv {

TestFunction gaussian(const GridDomain& domain, const Point& center, double width, double amplitude) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian: width must be > 0");
  return make_test_function(domain, [&](const Point& x) {
    return amplitude * std::exp(-(x - center).squaredNorm() / (width * width));
  });
}

TestFunction smooth_bump(const GridDomain& domain, const Point& center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("smooth_bump: radius must be > 0");
  return make_test_function(domain, [&](const Point& x) {
    const double r2 = (x - center).squaredNorm() / (radius * radius);
    return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
  });
}

TestFunction builtin_test_function(const GridDomain& domain, const std::string& name, double width) {
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& e : domain.extent()) smallest = std::min(smallest, e.width());
  const Point c = domain.center();
  if (name == "gaussian") return gaussian(domain, c, width > 0.0 ? width : 1.0);
  if (name == "zero") return make_test_function(domain, [](const Point&) { return 0.0; });
  const double radius = width > 0.0 ? width : 0.25 * smallest;
  if (name == "bump") return smooth_bump(domain, c, radius);
  if (name == "two-bumps") {
    Point shift = Point::Zero(domain.dim());
    shift[0] = 1.5 * radius;
    const TestFunction a = smooth_bump(domain, c - shift, radius);
    const TestFunction b = smooth_bump(domain, c + shift, radius);
    TestFunction sum;
    sum.values = a.values + b.values;
    sum.support_ok = a.support_ok && b.support_ok;
    return sum;
  }
  throw std::invalid_argument("unknown test function '" + name + "' (gaussian, bump, two-bumps, zero)");
}

std::vector<TestFunction> annihilator_pool(const FamilyEmbedding& emb, const ChartPoint& y,
                                           std::size_t count, std::uint64_t seed,
                                           double radius_fraction) {
  const GridDomain& domain = emb.domain();
  const int dim = domain.dim();
  double largest = 0.0;
  for (const auto& e : domain.extent()) largest = std::max(largest, e.width());
  const double radius = radius_fraction * largest;

  // Bumps must stay clear of the margin, so centers live in a shrunken box.
  std::vector<Interval> box(dim);
  for (int a = 0; a < dim; ++a) {
    const Interval safe = domain.safe_interval(a);
    box[a] = {safe.lo + radius, safe.hi - radius};
    if (!(box[a].lo < box[a].hi)) box[a] = {safe.center(), safe.center()};
  }
  const auto inside = [&](const Point& c) {
    for (int a = 0; a < dim; ++a) {
      if (c[a] < box[a].lo || c[a] > box[a].hi) return false;
    }
    return true;
  };

  std::vector<Point> anchors;
  if (const auto family = emb.quadrature()) {
    for (auto& node : family->nodes(y, 0)) {
      if (inside(node.p)) anchors.push_back(std::move(node.p));
    }
  }
  if (anchors.empty()) {
    Point c = domain.center();
    if (!emb.quadrature() && y.size() == dim) c = y;
    for (int a = 0; a < dim; ++a) c[a] = std::clamp(c[a], box[a].lo, box[a].hi);
    anchors.push_back(std::move(c));
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, anchors.size() - 1);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<TestFunction> pool;
  pool.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Point& anchor = anchors[pick(rng)];
    Point c(dim);
    Point offset(dim);
    for (int attempt = 0; attempt < 64; ++attempt) {
      do {
        for (int a = 0; a < dim; ++a) offset[a] = unit(rng);
      } while (offset.squaredNorm() > 1.0);
      c = anchor + 0.5 * radius * offset;
      if (inside(c)) break;
    }
    for (int a = 0; a < dim; ++a) c[a] = std::clamp(c[a], box[a].lo, box[a].hi);
    pool.push_back(smooth_bump(domain, c, radius));
  }
  return pool;
}

}  // namespace radoncurv
