#ifndef RADONCURV_TESTS_FIXTURES_HPP
#define RADONCURV_TESTS_FIXTURES_HPP

#include "radoncurv/embedding.hpp"
#include "radoncurv/grid.hpp"

#include <cmath>
#include <random>

namespace fixtures {

inline radoncurv::GridDomain box_grid(int n, double half, int margin = 4) {
  return radoncurv::make_grid(2, {{-half, half}, {-half, half}}, {n, n}, margin);
}

/// Uniform point in the chart box shrunk by `inset` of each width.
inline radoncurv::ChartPoint chart_point(const radoncurv::Chart& chart, std::mt19937_64& rng,
                                         double inset = 0.2) {
  radoncurv::ChartPoint y(chart.k());
  for (int a = 0; a < chart.k(); ++a) {
    const radoncurv::Interval b = chart.box[static_cast<std::size_t>(a)];
    y[a] = std::uniform_real_distribution<double>(b.lo + inset * b.width(),
                                                  b.hi - inset * b.width())(rng);
  }
  return y;
}

inline double rel(double value, double reference) {
  return std::fabs(value - reference) / (std::fabs(reference) + 1e-12);
}

}  // namespace fixtures

#endif  // RADONCURV_TESTS_FIXTURES_HPP
