#pragma once

// Independent oracles and small helpers shared by the tests.

#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <vector>

#include "angsync/core.hpp"

namespace testing_support {

/// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int k = 1; k < panels; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Circular distance computed through atan2, independent of the library's
/// modular arithmetic.
inline double circdist_atan2(double a, double b) { return std::abs(std::atan2(std::sin(a - b), std::cos(a - b))); }

/// E|<z, v>| for z fixed and v uniform on the unit sphere of C^n:
/// |<z, v>|^2 ~ Beta(1, n - 1), so the mean is Gamma(n) Gamma(3/2) / Gamma(n + 1/2).
inline double expected_random_overlap(double n) {
  return std::exp(std::lgamma(n) + std::lgamma(1.5) - std::lgamma(n + 0.5));
}

}  // namespace testing_support
