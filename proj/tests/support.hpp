#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "tdmc/oracle.hpp"
#include "tdmc/rng.hpp"

namespace tdmc::testing {

inline Rng test_stream(std::uint64_t index, std::uint32_t salt = 0) {
  return make_stream(20240611, index, StreamTag::test, salt);
}

// |a - b| within k combined standard errors.
inline bool within_se(double a, double b, double se, double k = 3.0) {
  return std::abs(a - b) <= k * se;
}

// Exact expectation over u ~ U(0,1) of a function of u that is constant between
// the given breakpoints: evaluated at every cell midpoint and weighted by the
// cell width.
template <class Fn>
long double integrate_piecewise(std::vector<double> breaks, Fn&& fn) {
  breaks.push_back(0.0);
  breaks.push_back(1.0);
  std::sort(breaks.begin(), breaks.end());
  long double total = 0.0L;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = std::clamp(breaks[i], 0.0, 1.0), b = std::clamp(breaks[i + 1], 0.0, 1.0);
    if (b <= a) continue;
    total += static_cast<long double>(b - a) * static_cast<long double>(fn(0.5 * (a + b)));
  }
  return total;
}

// 2-D version over (theta, u) on the product of the two breakpoint grids.
template <class Fn>
long double integrate_piecewise_2d(std::vector<double> theta_breaks, std::vector<double> u_breaks,
                                   Fn&& fn) {
  return integrate_piecewise(theta_breaks, [&](double theta) {
    return static_cast<double>(
        integrate_piecewise(u_breaks, [&](double u) { return fn(theta, u); }));
  });
}

inline double fractional(double p) { return p - std::floor(p); }

}  // namespace tdmc::testing
