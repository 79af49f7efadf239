#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tdmc/rng.hpp"

namespace tdmc {

// Coordinates of one copy of the underlying chain. The dimension is fixed for
// the lifetime of a run.
using StateVector = std::vector<double>;

// Real-valued function of a state (test functions f, potentials V).
using Observable = std::function<double(std::span<const double>)>;

inline bool all_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// One step of a time-homogeneous Markov chain. Implementations are immutable;
// all randomness comes from the caller's stream, so a kernel can be shared by
// every replica of a run.
class MarkovKernel {
 public:
  virtual ~MarkovKernel() = default;
  virtual std::size_t dimension() const = 0;
  // Draws to ~ P(y_{k+1} in dx | y_k = from). `from` and `to` do not alias.
  virtual void step(std::span<const double> from, std::span<double> to, Rng& rng) const = 0;
};

}  // namespace tdmc
