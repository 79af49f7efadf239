#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tdmc/kernel.hpp"
#include "tdmc/replicas.hpp"
#include "tdmc/weights.hpp"

namespace tdmc {

struct ReferenceEstimate {
  double value = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n_samples)
  std::size_t n_samples = 0;
  std::uint64_t workload = 0;  // n_samples * n_steps
};

// Branching-free Monte Carlo of E[f(y_K) exp(-sum_k chi(y_k, y_{k+1}))]: one
// weighted path per sample, sample i drawing from stream (seed, i, oracle).
ReferenceEstimate reference_estimate(const MarkovKernel& kernel, const ChiVariant& chi,
                                     const Observable& f, std::span<const double> x0,
                                     std::size_t n_steps, std::size_t n_samples,
                                     std::uint64_t seed, Execution exec = Execution::parallel);

// Per-sample values behind reference_estimate, in sample order.
std::vector<double> reference_samples(const MarkovKernel& kernel, const ChiVariant& chi,
                                      const Observable& f, std::span<const double> x0,
                                      std::size_t n_steps, std::size_t n_samples,
                                      std::uint64_t seed, Execution exec = Execution::parallel);

// <1>_horizon for the Gaussian walk weighted by its increments:
// (E exp(-sqrt(eps) xi))^(horizon/eps) = exp(eps/2)^(horizon/eps).
double analytic_walk_normalization(double horizon, double eps);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov survival function Q(x) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2),
// truncated at 100 terms.
double kolmogorov_survival(double x);

// Two-sample Kolmogorov-Smirnov test; ties are handled by stepping both
// empirical CDFs past a shared value together.
KsResult two_sample_ks(std::span<const double> a, std::span<const double> b);

// One-sample test against the U(0,1) distribution function.
KsResult ks_uniform(std::span<const double> sample);

// Least-squares slope of ys against xs (at least three points).
double loglog_slope(std::span<const double> xs, std::span<const double> ys);

// Sample moments, accumulated in index order.
struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;       // unbiased
  double std_error = 0.0;      // sqrt(variance / n)
  double fourth_moment = 0.0;  // central
  // Standard error of the sample variance, sqrt((m4 - s^4) / n).
  double variance_stderr() const;
};

SampleStats summarize(std::span<const double> values);

}  // namespace tdmc
