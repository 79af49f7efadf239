#include "tdmc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tdmc/errors.hpp"

namespace tdmc {

std::vector<double> reference_samples(const MarkovKernel& kernel, const ChiVariant& chi,
                                      const Observable& f, std::span<const double> x0,
                                      std::size_t n_steps, std::size_t n_samples,
                                      std::uint64_t seed, Execution exec) {
  if (n_samples < 2) throw ConfigError("reference estimate needs at least two samples");
  if (x0.size() != kernel.dimension()) throw ConfigError("x0 does not match kernel dimension");
  if (!all_finite(x0)) throw ConfigError("initial state must be finite");
  const std::size_t d = x0.size();
  return map_replicas<double>(n_samples, exec, [&](std::size_t i) {
    Rng rng = make_stream(seed, i, StreamTag::oracle);
    StateVector x(x0.begin(), x0.end()), y(d);
    double log_weight = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
      kernel.step(x, y, rng);
      const double c = chi_eval(chi, x, y, k);
      if (std::isnan(c)) throw WeightOverflowError(k, i, "chi evaluated to NaN");
      log_weight -= std::clamp(c, -kChiClamp, kChiClamp);
      x.swap(y);
    }
    const double v = f(x);
    if (!std::isfinite(v)) throw DataError("observable is not finite in sample " + std::to_string(i));
    return log_weight == 0.0 ? v : std::exp(std::clamp(log_weight, -kChiClamp, kChiClamp)) * v;
  });
}

ReferenceEstimate reference_estimate(const MarkovKernel& kernel, const ChiVariant& chi,
                                     const Observable& f, std::span<const double> x0,
                                     std::size_t n_steps, std::size_t n_samples,
                                     std::uint64_t seed, Execution exec) {
  const auto samples = reference_samples(kernel, chi, f, x0, n_steps, n_samples, seed, exec);
  const SampleStats s = summarize(samples);
  return ReferenceEstimate{s.mean, s.std_error, n_samples,
                           static_cast<std::uint64_t>(n_samples) * n_steps};
}

double analytic_walk_normalization(double horizon, double eps) {
  if (horizon == 0.0) return 1.0;
  const double steps = std::round(horizon / eps);
  return std::exp(steps * eps / 2.0);
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  // The alternating series converges too slowly to be useful near zero, where
  // the survival function is 1 to double precision anyway.
  if (x < 0.18) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    sum += (j % 2 == 1) ? term : -term;
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult two_sample_ks(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DataError("two-sample KS test needs non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double effective = n * m / (n + m);
  return {d, kolmogorov_survival(std::sqrt(effective) * d)};
}

KsResult ks_uniform(std::span<const double> sample) {
  if (sample.empty()) throw DataError("KS test needs a non-empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = std::clamp(x[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_survival(std::sqrt(n) * d)};
}

double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DataError("slope fit needs equally many x and y values");
  if (xs.size() < 3) throw DataError("slope fit needs at least three points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) throw DataError("slope fit needs distinct x values");
  return sxy / sxx;
}

double SampleStats::variance_stderr() const {
  if (n < 2) return 0.0;
  const double biased = variance * static_cast<double>(n - 1) / static_cast<double>(n);
  return std::sqrt(std::max(0.0, fourth_moment - biased * biased) / static_cast<double>(n));
}

SampleStats summarize(std::span<const double> values) {
  SampleStats s;
  s.n = values.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double m2 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double c = v - s.mean;
    m2 += c * c;
    m4 += c * c * c * c;
  }
  if (s.n > 1) {
    s.variance = m2 / static_cast<double>(s.n - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(s.n));
  }
  s.fourth_moment = m4 / static_cast<double>(s.n);
  return s;
}

}  // namespace tdmc
