#include "tdmc/models.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "tdmc/errors.hpp"

namespace tdmc {

namespace {

void require_positive_step(double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw ConfigError("step size must be finite and non-negative");
  }
}

}  // namespace

double walk_step(double x, double eps, Rng& rng) {
  std::normal_distribution<double> normal;
  return x + std::sqrt(eps) * normal(rng);
}

GaussianWalkKernel::GaussianWalkKernel(double eps) : eps_(eps) { require_positive_step(eps); }

void GaussianWalkKernel::step(std::span<const double> from, std::span<double> to,
                              Rng& rng) const {
  to[0] = walk_step(from[0], eps_, rng);
}

namespace lj {

StateVector initial_configuration() {
  StateVector x(kStateDim, 0.0);
  for (std::size_t j = 1; j < kParticles; ++j) {
    // outer particles j = 2..7 in one-based numbering sit at angle j pi / 3
    const double angle = static_cast<double>(j + 1) * std::numbers::pi / 3.0;
    x[2 * j] = std::cos(angle);
    x[2 * j + 1] = std::sin(angle);
  }
  return x;
}

double energy(std::span<const double> x) {
  double u = 0.0;
  for (std::size_t i = 0; i < kParticles; ++i) {
    for (std::size_t j = i + 1; j < kParticles; ++j) {
      const double dx = x[2 * i] - x[2 * j];
      const double dy = x[2 * i + 1] - x[2 * j + 1];
      const double inv_r2 = 1.0 / (dx * dx + dy * dy);
      const double inv_r6 = inv_r2 * inv_r2 * inv_r2;
      u += 4.0 * (inv_r6 * inv_r6 - inv_r6);
    }
  }
  return u;
}

void energy_gradient(std::span<const double> x, double r_min, std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  const double r_min2 = r_min * r_min;
  for (std::size_t i = 0; i < kParticles; ++i) {
    for (std::size_t j = i + 1; j < kParticles; ++j) {
      const double dx = x[2 * i] - x[2 * j];
      const double dy = x[2 * i + 1] - x[2 * j + 1];
      const double r2 = dx * dx + dy * dy;
      if (r2 == 0.0) {
        throw SingularityError("Lennard-Jones particles " + std::to_string(i) + " and " +
                               std::to_string(j) + " coincide");
      }
      // dU/dr / r evaluated at the clamped distance, times the unit direction.
      double scale;
      if (r2 >= r_min2) {
        const double inv_r2 = 1.0 / r2;
        const double inv_r6 = inv_r2 * inv_r2 * inv_r2;
        scale = (-48.0 * inv_r6 * inv_r6 + 24.0 * inv_r6) * inv_r2;
      } else {
        const double r = std::sqrt(r2);
        const double inv_rc2 = 1.0 / r_min2;
        const double inv_rc6 = inv_rc2 * inv_rc2 * inv_rc2;
        const double dudr = (-48.0 * inv_rc6 * inv_rc6 + 24.0 * inv_rc6) / r_min;
        scale = dudr / r;
      }
      grad[2 * i] += scale * dx;
      grad[2 * i + 1] += scale * dy;
      grad[2 * j] -= scale * dx;
      grad[2 * j + 1] -= scale * dy;
    }
  }
}

StateVector energy_gradient(std::span<const double> x, double r_min) {
  StateVector g(kStateDim);
  energy_gradient(x, r_min, g);
  return g;
}

double centre_distance(std::span<const double> x) {
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < kParticles; ++i) {
    cx += x[2 * i];
    cy += x[2 * i + 1];
  }
  cx /= static_cast<double>(kParticles);
  cy /= static_cast<double>(kParticles);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < kParticles; ++i) {
    best = std::min(best, std::hypot(x[2 * i] - cx, x[2 * i + 1] - cy));
  }
  return best;
}

double reaction_coordinate(std::span<const double> x, double lambda, double gamma) {
  return lambda / gamma * centre_distance(x);
}

bool in_target_set(std::span<const double> x) { return centre_distance(x) < kTargetThreshold; }

}  // namespace lj

StateVector langevin_step(std::span<const double> x, const GradientFn& grad, double gamma,
                          double eps, Rng& rng) {
  StateVector g(x.size());
  grad(x, g);
  if (!all_finite(g)) throw SingularityError("non-finite gradient in Langevin step");
  std::normal_distribution<double> normal;
  const double sigma = std::sqrt(2.0 * gamma * eps);
  StateVector y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] - g[i] * eps + sigma * normal(rng);
  }
  return y;
}

LangevinKernel::LangevinKernel(const lj::Params& params) : params_(params) {
  if (!(params.gamma > 0.0) || !(params.eps > 0.0) || !(params.lambda >= 0.0) ||
      !(params.r_min > 0.0)) {
    throw ConfigError("Lennard-Jones parameters need gamma, eps, r_min > 0 and lambda >= 0");
  }
}

void LangevinKernel::step(std::span<const double> from, std::span<double> to, Rng& rng) const {
  std::array<double, lj::kStateDim> g;
  lj::energy_gradient(from, params_.r_min, g);
  std::normal_distribution<double> normal;
  const double sigma = std::sqrt(2.0 * params_.gamma * params_.eps);
  for (std::size_t i = 0; i < lj::kStateDim; ++i) {
    to[i] = from[i] - g[i] * params_.eps + sigma * normal(rng);
  }
}

Vec3 lorenz_drift(const Vec3& y, LorenzSign sign) {
  const double first = sign == LorenzSign::classical ? 10.0 * (y[1] - y[0]) : 10.0 * (y[0] - y[1]);
  return {first, y[0] * (28.0 - y[2]) - y[1], y[0] * y[1] - 8.0 / 3.0 * y[2]};
}

Vec3 lorenz_step(const Vec3& y, double eps, LorenzSign sign, Rng& rng, double noise_scale) {
  const Vec3 drift = lorenz_drift(y, sign);
  std::normal_distribution<double> normal;
  const double sigma = noise_scale * std::sqrt(eps);
  Vec3 out;
  for (std::size_t i = 0; i < 3; ++i) out[i] = y[i] + drift[i] * eps + sigma * normal(rng);
  return out;
}

Lorenz63Kernel::Lorenz63Kernel(double eps, LorenzSign sign, double noise_scale)
    : eps_(eps), sign_(sign), noise_scale_(noise_scale) {
  require_positive_step(eps);
}

void Lorenz63Kernel::step(std::span<const double> from, std::span<double> to, Rng& rng) const {
  const Vec3 y = lorenz_step({from[0], from[1], from[2]}, eps_, sign_, rng, noise_scale_);
  to[0] = y[0];
  to[1] = y[1];
  to[2] = y[2];
}

std::vector<Vec3> simulate_hidden_path(const Vec3& y0, double eps, std::size_t steps,
                                       LorenzSign sign, Rng& rng, double noise_scale) {
  std::vector<Vec3> path;
  path.reserve(steps + 1);
  path.push_back(y0);
  for (std::size_t k = 0; k < steps; ++k) {
    path.push_back(lorenz_step(path.back(), eps, sign, rng, noise_scale));
  }
  return path;
}

ObservationPath generate_observations(std::span<const Vec3> hidden, double eps, Rng& rng,
                                      double sigma) {
  if (hidden.empty()) throw DataError("cannot observe an empty hidden path");
  if (!(eps > 0.0) || !(sigma >= 0.0)) throw ConfigError("observations need eps > 0 and sigma >= 0");
  ObservationPath obs;
  obs.eps = eps;
  obs.noise_sigma = sigma;
  obs.increments.reserve(hidden.size());
  std::normal_distribution<double> normal;
  const double scale = sigma * std::sqrt(eps);
  for (const Vec3& y : hidden) {
    if (!all_finite(y)) throw DataError("hidden path contains non-finite values");
    Vec3 d;
    for (std::size_t i = 0; i < 3; ++i) d[i] = y[i] * eps + scale * normal(rng);
    obs.increments.push_back(d);
  }
  return obs;
}

namespace {

void write_vec3_csv(std::ostream& os, const char* header, std::span<const Vec3> rows) {
  const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
  os << header << '\n';
  for (std::size_t k = 0; k < rows.size(); ++k) {
    os << k << ',' << rows[k][0] << ',' << rows[k][1] << ',' << rows[k][2] << '\n';
  }
  os.precision(old_precision);
}

}  // namespace

void write_observations_csv(std::ostream& os, const ObservationPath& path) {
  write_vec3_csv(os, "k,d1,d2,d3", path.increments);
}

void write_hidden_csv(std::ostream& os, std::span<const Vec3> hidden) {
  write_vec3_csv(os, "k,y1,y2,y3", hidden);
}

ObservationPath read_observations_csv(std::istream& is, double eps) {
  ObservationPath obs;
  obs.eps = eps;
  std::string line;
  if (!std::getline(is, line) || line != "k,d1,d2,d3") {
    throw DataError("observation CSV must start with header k,d1,d2,d3");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::size_t k;
    char comma;
    Vec3 d;
    if (!(row >> k >> comma >> d[0] >> comma >> d[1] >> comma >> d[2])) {
      throw DataError("malformed observation row: " + line);
    }
    if (k != obs.increments.size()) throw DataError("observation rows out of order at k=" + std::to_string(k));
    obs.increments.push_back(d);
  }
  return obs;
}

}  // namespace tdmc
