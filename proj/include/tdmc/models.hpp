#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <span>
#include <vector>

#include "tdmc/kernel.hpp"

namespace tdmc {

// ---------------------------------------------------------------------------
// Gaussian random walk: y_{k+1} = y_k + sqrt(eps) xi.

double walk_step(double x, double eps, Rng& rng);

class GaussianWalkKernel final : public MarkovKernel {
 public:
  explicit GaussianWalkKernel(double eps);
  std::size_t dimension() const override { return 1; }
  void step(std::span<const double> from, std::span<double> to, Rng& rng) const override;
  double eps() const { return eps_; }

 private:
  double eps_;
};

// ---------------------------------------------------------------------------
// Seven two-dimensional Lennard-Jones particles under overdamped Langevin
// dynamics. Particle i occupies coordinates (2i, 2i+1); particle 0 is the one
// that starts at the centre of the hexagon.
namespace lj {

inline constexpr std::size_t kParticles = 7;
inline constexpr std::size_t kSpaceDim = 2;
inline constexpr std::size_t kStateDim = kParticles * kSpaceDim;
inline constexpr double kTargetThreshold = 0.1;

struct Params {
  double gamma = 0.4;   // temperature
  double lambda = 1.9;  // importance-function strength
  double eps = 1e-3;    // Euler step
  double r_min = 0.3;   // pair distances below this saturate the force
};

// Centre particle at the origin, the others on the unit hexagon.
StateVector initial_configuration();

double energy(std::span<const double> x);

// Gradient of energy(). The magnitude of each pair force is evaluated at
// max(r, r_min); the direction always uses the true separation. Throws
// SingularityError when two particles coincide.
void energy_gradient(std::span<const double> x, double r_min, std::span<double> grad);
StateVector energy_gradient(std::span<const double> x, double r_min);

// min_{i>=1} |x_i - centroid|: how close any outer particle is to the middle.
double centre_distance(std::span<const double> x);

// Importance function V(x) = (lambda / gamma) * centre_distance(x).
double reaction_coordinate(std::span<const double> x, double lambda, double gamma);

// Target event B: an outer particle has moved to within 0.1 of the centroid.
bool in_target_set(std::span<const double> x);

}  // namespace lj

using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

// Euler-Maruyama: y - grad U(y) eps + sqrt(2 gamma eps) xi.
StateVector langevin_step(std::span<const double> x, const GradientFn& grad, double gamma,
                          double eps, Rng& rng);

class LangevinKernel final : public MarkovKernel {
 public:
  explicit LangevinKernel(const lj::Params& params);
  std::size_t dimension() const override { return lj::kStateDim; }
  void step(std::span<const double> from, std::span<double> to, Rng& rng) const override;
  const lj::Params& params() const { return params_; }

 private:
  lj::Params params_;
};

// ---------------------------------------------------------------------------
// Stochastic Lorenz-63 and its observation process.

// classical: dy1 = 10 (y2 - y1) dt. as_printed flips that sign.
enum class LorenzSign { classical, as_printed };

using Vec3 = std::array<double, 3>;

inline constexpr Vec3 kLorenzInitial{-5.91652, -5.52332, 24.57231};
inline constexpr double kLorenzNoise = std::numbers::sqrt2;
inline constexpr double kObservationNoise = 0.1;

Vec3 lorenz_drift(const Vec3& y, LorenzSign sign);

// y + drift(y) eps + noise_scale sqrt(eps) xi.
Vec3 lorenz_step(const Vec3& y, double eps, LorenzSign sign, Rng& rng,
                 double noise_scale = kLorenzNoise);

class Lorenz63Kernel final : public MarkovKernel {
 public:
  Lorenz63Kernel(double eps, LorenzSign sign, double noise_scale = kLorenzNoise);
  std::size_t dimension() const override { return 3; }
  void step(std::span<const double> from, std::span<double> to, Rng& rng) const override;
  double eps() const { return eps_; }
  LorenzSign sign() const { return sign_; }

 private:
  double eps_;
  LorenzSign sign_;
  double noise_scale_;
};

// Hidden path y_0 .. y_steps.
std::vector<Vec3> simulate_hidden_path(const Vec3& y0, double eps, std::size_t steps,
                                       LorenzSign sign, Rng& rng,
                                       double noise_scale = kLorenzNoise);

// Increments[k] is the observed h_{(k+1)eps} - h_{k eps}.
struct ObservationPath {
  double eps = 0.0;
  double noise_sigma = kObservationNoise;
  std::vector<Vec3> increments;
};

// increments[k] = y_k eps + sigma sqrt(eps) eta, for every k of the hidden path.
ObservationPath generate_observations(std::span<const Vec3> hidden, double eps, Rng& rng,
                                      double sigma = kObservationNoise);

// CSV with header `k,d1,d2,d3` / `k,y1,y2,y3`, full round-trip precision.
void write_observations_csv(std::ostream& os, const ObservationPath& path);
ObservationPath read_observations_csv(std::istream& is, double eps);
void write_hidden_csv(std::ostream& os, std::span<const Vec3> hidden);

}  // namespace tdmc
