#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "tdmc/kernel.hpp"
#include "tdmc/models.hpp"

namespace tdmc {

// Weight functions chi(x, y, k). A step from x to y is weighted by exp(-chi).
class ChiVariant {
 public:
  enum class Kind {
    trapezoid_potential,   // (V(x) + V(y)) dt / 2
    stochastic_integral,   // V(x) (y - x), one-dimensional
    potential_difference,  // V(y) - V(x)
    increment,             // y - x, one-dimensional
    filter_likelihood,     // |y eps - obs[k+1]|^2 / (0.02 eps)
  };

  static ChiVariant trapezoid(Observable potential, double dt);
  static ChiVariant stochastic_integral(Observable potential);
  static ChiVariant potential_difference(Observable potential);
  static ChiVariant increment();
  static ChiVariant filter_likelihood(std::shared_ptr<const ObservationPath> observations);
  // chi == 0, expressed as a potential difference of the zero potential.
  static ChiVariant zero();

  Kind kind() const { return kind_; }
  // Likelihood weights carry an unknown normalisation and are only meaningful
  // through a normalising population control.
  bool requires_normalized_control() const { return kind_ == Kind::filter_likelihood; }

  double operator()(std::span<const double> x, std::span<const double> y, std::size_t k) const;

 private:
  friend double chi_eval(const ChiVariant&, std::span<const double>, std::span<const double>,
                         std::size_t);

  ChiVariant(Kind kind, Observable potential, double dt,
             std::shared_ptr<const ObservationPath> observations);

  Kind kind_;
  Observable potential_;
  double dt_ = 0.0;
  std::shared_ptr<const ObservationPath> observations_;
};

// Value of chi for the step x -> y taken from step index k to k + 1. Throws
// DataError when a likelihood has no observation for step k + 1 and ConfigError
// when a one-dimensional variant sees a multi-dimensional state.
double chi_eval(const ChiVariant& chi, std::span<const double> x, std::span<const double> y,
                std::size_t k);

inline constexpr double kChiClamp = 700.0;

// exp(carried_log_weight - chi) with chi, and then the total exponent, clamped
// to [-700, 700]. Every clamp increments *clamp_count. NaN chi throws
// WeightOverflowError.
double raw_weight(double chi, double carried_log_weight, std::size_t step, std::size_t particle,
                  std::size_t* clamp_count = nullptr);

std::vector<double> raw_weights(std::span<const double> chis,
                                std::span<const double> carried_log_weights, std::size_t step,
                                std::size_t* clamp_count = nullptr);

struct PopulationControl {
  enum class Kind { none, self_normalized, mean_m, alpha_power, exact_m };

  Kind kind = Kind::none;
  std::size_t target = 0;  // M
  double alpha = 0.0;

  static PopulationControl none() { return {}; }
  static PopulationControl self_normalized() { return {Kind::self_normalized, 0, 0.0}; }
  static PopulationControl mean_m(std::size_t m) { return {Kind::mean_m, m, 0.0}; }
  static PopulationControl alpha_power(std::size_t m, double alpha) {
    return {Kind::alpha_power, m, alpha};
  }
  // Self-normalised weights followed by uniform up/down-sampling to exactly M
  // particles. Plain mode only.
  static PopulationControl exact_m(std::size_t m) { return {Kind::exact_m, m, 0.0}; }

  bool normalizing() const { return kind != Kind::none; }
};

// Throws ConfigError for combinations that cannot be run (missing M, negative
// alpha, likelihood weights without normalisation).
void validate(const ChiVariant& chi, const PopulationControl& control);

// Maps raw weights to branching weights P. Sums are accumulated in extended
// precision so that the normalised controls hit their target total to within
// one ulp. Throws DegenerateWeightsError if every raw weight is zero.
void apply_population_control(std::span<const double> raw, const PopulationControl& control,
                              std::span<double> out);
std::vector<double> apply_population_control(std::span<const double> raw,
                                             const PopulationControl& control);

}  // namespace tdmc
