#include "tdmc/weights.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tdmc/errors.hpp"

namespace tdmc {

ChiVariant::ChiVariant(Kind kind, Observable potential, double dt,
                       std::shared_ptr<const ObservationPath> observations)
    : kind_(kind), potential_(std::move(potential)), dt_(dt), observations_(std::move(observations)) {}

ChiVariant ChiVariant::trapezoid(Observable potential, double dt) {
  if (!potential) throw ConfigError("trapezoid weight needs a potential");
  return ChiVariant(Kind::trapezoid_potential, std::move(potential), dt, nullptr);
}

ChiVariant ChiVariant::stochastic_integral(Observable potential) {
  if (!potential) throw ConfigError("stochastic-integral weight needs a potential");
  return ChiVariant(Kind::stochastic_integral, std::move(potential), 0.0, nullptr);
}

ChiVariant ChiVariant::potential_difference(Observable potential) {
  if (!potential) throw ConfigError("potential-difference weight needs a potential");
  return ChiVariant(Kind::potential_difference, std::move(potential), 0.0, nullptr);
}

ChiVariant ChiVariant::increment() { return ChiVariant(Kind::increment, nullptr, 0.0, nullptr); }

ChiVariant ChiVariant::filter_likelihood(std::shared_ptr<const ObservationPath> observations) {
  if (!observations || !(observations->eps > 0.0)) {
    throw ConfigError("likelihood weight needs an observation path with eps > 0");
  }
  const double eps = observations->eps;
  return ChiVariant(Kind::filter_likelihood, nullptr, eps, std::move(observations));
}

ChiVariant ChiVariant::zero() {
  return potential_difference([](std::span<const double>) { return 0.0; });
}

double ChiVariant::operator()(std::span<const double> x, std::span<const double> y,
                              std::size_t k) const {
  return chi_eval(*this, x, y, k);
}

namespace {

void require_scalar(std::span<const double> x, const char* name) {
  if (x.size() != 1) {
    throw ConfigError(std::string(name) + " weight is defined for one-dimensional states only");
  }
}

}  // namespace

double chi_eval(const ChiVariant& chi, std::span<const double> x, std::span<const double> y,
                std::size_t k) {
  using Kind = ChiVariant::Kind;
  switch (chi.kind_) {
    case Kind::trapezoid_potential:
      return 0.5 * (chi.potential_(x) + chi.potential_(y)) * chi.dt_;
    case Kind::stochastic_integral:
      require_scalar(x, "stochastic-integral");
      return chi.potential_(x) * (y[0] - x[0]);
    case Kind::potential_difference:
      return chi.potential_(y) - chi.potential_(x);
    case Kind::increment:
      require_scalar(x, "increment");
      return y[0] - x[0];
    case Kind::filter_likelihood: {
      const auto& obs = chi.observations_->increments;
      if (k + 1 >= obs.size()) {
        throw DataError("no observation for step " + std::to_string(k + 1) + " (path has " +
                        std::to_string(obs.size()) + " increments)");
      }
      if (y.size() != 3) throw ConfigError("likelihood weight expects a three-dimensional state");
      const Vec3& d = obs[k + 1];
      const double eps = chi.dt_;
      double sq = 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        const double r = y[i] * eps - d[i];
        sq += r * r;
      }
      return sq / (2.0 * kObservationNoise * kObservationNoise * eps);
    }
  }
  return 0.0;
}

double raw_weight(double chi, double carried_log_weight, std::size_t step, std::size_t particle,
                  std::size_t* clamp_count) {
  if (std::isnan(chi) || std::isnan(carried_log_weight)) {
    throw WeightOverflowError(step, particle, "chi is NaN");
  }
  auto clamp = [&](double v) {
    if (v < -kChiClamp || v > kChiClamp) {
      if (clamp_count) ++*clamp_count;
      return std::clamp(v, -kChiClamp, kChiClamp);
    }
    return v;
  };
  return std::exp(clamp(carried_log_weight - clamp(chi)));
}

std::vector<double> raw_weights(std::span<const double> chis,
                                std::span<const double> carried_log_weights, std::size_t step,
                                std::size_t* clamp_count) {
  std::vector<double> w(chis.size());
  for (std::size_t j = 0; j < chis.size(); ++j) {
    const double carried = carried_log_weights.empty() ? 0.0 : carried_log_weights[j];
    w[j] = raw_weight(chis[j], carried, step, j, clamp_count);
  }
  return w;
}

void validate(const ChiVariant& chi, const PopulationControl& control) {
  using Kind = PopulationControl::Kind;
  if (chi.requires_normalized_control() && !control.normalizing()) {
    throw ConfigError("likelihood weights require a normalising population control");
  }
  if ((control.kind == Kind::mean_m || control.kind == Kind::alpha_power ||
       control.kind == Kind::exact_m) &&
      control.target == 0) {
    throw ConfigError("population control needs a target M >= 1");
  }
  if (control.kind == Kind::alpha_power && !(control.alpha >= 0.0)) {
    throw ConfigError("alpha must be non-negative");
  }
}

void apply_population_control(std::span<const double> raw, const PopulationControl& control,
                              std::span<double> out) {
  using Kind = PopulationControl::Kind;
  if (control.kind == Kind::none) {
    std::copy(raw.begin(), raw.end(), out.begin());
    return;
  }
  if (raw.empty()) return;
  long double total = 0.0L;
  for (double w : raw) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DegenerateWeightsError("raw weights must be finite and non-negative");
    }
    total += w;
  }
  if (total == 0.0L) {
    throw DegenerateWeightsError("all " + std::to_string(raw.size()) +
                                 " raw weights are zero; the ensemble has lost the signal");
  }
  const long double n = static_cast<long double>(raw.size());
  long double mass = n;  // sum of P after normalisation
  switch (control.kind) {
    case Kind::self_normalized:
    case Kind::exact_m:
      break;
    case Kind::mean_m:
      mass = static_cast<long double>(control.target);
      break;
    case Kind::alpha_power:
      mass = n * std::pow(static_cast<long double>(control.target) / n,
                          static_cast<long double>(control.alpha));
      break;
    case Kind::none:
      break;
  }
  const long double scale = mass / total;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    out[j] = static_cast<double>(scale * static_cast<long double>(raw[j]));
  }
}

std::vector<double> apply_population_control(std::span<const double> raw,
                                             const PopulationControl& control) {
  std::vector<double> out(raw.size());
  apply_population_control(raw, control, out);
  return out;
}

}  // namespace tdmc
