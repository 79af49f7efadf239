#include "tdmc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tdmc/errors.hpp"

namespace tdmc {

namespace {

// Offspring counts are bounded well before size_t could overflow.
constexpr double kMaxOffspring = 1e15;

void check_weight(double weight) {
  if (!std::isfinite(weight) || weight < 0.0) {
    throw WeightOverflowError("branching weight " + std::to_string(weight) +
                              " is not a finite non-negative number");
  }
  if (weight >= kMaxOffspring) {
    throw WeightOverflowError("branching weight " + std::to_string(weight) +
                              " would create an unbounded number of offspring");
  }
}

double clamped_chi(double chi, std::size_t& clamp_count) {
  if (chi < -kChiClamp || chi > kChiClamp) {
    ++clamp_count;
    return std::clamp(chi, -kChiClamp, kChiClamp);
  }
  return chi;
}

}  // namespace

Ensemble::Ensemble(std::size_t dimension, Mode mode, std::size_t initial_copies,
                   std::size_t population_cap)
    : dim_(dimension), mode_(mode), initial_copies_(initial_copies), population_cap_(population_cap) {
  if (dimension == 0) throw ConfigError("state dimension must be at least 1");
  if (initial_copies == 0) throw ConfigError("need at least one initial copy (M >= 1)");
  if (population_cap < initial_copies) throw ConfigError("population cap is below M");
}

Particle Ensemble::particle(std::size_t i) const {
  auto s = state(i);
  return Particle{StateVector(s.begin(), s.end()), tickets_[i], log_weights_[i]};
}

void Ensemble::push_back(const Particle& p) {
  if (p.state.size() != dim_) throw ConfigError("particle dimension does not match ensemble");
  if (!all_finite(p.state)) throw ConfigError("particle state must be finite");
  if (mode_ == Mode::ticketed && !(p.ticket >= 0.0 && p.ticket <= 1.0)) {
    throw ConfigError("ticket must lie in [0, 1]");
  }
  coords_.insert(coords_.end(), p.state.begin(), p.state.end());
  tickets_.push_back(mode_ == Mode::ticketed ? p.ticket : 0.0);
  log_weights_.push_back(p.log_weight);
}

Ensemble init_ensemble(std::span<const double> x0, std::size_t copies, Mode mode, Rng& rng,
                       std::size_t population_cap) {
  if (!all_finite(x0)) throw ConfigError("initial state must be finite");
  Ensemble ens(x0.size(), mode, copies, population_cap);
  Particle p{StateVector(x0.begin(), x0.end()), 0.0, 0.0};
  for (std::size_t j = 0; j < copies; ++j) {
    // Plain mode draws and discards the ticket so that both modes consume their
    // streams in step.
    const double ticket = uniform01(rng);
    if (mode == Mode::ticketed) p.ticket = ticket;
    ens.push_back(p);
  }
  return ens;
}

std::size_t dmc_offspring(double weight, double u) {
  check_weight(weight);
  return static_cast<std::size_t>(std::floor(weight + u));
}

std::size_t tdmc_offspring_count(double weight, double ticket, double u) {
  check_weight(weight);
  if (weight < ticket) return 0;
  return std::max<std::size_t>(static_cast<std::size_t>(std::floor(weight + u)), 1);
}

BranchDecision tdmc_offspring(double weight, double ticket, double u, Rng& rng) {
  BranchDecision d;
  d.offspring = tdmc_offspring_count(weight, ticket, u);
  if (d.offspring == 0) return d;
  if (d.offspring > 1 && weight <= 1.0) {
    throw InvariantError("several offspring from a weight P <= 1");
  }
  d.child_tickets.reserve(d.offspring);
  d.child_tickets.push_back(ticket / weight);
  if (d.offspring > 1) {
    std::uniform_real_distribution<double> fresh(1.0 / weight, 1.0);
    for (std::size_t i = 1; i < d.offspring; ++i) d.child_tickets.push_back(fresh(rng));
  }
  return d;
}

void advance(Ensemble& ens, const MarkovKernel& kernel, const ChiVariant& chi,
             const PopulationControl& control, bool branch, Rng& rng) {
  if (kernel.dimension() != ens.dim_) {
    throw ConfigError("kernel dimension " + std::to_string(kernel.dimension()) +
                      " does not match ensemble dimension " + std::to_string(ens.dim_));
  }
  if (control.kind == PopulationControl::Kind::exact_m && ens.mode_ == Mode::ticketed) {
    throw ConfigError("exact-M population control is only defined for plain mode");
  }
  const std::size_t n = ens.size();
  const std::size_t d = ens.dim_;
  const std::size_t k = ens.step_index_;
  ens.workload_ += n;
  ++ens.step_index_;
  if (n == 0) return;

  // Pass 1: move every particle.
  ens.proposed_.resize(n * d);
  for (std::size_t j = 0; j < n; ++j) {
    kernel.step(ens.state(j), {ens.proposed_.data() + j * d, d}, rng);
  }

  // Pass 2: raw weights over the whole moved ensemble.
  ens.chi_.resize(n);
  ens.raw_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::span<const double> to{ens.proposed_.data() + j * d, d};
    const double c = chi_eval(chi, ens.state(j), to, k);
    if (std::isnan(c)) throw WeightOverflowError(k, j, "chi evaluated to NaN");
    ens.chi_[j] = clamped_chi(c, ens.clamp_warnings_);
    ens.raw_[j] = raw_weight(ens.chi_[j], ens.log_weights_[j], k, j, &ens.clamp_warnings_);
  }

  if (!branch) {
    for (std::size_t j = 0; j < n; ++j) ens.log_weights_[j] -= ens.chi_[j];
    ens.coords_.swap(ens.proposed_);
    return;
  }

  // Pass 3: normalise, then branch parents in order.
  ens.branch_weight_.resize(n);
  apply_population_control(ens.raw_, control, ens.branch_weight_);

  ens.next_coords_.clear();
  ens.next_tickets_.clear();
  const std::size_t cap = ens.population_cap_;
  auto append_child = [&](std::size_t parent, double ticket) {
    const double* src = ens.proposed_.data() + parent * d;
    ens.next_coords_.insert(ens.next_coords_.end(), src, src + d);
    ens.next_tickets_.push_back(ticket);
  };

  for (std::size_t j = 0; j < n; ++j) {
    const double weight = ens.branch_weight_[j];
    if (!std::isfinite(weight)) throw WeightOverflowError(k, j, "branching weight overflow");
    const double u = uniform01(rng);
    std::size_t m;
    if (ens.mode_ == Mode::plain) {
      m = dmc_offspring(weight, u);
    } else {
      m = tdmc_offspring_count(weight, ens.tickets_[j], u);
      if (m > 1 && weight <= 1.0) throw InvariantError("several offspring from a weight P <= 1");
    }
    if (m > cap || ens.next_tickets_.size() + m > cap) {
      throw PopulationExplosionError(k + 1, ens.next_tickets_.size() + m, cap);
    }
    if (m == 0) continue;
    if (ens.mode_ == Mode::plain) {
      for (std::size_t i = 0; i < m; ++i) append_child(j, 0.0);
    } else {
      append_child(j, ens.tickets_[j] / weight);
      if (m > 1) {
        std::uniform_real_distribution<double> fresh(1.0 / weight, 1.0);
        for (std::size_t i = 1; i < m; ++i) append_child(j, fresh(rng));
      }
    }
  }

  if (control.kind == PopulationControl::Kind::exact_m && !ens.next_tickets_.empty()) {
    const std::size_t have = ens.next_tickets_.size();
    const std::size_t want = control.target;
    std::vector<std::size_t> copies(have, 1);
    if (have > want) {
      std::vector<std::size_t> all(have), keep;
      std::iota(all.begin(), all.end(), std::size_t{0});
      keep.reserve(want);
      std::sample(all.begin(), all.end(), std::back_inserter(keep), want, rng);
      std::fill(copies.begin(), copies.end(), 0);
      for (std::size_t i : keep) copies[i] = 1;
    } else if (have < want) {
      std::uniform_int_distribution<std::size_t> pick(0, have - 1);
      for (std::size_t extra = have; extra < want; ++extra) ++copies[pick(rng)];
    }
    if (have != want) {
      std::vector<double> coords;
      coords.reserve(want * d);
      for (std::size_t i = 0; i < have; ++i) {
        for (std::size_t c = 0; c < copies[i]; ++c) {
          coords.insert(coords.end(), ens.next_coords_.begin() + static_cast<std::ptrdiff_t>(i * d),
                        ens.next_coords_.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
        }
      }
      ens.next_coords_.swap(coords);
      ens.next_tickets_.assign(want, 0.0);
    }
  }

  ens.coords_.swap(ens.next_coords_);
  ens.tickets_.swap(ens.next_tickets_);
  ens.log_weights_.assign(ens.tickets_.size(), 0.0);
}

double estimate(const Ensemble& ens, const Observable& f, std::size_t copies) {
  if (copies == 0) throw ConfigError("estimate needs M >= 1");
  double sum = 0.0;
  for (std::size_t j = 0; j < ens.size(); ++j) {
    const double v = f(ens.state(j));
    if (!std::isfinite(v)) {
      throw DataError("observable is not finite at particle " + std::to_string(j));
    }
    const double lw = ens.log_weight(j);
    sum += lw == 0.0 ? v : std::exp(lw) * v;
  }
  return sum / static_cast<double>(copies);
}

void randomize_tickets(Ensemble& ens, Rng& rng) {
  if (ens.mode_ != Mode::ticketed) throw ModeError("randomize_tickets requires ticketed mode");
  for (double& t : ens.tickets_) t = uniform01(rng);
}

std::size_t steps_for_horizon(double horizon, double eps) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be >= 0");
  if (horizon == 0.0) return 0;
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  const double ratio = horizon / eps;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("horizon " + std::to_string(horizon) + " is not a multiple of eps " +
                      std::to_string(eps));
  }
  return static_cast<std::size_t>(rounded);
}

ChainReport run_chain(const ChainConfig& cfg, const MarkovKernel& kernel, const ChiVariant& chi,
                      const PopulationControl& control, const Observable& f, Rng& rng) {
  if (cfg.branch_interval == 0) throw ConfigError("branch interval must be >= 1");
  validate(chi, control);
  const std::size_t steps = steps_for_horizon(cfg.horizon, cfg.eps);
  Ensemble ens = init_ensemble(cfg.x0, cfg.copies, cfg.mode, rng, cfg.population_cap);

  ChainReport report;
  if (cfg.record_trace) {
    report.population.reserve(steps + 1);
    report.population.push_back(ens.size());
  }
  for (std::size_t s = 0; s < steps; ++s) {
    const bool branch = (s + 1) % cfg.branch_interval == 0;
    advance(ens, kernel, chi, control, branch, rng);
    if (cfg.randomize_tickets_each_step && cfg.mode == Mode::ticketed) randomize_tickets(ens, rng);
    if (cfg.record_trace) report.population.push_back(ens.size());
    if (ens.extinct() && !report.extinction_step) report.extinction_step = s + 1;
  }
  report.estimate = estimate(ens, f, cfg.copies);
  report.final_population = ens.size();
  report.workload = ens.workload();
  report.clamp_warnings = ens.clamp_warnings();
  return report;
}

}  // namespace tdmc
