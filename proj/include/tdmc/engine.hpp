#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tdmc/kernel.hpp"
#include "tdmc/rng.hpp"
#include "tdmc/weights.hpp"

namespace tdmc {

// plain: generalised DMC, offspring floor(P + u).
// ticketed: every particle carries a ticket theta and dies exactly when P < theta.
enum class Mode { plain, ticketed };

inline constexpr std::size_t kDefaultPopulationCap = 1'000'000;

struct Particle {
  StateVector state;
  double ticket = 0.0;      // meaningful in ticketed mode only
  double log_weight = 0.0;  // -chi accumulated since the last branch event
};

struct BranchDecision {
  std::size_t offspring = 0;
  std::vector<double> child_tickets;  // ticketed mode only, one per child
};

// Population of particles stored as structure-of-arrays. Children of one parent
// are contiguous and follow parent order.
class Ensemble {
 public:
  Ensemble(std::size_t dimension, Mode mode, std::size_t initial_copies,
           std::size_t population_cap = kDefaultPopulationCap);

  std::size_t size() const { return tickets_.size(); }
  bool extinct() const { return size() == 0; }
  std::size_t dimension() const { return dim_; }
  Mode mode() const { return mode_; }
  std::size_t initial_copies() const { return initial_copies_; }
  std::size_t population_cap() const { return population_cap_; }
  std::size_t step_index() const { return step_index_; }
  // Sum over completed steps of the particle count at the start of the step.
  std::uint64_t workload() const { return workload_; }
  std::size_t clamp_warnings() const { return clamp_warnings_; }

  std::span<const double> state(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  double ticket(std::size_t i) const { return tickets_[i]; }
  double log_weight(std::size_t i) const { return log_weights_[i]; }
  std::span<const double> tickets() const { return tickets_; }
  Particle particle(std::size_t i) const;

  void push_back(const Particle& p);

 private:
  friend void advance(Ensemble&, const MarkovKernel&, const ChiVariant&, const PopulationControl&,
                      bool, Rng&);
  friend void randomize_tickets(Ensemble&, Rng&);

  std::size_t dim_;
  Mode mode_;
  std::size_t initial_copies_;
  std::size_t population_cap_;
  std::size_t step_index_ = 0;
  std::uint64_t workload_ = 0;
  std::size_t clamp_warnings_ = 0;

  std::vector<double> coords_;
  std::vector<double> tickets_;
  std::vector<double> log_weights_;

  // scratch reused across steps
  std::vector<double> proposed_;
  std::vector<double> chi_;
  std::vector<double> raw_;
  std::vector<double> branch_weight_;
  std::vector<double> next_coords_;
  std::vector<double> next_tickets_;
  std::vector<double> next_log_weights_;
};

// M copies of x0; in ticketed mode each gets an independent U(0,1) ticket. Both
// modes consume one uniform per copy.
Ensemble init_ensemble(std::span<const double> x0, std::size_t copies, Mode mode, Rng& rng,
                       std::size_t population_cap = kDefaultPopulationCap);

// floor(P + u). Throws WeightOverflowError for non-finite P.
std::size_t dmc_offspring(double weight, double u);

// Offspring count of a ticketed particle: 0 if P < theta, else max(floor(P + u), 1).
std::size_t tdmc_offspring_count(double weight, double ticket, double u);

// Full ticketed branch: first child keeps theta / P, the others draw tickets
// from U(1/P, 1).
BranchDecision tdmc_offspring(double weight, double ticket, double u, Rng& rng);

// One step of the branching dynamics. All particles move first (in ensemble
// order), then weights are formed and normalised over the whole moved ensemble,
// then each parent in order draws u and its children's tickets. With
// `branch == false` the step's -chi is accumulated into the log-weight instead.
// Throws PopulationExplosionError when the new population exceeds the cap.
void advance(Ensemble& ens, const MarkovKernel& kernel, const ChiVariant& chi,
             const PopulationControl& control, bool branch, Rng& rng);

// (1/M) sum_j exp(log_weight_j) f(x_j). Between branch events the carried
// weight keeps the estimate unbiased; right after one it is exactly 1.
double estimate(const Ensemble& ens, const Observable& f, std::size_t copies);

// Replaces every ticket with a fresh U(0,1) draw. Turns the ticketed dynamics
// into the plain one in law. Throws ModeError in plain mode.
void randomize_tickets(Ensemble& ens, Rng& rng);

struct ChainConfig {
  StateVector x0;
  std::size_t copies = 1;
  Mode mode = Mode::ticketed;
  double eps = 0.01;
  double horizon = 1.0;
  std::size_t branch_interval = 1;
  std::size_t population_cap = kDefaultPopulationCap;
  bool record_trace = true;
  // Redraw all tickets after every step (law-equivalence experiments).
  bool randomize_tickets_each_step = false;
};

struct ChainReport {
  double estimate = 0.0;
  std::vector<std::size_t> population;  // N_0 .. N_K when recorded
  std::size_t final_population = 0;
  std::uint64_t workload = 0;
  std::optional<std::size_t> extinction_step;
  std::size_t clamp_warnings = 0;
};

// Number of grid steps horizon / eps; throws ConfigError unless integral.
std::size_t steps_for_horizon(double horizon, double eps);

// Advances from x0 over the grid to the horizon, branching every
// branch_interval steps, and evaluates the estimator at the horizon.
ChainReport run_chain(const ChainConfig& cfg, const MarkovKernel& kernel, const ChiVariant& chi,
                      const PopulationControl& control, const Observable& f, Rng& rng);

}  // namespace tdmc
