#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tdmc/engine.hpp"
#include "tdmc/models.hpp"
#include "tdmc/oracle.hpp"
#include "tdmc/replicas.hpp"
#include "tdmc/weights.hpp"

namespace tdmc {

enum class Algorithm { dmc, tdmc };

inline Mode mode_of(Algorithm a) { return a == Algorithm::dmc ? Mode::plain : Mode::ticketed; }
std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct RunConfig {
  Algorithm algorithm = Algorithm::tdmc;
  double eps = 0.01;
  double horizon = 1.0;
  std::size_t copies = 1;  // M
  std::size_t replicas = 1;
  std::size_t branch_interval = 1;
  std::uint64_t seed = 0;
  std::size_t population_cap = kDefaultPopulationCap;
  bool randomize_tickets = false;
  bool record_trace = false;
  // Replica i of a run draws from make_stream(seed, i, chain, stream_salt).
  std::uint32_t stream_salt = 0;
  Execution execution = Execution::parallel;
};

// Everything a replica needs besides its stream.
struct Problem {
  const MarkovKernel* kernel = nullptr;
  ChiVariant chi = ChiVariant::zero();
  PopulationControl control = PopulationControl::none();
  Observable f;
  StateVector x0;
};

struct RunReport {
  Algorithm algorithm = Algorithm::tdmc;
  std::size_t replicas = 0;
  double estimate = 0.0;
  double estimate_stderr = 0.0;
  double estimate_variance = 0.0;  // across replicas
  double estimate_variance_stderr = 0.0;
  double mean_workload = 0.0;
  double workload_stderr = 0.0;
  double mean_final_population = 0.0;
  double mean_sq_final_population = 0.0;
  double extinction_fraction = 0.0;
  std::size_t clamp_warnings = 0;
  std::vector<double> mean_population_trace;  // when traces were recorded
  std::vector<std::string> warnings;
};

std::vector<ChainReport> run_replicas(const RunConfig& cfg, const Problem& problem);
RunReport summarize_replicas(const RunConfig& cfg, std::span<const ChainReport> chains);
RunReport run_experiment(const RunConfig& cfg, const Problem& problem);

// ---------------------------------------------------------------------------
// Second moment of the population at time 1 for the increment-weighted walk.

struct Fig1Point {
  Algorithm algorithm = Algorithm::tdmc;
  double eps = 0.0;
  double neg_log_eps = 0.0;  // -log2 eps
  double mean_n2 = 0.0;      // E N_1^2 over completed replicas
  double log_mean_n2 = 0.0;  // log2 E N_1^2
  double mean_n2_stderr = 0.0;
  std::size_t replicas = 0;
  std::size_t censored = 0;  // replicas aborted by the population cap
};

struct Fig1Report {
  std::vector<Fig1Point> points;
  // Slope of log E N^2 against -log eps over uncensored points, per algorithm;
  // NaN when fewer than three points are available.
  double slope_dmc = 0.0;
  double slope_tdmc = 0.0;
};

Fig1Report fig1_second_moment(std::span<const double> eps_list, std::size_t replicas,
                              std::uint64_t seed, std::span<const Algorithm> algorithms,
                              std::size_t population_cap = kDefaultPopulationCap,
                              Execution exec = Execution::parallel);

// ---------------------------------------------------------------------------
// Lennard-Jones rare event P(y_horizon in B) from the hexagonal configuration.

struct LjConfig {
  lj::Params params;
  double horizon = 2.0;
  std::size_t copies = 1;
  std::size_t replicas = 1000;
  Algorithm algorithm = Algorithm::tdmc;
  std::size_t branch_interval = 1;
  std::uint64_t seed = 0;
  std::size_t population_cap = kDefaultPopulationCap;
  Execution execution = Execution::parallel;
};

struct LjReport {
  RunReport run;
  double estimate = 0.0;
  double estimate_stderr = 0.0;
  double variance_per_copy = 0.0;  // variance of a single M = 1 sample
  double scaled_workload = 0.0;    // eps * W / M
  double efficiency = 0.0;         // variance_per_copy * scaled_workload / 2
  double brute_force_variance = 0.0;  // p (1 - p) at the estimate
};

// Observable whose branching estimate is an unbiased estimate of P(y in B):
// exp(V(x) - V(x^A)) 1_B(x).
Observable lj_target_observable(const lj::Params& params);

LjReport lj_rare_event(const LjConfig& cfg);

// ---------------------------------------------------------------------------
// Lorenz-63 twin experiment.

struct FilterConfig {
  std::size_t copies = 10;
  double eps = 1e-4;
  double horizon = 2.0;
  LorenzSign sign = LorenzSign::classical;
  Algorithm algorithm = Algorithm::tdmc;
  std::uint64_t seed = 0;
  std::size_t branch_interval = 1;
  std::size_t population_cap = kDefaultPopulationCap;
  double dynamics_noise = kLorenzNoise;
  double observation_noise = kObservationNoise;
};

struct TwinData {
  std::vector<Vec3> hidden;  // y_0 .. y_K
  std::shared_ptr<const ObservationPath> observations;
};

// Hidden path and observations come from their own streams of `seed`, so every
// algorithm is scored against identical data.
TwinData make_twin_data(const FilterConfig& cfg);

inline constexpr double kDistinctThreshold = 1e-8;

struct FilterReport {
  std::vector<Vec3> hidden;
  std::vector<Vec3> reconstruction;  // posterior mean per step
  std::vector<std::size_t> population;
  std::vector<std::size_t> distinct;  // distinct states per step
  Vec3 rmse{};
  Vec3 hidden_std{};
  double mean_distinct = 0.0;
  std::size_t clamp_warnings = 0;
};

// Number of states that are pairwise more than `threshold` apart.
std::size_t count_distinct_states(const Ensemble& ens, double threshold = kDistinctThreshold);

FilterReport run_filter(const FilterConfig& cfg, const TwinData& data);
FilterReport lorenz_filter(const FilterConfig& cfg);

// ---------------------------------------------------------------------------
// Paired estimator-variance and workload comparison of the two algorithms.

enum class CompareModel { walk_increment, walk_quadratic, walk_zero };
std::string to_string(CompareModel m);
CompareModel parse_compare_model(const std::string& name);

enum class CompareObservable { bump, exponential };  // exp(-x^2) + 0.1, exp(x)
std::string to_string(CompareObservable f);
CompareObservable parse_compare_observable(const std::string& name);

struct CompareConfig {
  CompareModel model = CompareModel::walk_increment;
  CompareObservable observable = CompareObservable::bump;
  double eps = 0.1;
  double horizon = 1.0;
  std::size_t copies = 1;
  std::size_t replicas = 10000;
  std::uint64_t seed = 0;
  // Both algorithms share replica streams instead of drawing independently.
  bool common_random_numbers = false;
  Execution execution = Execution::parallel;
};

// One-sided 99% normal quantile.
inline constexpr double kOneSided99 = 2.3263478740408408;

struct CompareReport {
  CompareConfig config;
  RunReport dmc;
  RunReport tdmc;
  double variance_difference = 0.0;  // var(dmc) - var(tdmc)
  double variance_z = 0.0;
  bool variance_dominance = false;  // var(tdmc) < var(dmc) at 99% one-sided
  double workload_difference = 0.0;
  double workload_z = 0.0;
  bool workload_agree = false;  // within 3 combined standard errors
};

CompareReport variance_workload_compare(const CompareConfig& cfg);

}  // namespace tdmc
