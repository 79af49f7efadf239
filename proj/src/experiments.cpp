#include "tdmc/experiments.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "tdmc/errors.hpp"

namespace tdmc {

std::string to_string(Algorithm a) { return a == Algorithm::dmc ? "dmc" : "tdmc"; }

Algorithm parse_algorithm(const std::string& name) {
  if (name == "dmc") return Algorithm::dmc;
  if (name == "tdmc") return Algorithm::tdmc;
  throw ConfigError("unknown algorithm '" + name + "' (expected dmc or tdmc)");
}

namespace {

std::uint32_t algorithm_bit(Algorithm a) { return a == Algorithm::dmc ? 0u : 1u; }

double one(std::span<const double>) { return 1.0; }

}  // namespace

std::vector<ChainReport> run_replicas(const RunConfig& cfg, const Problem& problem) {
  if (problem.kernel == nullptr) throw ConfigError("problem has no kernel");
  if (!problem.f) throw ConfigError("problem has no observable");
  if (cfg.replicas == 0) throw ConfigError("need at least one replica");
  validate(problem.chi, problem.control);
  steps_for_horizon(cfg.horizon, cfg.eps);

  ChainConfig chain;
  chain.x0 = problem.x0;
  chain.copies = cfg.copies;
  chain.mode = mode_of(cfg.algorithm);
  chain.eps = cfg.eps;
  chain.horizon = cfg.horizon;
  chain.branch_interval = cfg.branch_interval;
  chain.population_cap = cfg.population_cap;
  chain.record_trace = cfg.record_trace;
  chain.randomize_tickets_each_step = cfg.randomize_tickets;

  return map_replicas<ChainReport>(cfg.replicas, cfg.execution, [&](std::size_t i) {
    Rng rng = make_stream(cfg.seed, i, StreamTag::chain, cfg.stream_salt);
    try {
      return run_chain(chain, *problem.kernel, problem.chi, problem.control, problem.f, rng);
    } catch (RuntimeError& e) {
      e.set_replica(i);
      throw;
    }
  });
}

RunReport summarize_replicas(const RunConfig& cfg, std::span<const ChainReport> chains) {
  RunReport r;
  r.algorithm = cfg.algorithm;
  r.replicas = chains.size();
  if (chains.empty()) return r;
  std::vector<double> estimates, workloads;
  estimates.reserve(chains.size());
  workloads.reserve(chains.size());
  double pop = 0.0, pop2 = 0.0;
  std::size_t extinct = 0;
  for (const ChainReport& c : chains) {
    estimates.push_back(c.estimate);
    workloads.push_back(static_cast<double>(c.workload));
    const double n = static_cast<double>(c.final_population);
    pop += n;
    pop2 += n * n;
    if (c.extinction_step) ++extinct;
    r.clamp_warnings += c.clamp_warnings;
  }
  const SampleStats e = summarize(estimates);
  const SampleStats w = summarize(workloads);
  const double count = static_cast<double>(chains.size());
  r.estimate = e.mean;
  r.estimate_stderr = e.std_error;
  r.estimate_variance = e.variance;
  r.estimate_variance_stderr = e.variance_stderr();
  r.mean_workload = w.mean;
  r.workload_stderr = w.std_error;
  r.mean_final_population = pop / count;
  r.mean_sq_final_population = pop2 / count;
  r.extinction_fraction = static_cast<double>(extinct) / count;

  const std::size_t trace_len = chains.front().population.size();
  bool traces = trace_len > 0;
  for (const ChainReport& c : chains) traces = traces && c.population.size() == trace_len;
  if (traces) {
    r.mean_population_trace.assign(trace_len, 0.0);
    for (const ChainReport& c : chains) {
      for (std::size_t k = 0; k < trace_len; ++k) {
        r.mean_population_trace[k] += static_cast<double>(c.population[k]);
      }
    }
    for (double& v : r.mean_population_trace) v /= count;
  }
  if (r.clamp_warnings > 0) {
    r.warnings.push_back(std::to_string(r.clamp_warnings) + " chi values clamped to [-700, 700]");
  }
  return r;
}

RunReport run_experiment(const RunConfig& cfg, const Problem& problem) {
  const auto chains = run_replicas(cfg, problem);
  return summarize_replicas(cfg, chains);
}

// ---------------------------------------------------------------------------

Fig1Report fig1_second_moment(std::span<const double> eps_list, std::size_t replicas,
                              std::uint64_t seed, std::span<const Algorithm> algorithms,
                              std::size_t population_cap, Execution exec) {
  if (replicas == 0) throw ConfigError("need at least one replica");
  Fig1Report report;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const double eps = eps_list[e];
    steps_for_horizon(1.0, eps);
    const GaussianWalkKernel kernel(eps);
    const ChiVariant chi = ChiVariant::increment();
    const PopulationControl control = PopulationControl::none();
    for (Algorithm alg : algorithms) {
      ChainConfig chain;
      chain.x0 = {0.0};
      chain.copies = 1;
      chain.mode = mode_of(alg);
      chain.eps = eps;
      chain.horizon = 1.0;
      chain.population_cap = population_cap;
      chain.record_trace = false;
      const auto salt = static_cast<std::uint32_t>(2 * e) + algorithm_bit(alg);

      struct Outcome {
        double n = 0.0;
        bool censored = false;
      };
      const auto outcomes = map_replicas<Outcome>(replicas, exec, [&](std::size_t i) {
        Rng rng = make_stream(seed, i, StreamTag::chain, salt);
        try {
          const ChainReport r = run_chain(chain, kernel, chi, control, one, rng);
          return Outcome{static_cast<double>(r.final_population), false};
        } catch (const PopulationExplosionError&) {
          return Outcome{0.0, true};
        }
      });

      Fig1Point p;
      p.algorithm = alg;
      p.eps = eps;
      p.neg_log_eps = -std::log2(eps);
      std::vector<double> squares;
      squares.reserve(replicas);
      for (const Outcome& o : outcomes) {
        if (o.censored) {
          ++p.censored;
        } else {
          squares.push_back(o.n * o.n);
        }
      }
      const SampleStats s = summarize(squares);
      p.replicas = squares.size();
      p.mean_n2 = s.mean;
      p.mean_n2_stderr = s.std_error;
      p.log_mean_n2 = s.mean > 0.0 ? std::log2(s.mean) : -std::numeric_limits<double>::infinity();
      report.points.push_back(p);
    }
  }

  auto slope_for = [&](Algorithm alg) {
    std::vector<double> xs, ys;
    for (const Fig1Point& p : report.points) {
      if (p.algorithm == alg && p.censored == 0 && p.mean_n2 > 0.0) {
        xs.push_back(p.neg_log_eps);
        ys.push_back(p.log_mean_n2);
      }
    }
    return xs.size() >= 3 ? loglog_slope(xs, ys) : std::numeric_limits<double>::quiet_NaN();
  };
  report.slope_dmc = slope_for(Algorithm::dmc);
  report.slope_tdmc = slope_for(Algorithm::tdmc);
  return report;
}

// ---------------------------------------------------------------------------

Observable lj_target_observable(const lj::Params& params) {
  const StateVector xa = lj::initial_configuration();
  const double v0 = lj::reaction_coordinate(xa, params.lambda, params.gamma);
  const double lambda = params.lambda, gamma = params.gamma;
  return [=](std::span<const double> x) {
    if (!lj::in_target_set(x)) return 0.0;
    return std::exp(lj::reaction_coordinate(x, lambda, gamma) - v0);
  };
}

LjReport lj_rare_event(const LjConfig& cfg) {
  const LangevinKernel kernel(cfg.params);
  Problem problem;
  problem.kernel = &kernel;
  if (cfg.params.lambda == 0.0) {
    problem.chi = ChiVariant::zero();
  } else {
    const double lambda = cfg.params.lambda, gamma = cfg.params.gamma;
    problem.chi = ChiVariant::potential_difference(
        [=](std::span<const double> x) { return lj::reaction_coordinate(x, lambda, gamma); });
  }
  problem.f = lj_target_observable(cfg.params);
  problem.x0 = lj::initial_configuration();

  RunConfig rc;
  rc.algorithm = cfg.algorithm;
  rc.eps = cfg.params.eps;
  rc.horizon = cfg.horizon;
  rc.copies = cfg.copies;
  rc.replicas = cfg.replicas;
  rc.branch_interval = cfg.branch_interval;
  rc.seed = cfg.seed;
  rc.population_cap = cfg.population_cap;
  rc.stream_salt = algorithm_bit(cfg.algorithm);
  rc.execution = cfg.execution;

  LjReport r;
  r.run = run_experiment(rc, problem);
  const double m = static_cast<double>(cfg.copies);
  r.estimate = r.run.estimate;
  r.estimate_stderr = r.run.estimate_stderr;
  r.variance_per_copy = r.run.estimate_variance * m;
  r.scaled_workload = cfg.params.eps * r.run.mean_workload / m;
  r.efficiency = 0.5 * r.variance_per_copy * r.scaled_workload;
  r.brute_force_variance = r.estimate * (1.0 - r.estimate);
  return r;
}

// ---------------------------------------------------------------------------

TwinData make_twin_data(const FilterConfig& cfg) {
  const std::size_t steps = steps_for_horizon(cfg.horizon, cfg.eps);
  Rng hidden_rng = make_stream(cfg.seed, 0, StreamTag::hidden_path);
  Rng obs_rng = make_stream(cfg.seed, 0, StreamTag::observations);
  TwinData data;
  data.hidden = simulate_hidden_path(kLorenzInitial, cfg.eps, steps, cfg.sign, hidden_rng,
                                     cfg.dynamics_noise);
  data.observations = std::make_shared<const ObservationPath>(
      generate_observations(data.hidden, cfg.eps, obs_rng, cfg.observation_noise));
  return data;
}

std::size_t count_distinct_states(const Ensemble& ens, double threshold) {
  std::vector<std::size_t> representatives;
  const double t2 = threshold * threshold;
  for (std::size_t j = 0; j < ens.size(); ++j) {
    const auto x = ens.state(j);
    bool seen = false;
    for (std::size_t r : representatives) {
      const auto y = ens.state(r);
      double d2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
      if (d2 <= t2) {
        seen = true;
        break;
      }
    }
    if (!seen) representatives.push_back(j);
  }
  return representatives.size();
}

namespace {

// Weighted mean taken relative to the first particle so that an ensemble of
// identical states returns that state exactly.
Vec3 posterior_mean(const Ensemble& ens) {
  const auto ref = ens.state(0);
  double wsum = 0.0;
  Vec3 acc{0.0, 0.0, 0.0};
  for (std::size_t j = 0; j < ens.size(); ++j) {
    const double w = std::exp(ens.log_weight(j));
    const auto x = ens.state(j);
    for (std::size_t i = 0; i < 3; ++i) acc[i] += w * (x[i] - ref[i]);
    wsum += w;
  }
  return {ref[0] + acc[0] / wsum, ref[1] + acc[1] / wsum, ref[2] + acc[2] / wsum};
}

}  // namespace

FilterReport run_filter(const FilterConfig& cfg, const TwinData& data) {
  const std::size_t steps = steps_for_horizon(cfg.horizon, cfg.eps);
  if (data.hidden.size() != steps + 1) {
    throw DataError("hidden path has " + std::to_string(data.hidden.size()) + " states, expected " +
                    std::to_string(steps + 1));
  }
  if (!data.observations || data.observations->increments.size() < steps + 1) {
    throw DataError("observation path does not cover the horizon");
  }
  if (cfg.branch_interval == 0) throw ConfigError("branch interval must be >= 1");
  const Lorenz63Kernel kernel(cfg.eps, cfg.sign, cfg.dynamics_noise);
  const ChiVariant chi = ChiVariant::filter_likelihood(data.observations);
  const PopulationControl control = PopulationControl::mean_m(cfg.copies);
  validate(chi, control);

  Rng rng = make_stream(cfg.seed, 0, StreamTag::filter, algorithm_bit(cfg.algorithm));
  const Vec3& y0 = data.hidden.front();
  Ensemble ens = init_ensemble(y0, cfg.copies, mode_of(cfg.algorithm), rng, cfg.population_cap);

  FilterReport r;
  r.hidden = data.hidden;
  r.reconstruction.reserve(steps + 1);
  r.reconstruction.push_back(posterior_mean(ens));
  r.population.push_back(ens.size());
  r.distinct.push_back(count_distinct_states(ens));
  for (std::size_t s = 0; s < steps; ++s) {
    const bool branch = (s + 1) % cfg.branch_interval == 0;
    try {
      advance(ens, kernel, chi, control, branch, rng);
    } catch (const DegenerateWeightsError& e) {
      throw DegenerateWeightsError("filter step " + std::to_string(s + 1) + ": " + e.what());
    }
    if (ens.extinct()) {
      throw RuntimeError("filter ensemble went extinct at step " + std::to_string(s + 1));
    }
    r.reconstruction.push_back(posterior_mean(ens));
    r.population.push_back(ens.size());
    r.distinct.push_back(count_distinct_states(ens));
  }
  r.clamp_warnings = ens.clamp_warnings();

  Vec3 sq{}, mean{}, var{};
  double distinct = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    for (std::size_t i = 0; i < 3; ++i) {
      const double e = r.reconstruction[k][i] - r.hidden[k][i];
      sq[i] += e * e;
    }
    distinct += static_cast<double>(r.distinct[k]);
  }
  for (const Vec3& y : r.hidden) {
    for (std::size_t i = 0; i < 3; ++i) mean[i] += y[i];
  }
  const double n_hidden = static_cast<double>(r.hidden.size());
  for (std::size_t i = 0; i < 3; ++i) mean[i] /= n_hidden;
  for (const Vec3& y : r.hidden) {
    for (std::size_t i = 0; i < 3; ++i) var[i] += (y[i] - mean[i]) * (y[i] - mean[i]);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    r.rmse[i] = steps > 0 ? std::sqrt(sq[i] / static_cast<double>(steps)) : 0.0;
    r.hidden_std[i] = n_hidden > 1 ? std::sqrt(var[i] / (n_hidden - 1.0)) : 0.0;
  }
  r.mean_distinct = steps > 0 ? distinct / static_cast<double>(steps)
                              : static_cast<double>(r.distinct.front());
  return r;
}

FilterReport lorenz_filter(const FilterConfig& cfg) { return run_filter(cfg, make_twin_data(cfg)); }

// ---------------------------------------------------------------------------

std::string to_string(CompareModel m) {
  switch (m) {
    case CompareModel::walk_increment:
      return "walk-increment";
    case CompareModel::walk_quadratic:
      return "walk-quadratic";
    case CompareModel::walk_zero:
      return "walk-zero";
  }
  return "";
}

CompareModel parse_compare_model(const std::string& name) {
  if (name == "walk-increment") return CompareModel::walk_increment;
  if (name == "walk-quadratic") return CompareModel::walk_quadratic;
  if (name == "walk-zero") return CompareModel::walk_zero;
  throw ConfigError("unknown comparison model '" + name + "'");
}

std::string to_string(CompareObservable f) { return f == CompareObservable::bump ? "bump" : "exp"; }

CompareObservable parse_compare_observable(const std::string& name) {
  if (name == "bump") return CompareObservable::bump;
  if (name == "exp") return CompareObservable::exponential;
  throw ConfigError("unknown observable '" + name + "' (expected bump or exp)");
}

CompareReport variance_workload_compare(const CompareConfig& cfg) {
  const GaussianWalkKernel kernel(cfg.eps);
  Problem problem;
  problem.kernel = &kernel;
  problem.x0 = {0.0};
  switch (cfg.model) {
    case CompareModel::walk_increment:
      problem.chi = ChiVariant::increment();
      break;
    case CompareModel::walk_quadratic:
      problem.chi = ChiVariant::potential_difference(
          [](std::span<const double> x) { return x[0] * x[0]; });
      break;
    case CompareModel::walk_zero:
      problem.chi = ChiVariant::zero();
      break;
  }
  if (cfg.observable == CompareObservable::bump) {
    problem.f = [](std::span<const double> x) { return std::exp(-x[0] * x[0]) + 0.1; };
  } else {
    problem.f = [](std::span<const double> x) { return std::exp(x[0]); };
  }

  RunConfig rc;
  rc.eps = cfg.eps;
  rc.horizon = cfg.horizon;
  rc.copies = cfg.copies;
  rc.replicas = cfg.replicas;
  rc.seed = cfg.seed;
  rc.execution = cfg.execution;

  CompareReport r;
  r.config = cfg;
  rc.algorithm = Algorithm::dmc;
  rc.stream_salt = cfg.common_random_numbers ? 0u : algorithm_bit(Algorithm::dmc);
  r.dmc = run_experiment(rc, problem);
  rc.algorithm = Algorithm::tdmc;
  rc.stream_salt = cfg.common_random_numbers ? 0u : algorithm_bit(Algorithm::tdmc);
  r.tdmc = run_experiment(rc, problem);

  auto z_score = [](double diff, double se) {
    if (se > 0.0) return diff / se;
    if (diff == 0.0) return 0.0;
    return diff > 0.0 ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
  };
  r.variance_difference = r.dmc.estimate_variance - r.tdmc.estimate_variance;
  r.variance_z = z_score(r.variance_difference,
                         std::hypot(r.dmc.estimate_variance_stderr, r.tdmc.estimate_variance_stderr));
  r.variance_dominance = r.variance_z >= kOneSided99;
  r.workload_difference = r.tdmc.mean_workload - r.dmc.mean_workload;
  r.workload_z = z_score(r.workload_difference, std::hypot(r.dmc.workload_stderr, r.tdmc.workload_stderr));
  r.workload_agree = std::abs(r.workload_z) <= 3.0;
  return r;
}

}  // namespace tdmc
