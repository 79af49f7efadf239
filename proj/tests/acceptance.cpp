// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "support.hpp"
#include "tdmc/engine.hpp"
#include "tdmc/errors.hpp"
#include "tdmc/experiments.hpp"
#include "tdmc/models.hpp"
#include "tdmc/oracle.hpp"

using namespace tdmc;
using tdmc::testing::integrate_piecewise;
using tdmc::testing::integrate_piecewise_2d;
using tdmc::testing::test_stream;

namespace {

constexpr std::uint64_t kSeed = 2024;

double one(std::span<const double>) { return 1.0; }

// Collects detail lines while a criterion runs.
struct Check {
  bool pass = true;
  std::vector<std::string> lines;

  void expect(bool ok, const std::string& what) {
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    pass = pass && ok;
  }
  void note(const std::string& what) { lines.push_back("     " + what); }
};

std::string fmt(const char* f, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
std::string fmt(const char* f, double a, double b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}
std::string fmt(const char* f, double a, double b, double c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}
std::string fmt(const char* f, double a, double b, double c, double d) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, const std::function<void(Check&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s %d: %s (%.1fs)\n", c.pass ? "PASS" : "FAIL", id, title, secs);
  for (const auto& l : c.lines) std::printf("    %s\n", l.c_str());
  std::fflush(stdout);
  if (!c.pass) ++failures;
}

Problem walk_problem(const MarkovKernel& kernel, ChiVariant chi, Observable f) {
  Problem p;
  p.kernel = &kernel;
  p.chi = std::move(chi);
  p.f = std::move(f);
  p.x0 = {0.0};
  return p;
}

// ---------------------------------------------------------------------------

void unbiasedness(Check& c) {
  const double eps = 0.01;
  const GaussianWalkKernel walk(eps);
  const Problem p = walk_problem(walk, ChiVariant::increment(), one);
  const double exact = analytic_walk_normalization(1.0, eps);
  for (Algorithm alg : {Algorithm::dmc, Algorithm::tdmc}) {
    RunConfig cfg;
    cfg.algorithm = alg;
    cfg.eps = eps;
    cfg.replicas = 100000;
    cfg.seed = kSeed;
    cfg.stream_salt = alg == Algorithm::dmc ? 0 : 1;
    const RunReport r = run_experiment(cfg, p);
    const double z = (r.estimate - exact) / r.estimate_stderr;
    c.expect(std::abs(z) <= 3.0, to_string(alg) + fmt(": estimate %.5f +- %.5f vs %.5f (z = %.2f)",
                                                      r.estimate, r.estimate_stderr, exact, z));
  }
}

void instability(Check& c) {
  std::vector<double> eps;
  for (int k = 4; k <= 12; ++k) eps.push_back(std::ldexp(1.0, -k));
  const std::vector<Algorithm> algs{Algorithm::dmc, Algorithm::tdmc};
  const Fig1Report r = fig1_second_moment(eps, 10000, kSeed, algs);
  for (const Fig1Point& p : r.points) {
    c.note(to_string(p.algorithm) +
           fmt(": -log2 eps = %2.0f  log2 E N^2 = %.3f  (censored %.0f)", p.neg_log_eps,
               p.log_mean_n2, static_cast<double>(p.censored)));
  }
  c.expect(r.slope_dmc >= 0.35 && r.slope_dmc <= 0.65,
           fmt("dmc slope %.3f in [0.35, 0.65]", r.slope_dmc));
  c.expect(r.slope_tdmc >= -0.1 && r.slope_tdmc <= 0.1,
           fmt("tdmc slope %.3f in [-0.1, 0.1]", r.slope_tdmc));
}

std::vector<CompareReport> compare_grid() {
  std::vector<CompareReport> out;
  std::uint64_t seed = kSeed;
  for (CompareModel model : {CompareModel::walk_increment, CompareModel::walk_quadratic}) {
    for (double eps : {0.1, 0.01}) {
      CompareConfig cfg;
      cfg.model = model;
      cfg.observable = CompareObservable::bump;
      cfg.eps = eps;
      cfg.replicas = 10000;
      cfg.seed = seed++;
      out.push_back(variance_workload_compare(cfg));
    }
  }
  return out;
}

void variance_dominance(Check& c, const std::vector<CompareReport>& grid) {
  for (const CompareReport& r : grid) {
    c.expect(r.variance_dominance,
             to_string(r.config.model) +
                 fmt(", eps %.2f: var dmc %.5f, var tdmc %.5f, z = %.2f (need >= 2.326)",
                     r.config.eps, r.dmc.estimate_variance, r.tdmc.estimate_variance,
                     r.variance_z));
  }
}

void workload_identity(Check& c, const std::vector<CompareReport>& grid) {
  for (const CompareReport& r : grid) {
    c.expect(r.workload_agree,
             to_string(r.config.model) + fmt(", eps %.2f: W dmc %.4f, W tdmc %.4f, z = %.2f",
                                              r.config.eps, r.dmc.mean_workload,
                                              r.tdmc.mean_workload, r.workload_z));
  }
}

void law_equivalence(Check& c) {
  const GaussianWalkKernel walk(0.1);
  ChainConfig cfg;
  cfg.x0 = {0.0};
  cfg.eps = 0.1;
  cfg.horizon = 1.0;
  cfg.record_trace = false;
  const std::size_t n = 10000;
  std::vector<double> plain(n), randomized(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng a = make_stream(kSeed, i, StreamTag::chain, 10);
    Rng b = make_stream(kSeed, i, StreamTag::chain, 11);
    cfg.mode = Mode::plain;
    cfg.randomize_tickets_each_step = false;
    plain[i] = static_cast<double>(
        run_chain(cfg, walk, ChiVariant::increment(), PopulationControl::none(), one, a)
            .final_population);
    cfg.mode = Mode::ticketed;
    cfg.randomize_tickets_each_step = true;
    randomized[i] = static_cast<double>(
        run_chain(cfg, walk, ChiVariant::increment(), PopulationControl::none(), one, b)
            .final_population);
  }
  const KsResult ks = two_sample_ks(plain, randomized);
  c.expect(ks.p_value > 0.01, fmt("KS on N_10: D = %.4f, p = %.3f", ks.statistic, ks.p_value));

  for (double p : {0.5, 1.5, 2.5}) {
    const double f = tdmc::testing::fractional(p);
    double worst = 0.0;
    for (std::size_t k = 0; k <= 4; ++k) {
      const long double plain_pmf =
          integrate_piecewise({1.0 - f}, [&](double u) { return dmc_offspring(p, u) == k ? 1.0 : 0.0; });
      const long double ticket_pmf = integrate_piecewise_2d({p}, {1.0 - f}, [&](double theta, double u) {
        return tdmc_offspring_count(p, theta, u) == k ? 1.0 : 0.0;
      });
      worst = std::max(worst, static_cast<double>(std::abs(plain_pmf - ticket_pmf)));
    }
    c.expect(worst <= 1e-10, fmt("P = %.1f: max offspring pmf difference %.3g", p, worst));
  }
}

void lennard_jones(Check& c) {
  LjConfig cfg;
  cfg.params = lj::Params{0.4, 1.9, 1e-3, 0.3};
  cfg.horizon = 2.0;
  cfg.replicas = 20000;
  cfg.seed = kSeed;
  const LjReport r = lj_rare_event(cfg);

  const LangevinKernel kernel(cfg.params);
  const Observable in_b = [](std::span<const double> x) { return lj::in_target_set(x) ? 1.0 : 0.0; };
  const ReferenceEstimate ref = reference_estimate(
      kernel, ChiVariant::zero(), in_b, lj::initial_configuration(),
      steps_for_horizon(cfg.horizon, cfg.params.eps), 100000, kSeed);
  const double se = std::hypot(r.estimate_stderr, ref.std_error);
  const double z = (r.estimate - ref.value) / se;
  c.note(fmt("tdmc: estimate %.4e +- %.2e, scaled workload %.3f", r.estimate, r.estimate_stderr,
             r.scaled_workload));
  c.note(fmt("brute force: %.4e +- %.2e over %.0f paths", ref.value, ref.std_error,
             static_cast<double>(ref.n_samples)));
  c.expect(std::abs(z) <= 3.0, fmt("agreement z = %.2f", z));
  const double brute = ref.value * (1.0 - ref.value);
  c.expect(r.efficiency < brute,
           fmt("variance x workload / 2 = %.3e < brute-force variance %.3e", r.efficiency, brute));
}

void lorenz(Check& c) {
  bool all_rmse = true, all_small = true;
  double distinct_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    FilterConfig cfg;
    cfg.copies = 10;
    cfg.eps = 1e-4;
    cfg.horizon = 2.0;
    cfg.sign = LorenzSign::classical;
    cfg.seed = seed;
    const TwinData data = make_twin_data(cfg);
    cfg.algorithm = Algorithm::tdmc;
    const FilterReport t = run_filter(cfg, data);
    cfg.algorithm = Algorithm::dmc;
    const FilterReport d = run_filter(cfg, data);
    for (std::size_t i = 0; i < 3; ++i) {
      all_rmse = all_rmse && t.rmse[i] < d.rmse[i];
      all_small = all_small && t.rmse[i] < 0.15 * t.hidden_std[i];
    }
    distinct_sum += d.mean_distinct;
    c.note(fmt("seed %.0f: rmse tdmc (%.3f, %.3f, %.3f)", static_cast<double>(seed), t.rmse[0],
               t.rmse[1], t.rmse[2]) +
           fmt(" dmc (%.3f, %.3f, %.3f)", d.rmse[0], d.rmse[1], d.rmse[2]) +
           fmt(" hidden std (%.2f, %.2f, %.2f)", t.hidden_std[0], t.hidden_std[1], t.hidden_std[2]) +
           fmt(" distinct tdmc %.2f dmc %.2f", t.mean_distinct, d.mean_distinct));
  }
  c.expect(all_rmse, "tdmc rmse below dmc rmse in every component on every seed");
  c.expect(all_small, "tdmc rmse below 15% of the hidden standard deviation");
  const double mean_distinct = distinct_sum / 5.0;
  c.expect(mean_distinct <= 2.0, fmt("dmc mean distinct-state count %.3f <= 2", mean_distinct));
}

void invariants(Check& c) {
  // Ticket range and the single-offspring regime along real trajectories.
  {
    const GaussianWalkKernel walk(0.05);
    bool in_range = true;
    std::size_t checked = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      Rng rng = test_stream(i, 800);
      Ensemble ens = init_ensemble(StateVector{0.0}, 5, Mode::ticketed, rng);
      for (int k = 0; k < 40 && ens.size() < 5000; ++k) {
        advance(ens, walk, ChiVariant::increment(), PopulationControl::none(), true, rng);
        for (double t : ens.tickets()) in_range = in_range && t >= 0.0 && t <= 1.0;
        checked += ens.size();
      }
    }
    c.expect(in_range, fmt("tickets in [0, 1] for %.0f particle-steps", static_cast<double>(checked)));

    Rng rng = test_stream(1, 801);
    bool single = true;
    for (int trial = 0; trial < 1000000; ++trial) {
      const double p = uniform01(rng), theta = uniform01(rng), u = uniform01(rng);
      single = single && tdmc_offspring_count(p, theta, u) <= 1;
    }
    single = single && tdmc_offspring_count(1.0, 0.0, 0.999999) == 1;
    c.expect(single, "P <= 1 never yields more than one offspring (1e6 draws)");
  }
  // Offspring mean by quadrature.
  {
    double worst = 0.0;
    for (double p = 0.0; p <= 6.0; p += 0.0625 + 1e-3) {
      const double f = tdmc::testing::fractional(p);
      const double plain =
          static_cast<double>(integrate_piecewise({1.0 - f}, [&](double u) { return dmc_offspring(p, u); }));
      const double ticket = static_cast<double>(integrate_piecewise_2d(
          {p}, {1.0 - f}, [&](double theta, double u) { return tdmc_offspring_count(p, theta, u); }));
      worst = std::max({worst, std::abs(plain - p), std::abs(ticket - p)});
    }
    c.expect(worst < 1e-12, fmt("offspring mean equals P, max error %.3g", worst));
  }
  // Mean-M normalisation.
  {
    Rng rng = test_stream(2, 802);
    std::uniform_real_distribution<double> spread(-30.0, 30.0);
    double worst_ulps = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
      const std::size_t n = 1 + static_cast<std::size_t>(uniform01(rng) * 3000);
      const std::size_t m = 1 + static_cast<std::size_t>(uniform01(rng) * 1000);
      const double scale = spread(rng) * 10.0;
      std::vector<double> raw(n);
      for (double& w : raw) w = std::exp(scale + spread(rng) / 3.0);
      const auto p = apply_population_control(raw, PopulationControl::mean_m(m));
      long double total = 0.0L;
      for (double v : p) total += v;
      const double md = static_cast<double>(m);
      const double ulp = std::nextafter(md, INFINITY) - md;
      worst_ulps = std::max(worst_ulps, static_cast<double>(std::abs(total - m)) / ulp);
    }
    c.expect(worst_ulps <= 1.0, fmt("mean-M weights sum to M within %.3f ulp", worst_ulps));
  }
  // LJ gradient against central differences and translation invariance.
  {
    Rng rng = test_stream(3, 803);
    std::uniform_real_distribution<double> jitter(-0.15, 0.15), shift(-10.0, 10.0);
    double worst_fd = 0.0, worst_u = 0.0, worst_v = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      StateVector x = lj::initial_configuration();
      for (double& v : x) v += jitter(rng);
      const StateVector g = lj::energy_gradient(x, 0.3);
      for (std::size_t i = 0; i < x.size(); ++i) {
        StateVector p = x, m = x;
        p[i] += 1e-6;
        m[i] -= 1e-6;
        worst_fd = std::max(worst_fd, std::abs((lj::energy(p) - lj::energy(m)) / 2e-6 - g[i]));
      }
      StateVector y = x;
      const double dx = shift(rng), dy = shift(rng);
      for (std::size_t i = 0; i < 7; ++i) {
        y[2 * i] += dx;
        y[2 * i + 1] += dy;
      }
      worst_u = std::max(worst_u, std::abs(lj::energy(y) - lj::energy(x)));
      worst_v = std::max(worst_v, std::abs(lj::reaction_coordinate(y, 1.9, 0.4) -
                                           lj::reaction_coordinate(x, 1.9, 0.4)));
    }
    c.expect(worst_fd < 1e-4, fmt("LJ gradient vs finite differences: max error %.3g", worst_fd));
    c.expect(worst_u < 1e-9 && worst_v < 1e-9,
             fmt("translation changes U by %.3g and V by %.3g", worst_u, worst_v));
  }
  // Determinism under a fixed seed, across both execution paths.
  {
    const GaussianWalkKernel walk(0.02);
    const Problem p = walk_problem(walk, ChiVariant::increment(),
                                   [](std::span<const double> x) { return std::exp(-x[0] * x[0]); });
    RunConfig cfg;
    cfg.eps = 0.02;
    cfg.replicas = 5000;
    cfg.seed = kSeed;
    cfg.record_trace = true;
    cfg.execution = Execution::serial;
    const RunReport a = run_experiment(cfg, p);
    const RunReport b = run_experiment(cfg, p);
    cfg.execution = Execution::parallel;
    const RunReport q = run_experiment(cfg, p);
    const bool same = a.estimate == b.estimate && a.estimate_variance == b.estimate_variance &&
                      a.mean_population_trace == b.mean_population_trace &&
                      a.estimate == q.estimate && a.mean_workload == q.mean_workload &&
                      a.mean_population_trace == q.mean_population_trace;
    c.expect(same, "fixed seed reproduces the report bit for bit, serial and parallel");
  }
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", available_threads());
  criterion(1, "unbiasedness against the analytic walk normalisation", unbiasedness);
  criterion(2, "second-moment growth of the population", instability);
  std::vector<CompareReport> grid;
  criterion(3, "ticketed variance dominance", [&](Check& c) {
    grid = compare_grid();
    variance_dominance(c, grid);
  });
  criterion(4, "workload identity", [&](Check& c) {
    if (grid.empty()) grid = compare_grid();
    workload_identity(c, grid);
  });
  criterion(5, "randomised tickets reproduce the plain law", law_equivalence);
  criterion(6, "Lennard-Jones rare event against brute force", lennard_jones);
  criterion(7, "Lorenz-63 twin experiment", lorenz);
  criterion(8, "invariant suite", invariants);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
