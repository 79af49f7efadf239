#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "tdmc/errors.hpp"
#include "tdmc/experiments.hpp"
#include "tdmc/oracle.hpp"
#include "tdmc/report_io.hpp"

namespace tdmc {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "both";
  bool serial = false;

  Execution execution() const { return serial ? Execution::serial : Execution::parallel; }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "master seed")->capture_default_str();
  app->add_option("--out", c.out, "output directory (stdout when omitted)");
  app->add_option("--format", c.format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();
  app->add_flag("--serial", c.serial, "run replicas on the serial reference path");
}

void echo_common(ConfigEcho& e, const Common& c) {
  e.options.emplace_back("seed", std::to_string(c.seed));
  e.options.emplace_back("format", c.format);
  if (!c.out.empty()) e.options.emplace_back("out", c.out);
  if (c.serial) e.switches.push_back("serial");
}

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

// Writes one named output either into the --out directory or to `out`.
class Sink {
 public:
  Sink(const Common& c, std::ostream& out) : common_(c), out_(out) {
    if (!c.out.empty()) {
      std::error_code ec;
      fs::create_directories(c.out, ec);
      if (ec) throw RuntimeError("cannot create output directory " + c.out + ": " + ec.message());
    }
  }

  bool csv() const { return common_.format != "json"; }
  bool json_enabled() const { return common_.format != "csv"; }

  // Auxiliary files only exist when an output directory is given.
  void file(const std::string& name, const std::function<void(std::ostream&)>& write) const {
    if (common_.out.empty()) return;
    emit(name, write);
  }

  // Primary report: written to the directory, or to the stream when none is set.
  void report(const std::string& name, const std::function<void(std::ostream&)>& write) const {
    if (common_.out.empty()) {
      write(out_);
      return;
    }
    emit(name, write);
  }

 private:
  void emit(const std::string& name, const std::function<void(std::ostream&)>& write) const {
    const fs::path path = fs::path(common_.out) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw RuntimeError("cannot open " + path.string() + " for writing");
    write(os);
    os.flush();
    if (!os) throw RuntimeError("failed writing " + path.string());
  }

  const Common& common_;
  std::ostream& out_;
};

void emit_pair(const Sink& sink, const std::string& stem, const ConfigEcho& echo,
               const std::function<void(std::ostream&)>& csv, const json& report) {
  if (sink.csv()) sink.report(stem + ".csv", csv);
  if (sink.json_enabled()) {
    sink.report(stem + ".json", [&](std::ostream& os) { write_json(os, echo, report); });
  }
}

// ---------------------------------------------------------------------------

struct Fig1Args {
  Common common;
  std::vector<double> eps;
  int kmin = 4;
  int kmax = 12;
  std::size_t replicas = 10000;
  std::string algorithm = "both";
  std::size_t pop_cap = kDefaultPopulationCap;
};

void add_fig1(CLI::App& app, Fig1Args& a) {
  auto* sub = app.add_subcommand("fig1", "second moment of the population against step size");
  add_common(sub, a.common);
  sub->add_option("--eps", a.eps, "step sizes (overrides --kmin/--kmax)");
  sub->add_option("--kmin", a.kmin, "smallest k in eps = 2^-k")->capture_default_str();
  sub->add_option("--kmax", a.kmax, "largest k in eps = 2^-k")->capture_default_str();
  sub->add_option("--replicas", a.replicas)->capture_default_str();
  sub->add_option("--algorithm", a.algorithm)
      ->check(CLI::IsMember({"dmc", "tdmc", "both"}))
      ->capture_default_str();
  sub->add_option("--pop-cap", a.pop_cap)->capture_default_str();
}

void run_fig1(const Fig1Args& a, std::ostream& out) {
  std::vector<double> eps = a.eps;
  if (eps.empty()) {
    if (a.kmin > a.kmax || a.kmin < 0) throw ConfigError("need 0 <= kmin <= kmax");
    for (int k = a.kmin; k <= a.kmax; ++k) eps.push_back(std::ldexp(1.0, -k));
  }
  std::vector<Algorithm> algs;
  if (a.algorithm != "tdmc") algs.push_back(Algorithm::dmc);
  if (a.algorithm != "dmc") algs.push_back(Algorithm::tdmc);

  ConfigEcho echo{"fig1", {}, {}};
  for (double e : eps) echo.options.emplace_back("eps", num(e));
  echo.options.emplace_back("replicas", num(a.replicas));
  echo.options.emplace_back("algorithm", a.algorithm);
  echo.options.emplace_back("pop-cap", num(a.pop_cap));
  echo_common(echo, a.common);

  const Fig1Report r =
      fig1_second_moment(eps, a.replicas, a.common.seed, algs, a.pop_cap, a.common.execution());
  Sink sink(a.common, out);
  emit_pair(sink, "fig1", echo, [&](std::ostream& os) { write_fig1_csv(os, echo, r); }, to_json(r));
  for (Algorithm alg : algs) {
    sink.file(to_string(alg) + "_fig1.data", [&](std::ostream& os) { write_fig1_plot(os, r, alg); });
  }
}

// ---------------------------------------------------------------------------

struct LjArgs {
  Common common;
  lj::Params params;
  bool fine_eps = false;
  double horizon = 2.0;
  std::size_t m = 1;
  std::size_t replicas = 2000;
  std::string algorithm = "tdmc";
  std::size_t branch_interval = 1;
  std::size_t pop_cap = kDefaultPopulationCap;
};

void add_lj(CLI::App& app, LjArgs& a) {
  auto* sub = app.add_subcommand("lj", "Lennard-Jones cluster rare-event probability");
  add_common(sub, a.common);
  sub->add_option("--gamma", a.params.gamma, "temperature")->capture_default_str();
  sub->add_option("--lambda", a.params.lambda, "importance strength")->capture_default_str();
  auto* eps = sub->add_option("--eps", a.params.eps, "step size")->capture_default_str();
  sub->add_flag("--paper-eps", a.fine_eps, "use eps = 1e-4")->excludes(eps);
  sub->add_option("--r-min", a.params.r_min, "force clamp radius")->capture_default_str();
  sub->add_option("--horizon", a.horizon)->capture_default_str();
  sub->add_option("--m", a.m, "initial copies")->capture_default_str();
  sub->add_option("--replicas", a.replicas)->capture_default_str();
  sub->add_option("--algorithm", a.algorithm)
      ->check(CLI::IsMember({"dmc", "tdmc"}))
      ->capture_default_str();
  sub->add_option("--branch-interval", a.branch_interval)->capture_default_str();
  sub->add_option("--pop-cap", a.pop_cap)->capture_default_str();
}

void run_lj(const LjArgs& a, std::ostream& out) {
  LjConfig cfg;
  cfg.params = a.params;
  if (a.fine_eps) cfg.params.eps = 1e-4;
  cfg.horizon = a.horizon;
  cfg.copies = a.m;
  cfg.replicas = a.replicas;
  cfg.algorithm = parse_algorithm(a.algorithm);
  cfg.branch_interval = a.branch_interval;
  cfg.seed = a.common.seed;
  cfg.population_cap = a.pop_cap;
  cfg.execution = a.common.execution();

  ConfigEcho echo{"lj", {}, {}};
  echo.options = {{"gamma", num(cfg.params.gamma)},
                  {"lambda", num(cfg.params.lambda)},
                  {"eps", num(cfg.params.eps)},
                  {"r-min", num(cfg.params.r_min)},
                  {"horizon", num(cfg.horizon)},
                  {"m", num(cfg.copies)},
                  {"replicas", num(cfg.replicas)},
                  {"algorithm", a.algorithm},
                  {"branch-interval", num(cfg.branch_interval)},
                  {"pop-cap", num(cfg.population_cap)}};
  echo_common(echo, a.common);

  const LjReport r = lj_rare_event(cfg);
  Sink sink(a.common, out);
  emit_pair(sink, "lj", echo, [&](std::ostream& os) { write_lj_csv(os, echo, cfg, {r}); },
            to_json(cfg, r));
}

// ---------------------------------------------------------------------------

struct FilterArgs {
  Common common;
  std::size_t m = 10;
  double eps = 1e-4;
  bool fine_eps = false;
  double horizon = 2.0;
  bool as_printed = false;
  bool classical = false;
  std::string algorithm = "tdmc";
  std::size_t branch_interval = 1;
  std::size_t pop_cap = kDefaultPopulationCap;
  double dynamics_noise = kLorenzNoise;
  double observation_noise = kObservationNoise;
};

void add_filter(CLI::App& app, FilterArgs& a) {
  auto* sub = app.add_subcommand("filter", "Lorenz-63 twin experiment");
  add_common(sub, a.common);
  sub->add_option("--m", a.m, "target population")->capture_default_str();
  auto* eps = sub->add_option("--eps", a.eps)->capture_default_str();
  sub->add_flag("--paper-eps", a.fine_eps, "use eps = 1e-4")->excludes(eps);
  sub->add_option("--horizon", a.horizon)->capture_default_str();
  auto* printed = sub->add_flag("--as-printed", a.as_printed, "drift 10 (y1 - y2)");
  sub->add_flag("--classical-lorenz", a.classical, "drift 10 (y2 - y1) (default)")->excludes(printed);
  sub->add_option("--algorithm", a.algorithm)
      ->check(CLI::IsMember({"dmc", "tdmc"}))
      ->capture_default_str();
  sub->add_option("--branch-interval", a.branch_interval)->capture_default_str();
  sub->add_option("--pop-cap", a.pop_cap)->capture_default_str();
  sub->add_option("--dynamics-noise", a.dynamics_noise, "diffusion coefficient")
      ->capture_default_str();
  sub->add_option("--observation-noise", a.observation_noise)->capture_default_str();
}

void run_filter_cmd(const FilterArgs& a, std::ostream& out) {
  FilterConfig cfg;
  cfg.copies = a.m;
  cfg.eps = a.fine_eps ? 1e-4 : a.eps;
  cfg.horizon = a.horizon;
  cfg.sign = a.as_printed ? LorenzSign::as_printed : LorenzSign::classical;
  cfg.algorithm = parse_algorithm(a.algorithm);
  cfg.seed = a.common.seed;
  cfg.branch_interval = a.branch_interval;
  cfg.population_cap = a.pop_cap;
  cfg.dynamics_noise = a.dynamics_noise;
  cfg.observation_noise = a.observation_noise;
  if (cfg.copies == 0) throw ConfigError("--m must be at least 1");

  ConfigEcho echo{"filter", {}, {}};
  echo.options = {{"m", num(cfg.copies)},
                  {"eps", num(cfg.eps)},
                  {"horizon", num(cfg.horizon)},
                  {"algorithm", a.algorithm},
                  {"branch-interval", num(cfg.branch_interval)},
                  {"pop-cap", num(cfg.population_cap)},
                  {"dynamics-noise", num(cfg.dynamics_noise)},
                  {"observation-noise", num(cfg.observation_noise)}};
  echo.switches.push_back(a.as_printed ? "as-printed" : "classical-lorenz");
  echo_common(echo, a.common);

  const TwinData data = make_twin_data(cfg);
  const FilterReport r = run_filter(cfg, data);
  Sink sink(a.common, out);
  emit_pair(sink, "filter", echo, [&](std::ostream& os) { write_filter_csv(os, echo, r, cfg.eps); },
            to_json(r));
  sink.file("observations.csv",
            [&](std::ostream& os) { write_observations_csv(os, *data.observations); });
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  Common common;
  std::string model = "walk-increment";
  std::string observable = "bump";
  double eps = 0.1;
  double horizon = 1.0;
  std::size_t m = 1;
  std::size_t replicas = 10000;
  bool crn = false;
};

void add_compare(CLI::App& app, CompareArgs& a) {
  auto* sub = app.add_subcommand("compare", "estimator variance and workload of both algorithms");
  add_common(sub, a.common);
  sub->add_option("--model", a.model)
      ->check(CLI::IsMember({"walk-increment", "walk-quadratic", "walk-zero"}))
      ->capture_default_str();
  sub->add_option("--observable", a.observable)
      ->check(CLI::IsMember({"bump", "exp"}))
      ->capture_default_str();
  sub->add_option("--eps", a.eps)->capture_default_str();
  sub->add_option("--horizon", a.horizon)->capture_default_str();
  sub->add_option("--m", a.m, "initial copies")->capture_default_str();
  sub->add_option("--replicas", a.replicas)->capture_default_str();
  sub->add_flag("--common-random-numbers", a.crn, "share replica streams between algorithms");
}

void run_compare(const CompareArgs& a, std::ostream& out) {
  CompareConfig cfg;
  cfg.model = parse_compare_model(a.model);
  cfg.observable = parse_compare_observable(a.observable);
  cfg.eps = a.eps;
  cfg.horizon = a.horizon;
  cfg.copies = a.m;
  cfg.replicas = a.replicas;
  cfg.seed = a.common.seed;
  cfg.common_random_numbers = a.crn;
  cfg.execution = a.common.execution();

  ConfigEcho echo{"compare", {}, {}};
  echo.options = {{"model", a.model},         {"observable", a.observable},
                  {"eps", num(cfg.eps)},      {"horizon", num(cfg.horizon)},
                  {"m", num(cfg.copies)},     {"replicas", num(cfg.replicas)}};
  if (a.crn) echo.switches.push_back("common-random-numbers");
  echo_common(echo, a.common);

  const CompareReport r = variance_workload_compare(cfg);
  Sink sink(a.common, out);
  emit_pair(sink, "compare", echo, [&](std::ostream& os) { write_compare_csv(os, echo, r); },
            to_json(r));
}

// ---------------------------------------------------------------------------

struct OracleArgs {
  Common common;
  std::string model = "walk-increment";
  std::string observable = "one";
  double eps = 0.01;
  double horizon = 1.0;
  std::size_t replicas = 100000;
  lj::Params params;
};

void add_oracle(CLI::App& app, OracleArgs& a) {
  auto* sub = app.add_subcommand("oracle", "branching-free weighted reference estimate");
  add_common(sub, a.common);
  sub->add_option("--model", a.model, "walk-increment, walk-quadratic, walk-zero or lj")
      ->check(CLI::IsMember({"walk-increment", "walk-quadratic", "walk-zero", "lj"}))
      ->capture_default_str();
  sub->add_option("--observable", a.observable, "one, bump or exp (walk models)")
      ->check(CLI::IsMember({"one", "bump", "exp"}))
      ->capture_default_str();
  sub->add_option("--eps", a.eps)->capture_default_str();
  sub->add_option("--horizon", a.horizon)->capture_default_str();
  sub->add_option("--replicas", a.replicas, "number of weighted paths")->capture_default_str();
  sub->add_option("--gamma", a.params.gamma)->capture_default_str();
  sub->add_option("--r-min", a.params.r_min)->capture_default_str();
}

void run_oracle(const OracleArgs& a, std::ostream& out) {
  const std::size_t steps = steps_for_horizon(a.horizon, a.eps);
  ConfigEcho echo{"oracle", {}, {}};
  echo.options = {{"model", a.model},      {"observable", a.observable},
                  {"eps", num(a.eps)},     {"horizon", num(a.horizon)},
                  {"replicas", num(a.replicas)}};
  ReferenceEstimate r;
  if (a.model == "lj") {
    lj::Params p = a.params;
    p.eps = a.eps;
    echo.options.emplace_back("gamma", num(p.gamma));
    echo.options.emplace_back("r-min", num(p.r_min));
    echo_common(echo, a.common);
    const LangevinKernel kernel(p);
    const Observable in_b = [](std::span<const double> x) { return lj::in_target_set(x) ? 1.0 : 0.0; };
    r = reference_estimate(kernel, ChiVariant::zero(), in_b, lj::initial_configuration(), steps,
                           a.replicas, a.common.seed, a.common.execution());
  } else {
    echo_common(echo, a.common);
    const GaussianWalkKernel kernel(a.eps);
    ChiVariant chi = ChiVariant::zero();
    if (a.model == "walk-increment") chi = ChiVariant::increment();
    if (a.model == "walk-quadratic") {
      chi = ChiVariant::potential_difference([](std::span<const double> x) { return x[0] * x[0]; });
    }
    Observable f = [](std::span<const double>) { return 1.0; };
    if (a.observable == "bump") f = [](std::span<const double> x) { return std::exp(-x[0] * x[0]) + 0.1; };
    if (a.observable == "exp") f = [](std::span<const double> x) { return std::exp(x[0]); };
    const StateVector x0{0.0};
    r = reference_estimate(kernel, chi, f, x0, steps, a.replicas, a.common.seed,
                           a.common.execution());
  }
  Sink sink(a.common, out);
  emit_pair(sink, "oracle", echo, [&](std::ostream& os) { write_oracle_csv(os, echo, r); },
            to_json(r));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Branching Monte Carlo experiments", "tdmc"};
  app.require_subcommand(1);
  Fig1Args fig1;
  LjArgs lj;
  FilterArgs filter;
  CompareArgs compare;
  OracleArgs oracle;
  add_fig1(app, fig1);
  add_lj(app, lj);
  add_filter(app, filter);
  add_compare(app, compare);
  add_oracle(app, oracle);

  try {
    // CLI11 consumes the vector from the back.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (app.got_subcommand("fig1")) run_fig1(fig1, out);
    if (app.got_subcommand("lj")) run_lj(lj, out);
    if (app.got_subcommand("filter")) run_filter_cmd(filter, out);
    if (app.got_subcommand("compare")) run_compare(compare, out);
    if (app.got_subcommand("oracle")) run_oracle(oracle, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const RuntimeError& e) {
    err << "run failed: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace tdmc
