#include "tdmc/report_io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace tdmc {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string fd(double v) { return format_double(v); }

// NaN and infinities have no JSON literal; they go out as null.
json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
std::string row(std::initializer_list<T> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  return out;
}

std::string z(std::size_t v) { return std::to_string(v); }

}  // namespace

std::vector<std::string> ConfigEcho::argv() const {
  std::vector<std::string> out{subcommand};
  for (const auto& [k, v] : options) {
    out.push_back("--" + k);
    out.push_back(v);
  }
  for (const auto& s : switches) out.push_back("--" + s);
  return out;
}

std::string ConfigEcho::command_line() const {
  std::string out;
  for (const auto& tok : argv()) {
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

json ConfigEcho::to_json() const {
  json j;
  j["subcommand"] = subcommand;
  for (const auto& [k, v] : options) j[k] = v;
  for (const auto& s : switches) j[s] = true;
  j["command"] = command_line();
  return j;
}

void write_config_header(std::ostream& os, const ConfigEcho& echo) {
  os << "# command: " << echo.command_line() << '\n';
  for (const auto& [k, v] : echo.options) os << "# " << k << '=' << v << '\n';
  for (const auto& s : echo.switches) os << "# " << s << "=true\n";
}

void write_fig1_csv(std::ostream& os, const ConfigEcho& echo, const Fig1Report& r) {
  write_config_header(os, echo);
  os << "algorithm,eps,neg_log2_eps,mean_n2,log2_mean_n2,mean_n2_stderr,replicas,censored\n";
  for (const Fig1Point& p : r.points) {
    os << row({to_string(p.algorithm), fd(p.eps), fd(p.neg_log_eps), fd(p.mean_n2),
               fd(p.log_mean_n2), fd(p.mean_n2_stderr), z(p.replicas), z(p.censored)})
       << '\n';
  }
}

void write_fig1_plot(std::ostream& os, const Fig1Report& r, Algorithm alg) {
  for (const Fig1Point& p : r.points) {
    if (p.algorithm != alg || p.replicas == 0) continue;
    os << fd(p.neg_log_eps) << ' ' << fd(p.log_mean_n2) << '\n';
  }
}

void write_lj_csv(std::ostream& os, const ConfigEcho& echo, const LjConfig& cfg,
                  const std::vector<LjReport>& rows) {
  write_config_header(os, echo);
  os << "gamma,lambda,eps,horizon,algorithm,copies,replicas,estimate,estimate_stderr,"
        "variance_per_copy,scaled_workload,efficiency,brute_force_variance,"
        "extinction_fraction,clamp_warnings\n";
  for (const LjReport& r : rows) {
    os << row({fd(cfg.params.gamma), fd(cfg.params.lambda), fd(cfg.params.eps), fd(cfg.horizon),
               to_string(cfg.algorithm), z(cfg.copies), z(r.run.replicas), fd(r.estimate),
               fd(r.estimate_stderr), fd(r.variance_per_copy), fd(r.scaled_workload),
               fd(r.efficiency), fd(r.brute_force_variance), fd(r.run.extinction_fraction),
               z(r.run.clamp_warnings)})
       << '\n';
  }
}

void write_filter_csv(std::ostream& os, const ConfigEcho& echo, const FilterReport& r, double eps) {
  write_config_header(os, echo);
  os << "k,t,y1,y2,y3,mean1,mean2,mean3,population,distinct\n";
  for (std::size_t k = 0; k < r.reconstruction.size(); ++k) {
    const Vec3& y = r.hidden[k];
    const Vec3& m = r.reconstruction[k];
    os << row({z(k), fd(static_cast<double>(k) * eps), fd(y[0]), fd(y[1]), fd(y[2]), fd(m[0]),
               fd(m[1]), fd(m[2]), z(r.population[k]), z(r.distinct[k])})
       << '\n';
  }
}

void write_compare_csv(std::ostream& os, const ConfigEcho& echo, const CompareReport& r) {
  write_config_header(os, echo);
  os << "section,dmc,dmc_stderr,tdmc,tdmc_stderr,difference,z,pass\n";
  os << row({std::string("estimate"), fd(r.dmc.estimate), fd(r.dmc.estimate_stderr),
             fd(r.tdmc.estimate), fd(r.tdmc.estimate_stderr), fd(r.dmc.estimate - r.tdmc.estimate),
             std::string(""), std::string("")})
     << '\n';
  os << row({std::string("variance"), fd(r.dmc.estimate_variance),
             fd(r.dmc.estimate_variance_stderr), fd(r.tdmc.estimate_variance),
             fd(r.tdmc.estimate_variance_stderr), fd(r.variance_difference), fd(r.variance_z),
             std::string(r.variance_dominance ? "true" : "false")})
     << '\n';
  os << row({std::string("workload"), fd(r.dmc.mean_workload), fd(r.dmc.workload_stderr),
             fd(r.tdmc.mean_workload), fd(r.tdmc.workload_stderr), fd(r.workload_difference),
             fd(r.workload_z), std::string(r.workload_agree ? "true" : "false")})
     << '\n';
}

void write_oracle_csv(std::ostream& os, const ConfigEcho& echo, const ReferenceEstimate& r) {
  write_config_header(os, echo);
  os << "value,std_error,n_samples,workload\n";
  os << row({fd(r.value), fd(r.std_error), z(r.n_samples), std::to_string(r.workload)}) << '\n';
}

json to_json(const RunReport& r) {
  json j;
  j["algorithm"] = to_string(r.algorithm);
  j["replicas"] = r.replicas;
  j["estimate"] = jnum(r.estimate);
  j["estimate_stderr"] = jnum(r.estimate_stderr);
  j["estimate_variance"] = jnum(r.estimate_variance);
  j["estimate_variance_stderr"] = jnum(r.estimate_variance_stderr);
  j["mean_workload"] = jnum(r.mean_workload);
  j["workload_stderr"] = jnum(r.workload_stderr);
  j["mean_final_population"] = jnum(r.mean_final_population);
  j["mean_sq_final_population"] = jnum(r.mean_sq_final_population);
  j["extinction_fraction"] = jnum(r.extinction_fraction);
  j["clamp_warnings"] = r.clamp_warnings;
  if (!r.mean_population_trace.empty()) j["mean_population_trace"] = r.mean_population_trace;
  j["warnings"] = r.warnings;
  return j;
}

json to_json(const Fig1Report& r) {
  json j;
  j["slope_dmc"] = jnum(r.slope_dmc);
  j["slope_tdmc"] = jnum(r.slope_tdmc);
  json points = json::array();
  for (const Fig1Point& p : r.points) {
    points.push_back({{"algorithm", to_string(p.algorithm)},
                      {"eps", jnum(p.eps)},
                      {"neg_log2_eps", jnum(p.neg_log_eps)},
                      {"mean_n2", jnum(p.mean_n2)},
                      {"log2_mean_n2", jnum(p.log_mean_n2)},
                      {"mean_n2_stderr", jnum(p.mean_n2_stderr)},
                      {"replicas", p.replicas},
                      {"censored", p.censored}});
  }
  j["points"] = std::move(points);
  return j;
}

json to_json(const LjConfig& cfg, const LjReport& r) {
  json j;
  j["gamma"] = cfg.params.gamma;
  j["lambda"] = cfg.params.lambda;
  j["eps"] = cfg.params.eps;
  j["horizon"] = cfg.horizon;
  j["copies"] = cfg.copies;
  j["estimate"] = jnum(r.estimate);
  j["estimate_stderr"] = jnum(r.estimate_stderr);
  j["variance_per_copy"] = jnum(r.variance_per_copy);
  j["scaled_workload"] = jnum(r.scaled_workload);
  j["efficiency"] = jnum(r.efficiency);
  j["brute_force_variance"] = jnum(r.brute_force_variance);
  j["run"] = to_json(r.run);
  return j;
}

json to_json(const FilterReport& r) {
  json j;
  j["steps"] = r.reconstruction.empty() ? 0 : r.reconstruction.size() - 1;
  j["rmse"] = {jnum(r.rmse[0]), jnum(r.rmse[1]), jnum(r.rmse[2])};
  j["hidden_std"] = {jnum(r.hidden_std[0]), jnum(r.hidden_std[1]), jnum(r.hidden_std[2])};
  j["mean_distinct"] = jnum(r.mean_distinct);
  j["clamp_warnings"] = r.clamp_warnings;
  return j;
}

json to_json(const CompareReport& r) {
  json j;
  j["model"] = to_string(r.config.model);
  j["observable"] = to_string(r.config.observable);
  j["dmc"] = to_json(r.dmc);
  j["tdmc"] = to_json(r.tdmc);
  j["variance"] = {{"dmc", jnum(r.dmc.estimate_variance)},
                   {"tdmc", jnum(r.tdmc.estimate_variance)},
                   {"difference", jnum(r.variance_difference)},
                   {"z", jnum(r.variance_z)},
                   {"critical_z", kOneSided99},
                   {"tdmc_smaller", r.variance_dominance}};
  j["workload"] = {{"dmc", jnum(r.dmc.mean_workload)},
                   {"tdmc", jnum(r.tdmc.mean_workload)},
                   {"difference", jnum(r.workload_difference)},
                   {"z", jnum(r.workload_z)},
                   {"agree", r.workload_agree}};
  return j;
}

json to_json(const ReferenceEstimate& r) {
  return {{"value", jnum(r.value)},
          {"std_error", jnum(r.std_error)},
          {"n_samples", r.n_samples},
          {"workload", r.workload}};
}

void write_json(std::ostream& os, const ConfigEcho& echo, const json& report) {
  json j;
  j["config"] = echo.to_json();
  j["report"] = report;
  os << j.dump(2) << '\n';
}

}  // namespace tdmc
