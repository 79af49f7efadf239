#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tdmc/experiments.hpp"

namespace tdmc {

// Resolved configuration of a run as the command line that reproduces it.
struct ConfigEcho {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> options;  // flag (without --) and value
  std::vector<std::string> switches;                          // value-less flags that were set

  std::vector<std::string> argv() const;  // subcommand followed by the flags
  std::string command_line() const;       // argv() joined by single spaces
  nlohmann::ordered_json to_json() const;
};

// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

// Every CSV starts with "# command: ..." and one "# key=value" line per option.
void write_config_header(std::ostream& os, const ConfigEcho& echo);

void write_fig1_csv(std::ostream& os, const ConfigEcho& echo, const Fig1Report& r);
// Two whitespace-separated columns, -log2 eps and log2 E N^2, one line per point
// of `alg` with at least one completed replica.
void write_fig1_plot(std::ostream& os, const Fig1Report& r, Algorithm alg);
void write_lj_csv(std::ostream& os, const ConfigEcho& echo, const LjConfig& cfg,
                  const std::vector<LjReport>& rows);
void write_filter_csv(std::ostream& os, const ConfigEcho& echo, const FilterReport& r, double eps);
void write_compare_csv(std::ostream& os, const ConfigEcho& echo, const CompareReport& r);
void write_oracle_csv(std::ostream& os, const ConfigEcho& echo, const ReferenceEstimate& r);

nlohmann::ordered_json to_json(const RunReport& r);
nlohmann::ordered_json to_json(const Fig1Report& r);
nlohmann::ordered_json to_json(const LjConfig& cfg, const LjReport& r);
nlohmann::ordered_json to_json(const FilterReport& r);
nlohmann::ordered_json to_json(const CompareReport& r);
nlohmann::ordered_json to_json(const ReferenceEstimate& r);

// {"config": ..., "report": ...} pretty-printed with a trailing newline.
void write_json(std::ostream& os, const ConfigEcho& echo, const nlohmann::ordered_json& report);

}  // namespace tdmc
