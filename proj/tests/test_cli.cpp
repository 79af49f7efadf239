#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "json.hpp"
#include "tdmc/report_io.hpp"

using namespace tdmc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tdmc_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("fig1 reruns are byte-identical") {
  const fs::path a = scratch("fig1_a"), b = scratch("fig1_b");
  const std::vector<std::string> common{"fig1", "--algorithm", "tdmc", "--seed", "7",
                                        "--replicas", "300", "--kmin", "2", "--kmax", "6"};
  auto args_a = common, args_b = common;
  args_a.insert(args_a.end(), {"--out", a.string()});
  args_b.insert(args_b.end(), {"--out", b.string()});
  REQUIRE(run(args_a).code == 0);
  REQUIRE(run(args_b).code == 0);
  CHECK(fs::exists(a / "tdmc_fig1.data"));
  CHECK_FALSE(fs::exists(a / "dmc_fig1.data"));
  CHECK(slurp(a / "tdmc_fig1.data") == slurp(b / "tdmc_fig1.data"));
  // The CSV and JSON echo the output directory, so compare everything else.
  auto strip_out = [](std::string s) {
    std::string kept;
    std::istringstream is(s);
    std::string line;
    while (std::getline(is, line)) {
      if (line.find("tdmc_cli_test_") == std::string::npos) kept += line + '\n';
    }
    return kept;
  };
  CHECK(strip_out(slurp(a / "fig1.csv")) == strip_out(slurp(b / "fig1.csv")));
  CHECK(strip_out(slurp(a / "fig1.json")) == strip_out(slurp(b / "fig1.json")));

  // Five step sizes give five plot rows per algorithm.
  std::istringstream plot(slurp(a / "tdmc_fig1.data"));
  int rows = 0;
  std::string line;
  while (std::getline(plot, line)) {
    ++rows;
    CHECK(split(line).size() == 2);
  }
  CHECK(rows == 5);
}

TEST_CASE("echoed configuration reproduces the output") {
  const Result first = run({"compare", "--eps", "0.1", "--replicas", "500", "--seed", "3",
                            "--format", "csv"});
  REQUIRE(first.code == 0);
  const std::string header = first_line(first.out);
  REQUIRE(header.rfind("# command: ", 0) == 0);
  const auto args = split(header.substr(std::string("# command: ").size()));
  const Result again = run(args);
  REQUIRE(again.code == 0);
  CHECK(again.out == first.out);
}

TEST_CASE("lj with the full-fidelity step size echoes the resolved configuration") {
  const Result r = run({"lj", "--gamma", "0.4", "--lambda", "1.9", "--paper-eps", "--replicas",
                        "2", "--horizon", "0.01", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["config"]["gamma"] == "0.4");
  CHECK(j["config"]["lambda"] == "1.9");
  CHECK(std::stod(j["config"]["eps"].get<std::string>()) == 1e-4);
  CHECK(j["config"]["m"] == "1");
  CHECK(j["report"]["gamma"] == 0.4);
}

TEST_CASE("compare report has variance and workload sections") {
  const Result r = run({"compare", "--eps", "0.1", "--replicas", "400"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\nvariance,") != std::string::npos);
  CHECK(r.out.find("\nworkload,") != std::string::npos);
  const auto json_start = r.out.find("{\n");
  REQUIRE(json_start != std::string::npos);
  const auto j = nlohmann::json::parse(r.out.substr(json_start));
  CHECK(j["report"].contains("variance"));
  CHECK(j["report"].contains("workload"));
}

TEST_CASE("JSON summary round-trips") {
  const fs::path dir = scratch("oracle");
  const Result r = run({"oracle", "--eps", "0.1", "--replicas", "1000", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "oracle.json"));
  const double value = j["report"]["value"];
  std::istringstream csv(slurp(dir / "oracle.csv"));
  std::string line, last;
  while (std::getline(csv, line)) last = line;
  CHECK(std::stod(last.substr(0, last.find(','))) == value);
  CHECK(j.dump() == nlohmann::json::parse(j.dump()).dump());
}

TEST_CASE("filter writes its outputs") {
  const fs::path dir = scratch("filter");
  const Result r = run({"filter", "--eps", "0.001", "--horizon", "0.05", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "filter.csv"));
  CHECK(fs::exists(dir / "filter.json"));
  CHECK(slurp(dir / "observations.csv").rfind("k,d1,d2,d3\n", 0) == 0);
  const std::string csv = slurp(dir / "filter.csv");
  CHECK(csv.find("--classical-lorenz") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 1);
  CHECK(run({"fig1", "--bogus"}).code == 1);
  CHECK(run({"nope"}).code == 1);
  CHECK(run({"compare", "--model", "walk-sideways"}).code == 1);
  CHECK(run({"lj", "--eps", "0.001", "--paper-eps"}).code == 1);
  CHECK(run({"compare", "--eps", "0.3"}).code == 1);  // horizon 1 is not a multiple
  CHECK(run({"fig1", "--help"}).code == 0);

  const Result blown = run({"fig1", "--algorithm", "dmc", "--eps", "0.00390625", "--replicas",
                            "50", "--pop-cap", "3", "--format", "csv"});
  CHECK(blown.code == 0);  // capped replicas are censored, not fatal
  const Result exploded = run({"lj", "--lambda", "40", "--pop-cap", "1", "--horizon", "0.2",
                               "--replicas", "5"});
  CHECK(exploded.code == 2);
  CHECK(exploded.err.find("replica ") != std::string::npos);
  CHECK(exploded.err.find("step ") != std::string::npos);

  const fs::path file = scratch("not_a_dir");
  { std::ofstream(file) << "x"; }
  const Result io = run({"oracle", "--eps", "0.5", "--replicas", "10", "--out", file.string()});
  CHECK(io.code == 2);
  CHECK(io.err.find(file.string()) != std::string::npos);
}

TEST_CASE("empty report gives a header-only CSV") {
  std::ostringstream os;
  const ConfigEcho echo{"fig1", {{"seed", "1"}}, {}};
  write_fig1_csv(os, echo, Fig1Report{});
  const std::string text = os.str();
  CHECK(text ==
        "# command: fig1 --seed 1\n# seed=1\n"
        "algorithm,eps,neg_log2_eps,mean_n2,log2_mean_n2,mean_n2_stderr,replicas,censored\n");
}

TEST_CASE("doubles are written with round-trip precision") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
