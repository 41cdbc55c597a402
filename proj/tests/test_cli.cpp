#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "hsflow/cli.hpp"
#include "hsflow/error.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("hsflow_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const fs::path& dir, const std::string& config, const std::string& extra = "") {
  fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << config;
  std::string cmd = std::string("HSFLOW_LOG=quiet \"") + HSFLOW_CLI_PATH + "\" --config \"" + cfg.string() +
                    "\" --out \"" + (dir / "out").string() + "\" " + extra + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json result(const fs::path& dir) { return json::parse(slurp(dir / "out" / "result.json")); }

}  // namespace

TEST_CASE("cli solve writes snapshots and a step energy curve") {
  fs::path d = scratch("solve");
  CHECK(run_cli(d, R"({"command":"solve","builtin":"hat","t":[0,1,2,3]})") == 0);
  for (int i = 0; i < 4; ++i) CHECK(fs::exists(d / "out" / ("snapshot_" + std::to_string(i) + ".csv")));
  CHECK(slurp(d / "out" / "energy_curve.csv") == "t,energy\r\n0,2\r\n1,2\r\n2,1\r\n3,1\r\n");
  json r = result(d);
  CHECK(r["passed"] == true);
  CHECK(r["scalars"]["energy_2"] == 1.0);
  fs::remove_all(d);
}

TEST_CASE("cli distance on example 2") {
  fs::path d = scratch("distance");
  CHECK(run_cli(d, R"({"command":"distance","builtin":"example2","m":1,"n":8,"eps":0.01})") == 0);
  json r = result(d);
  CHECK(r["scalars"]["dp_value"].get<double>() >= 0.109);
  CHECK(fs::exists(d / "out" / "dp_table.csv"));
  fs::remove_all(d);
}

TEST_CASE("cli inline inputs and other commands") {
  fs::path d = scratch("inline");
  CHECK(run_cli(d, R"({"command":"distance","u":{"x":[-1,0,1],"y":[0,1,0]},"v":"hat","eps":0.1})") == 0);
  CHECK(result(d)["scalars"]["value"] == 0.0);
  CHECK(run_cli(d, R"({"command":"energy","input":{"alpha":[-1,1],"pos":[0,1]}})") == 0);
  CHECK(result(d)["scalars"]["atom_mass"] == 4.0);
  CHECK(run_cli(d, R"({"command":"energy","builtin":"witness112"})") == 0);
  CHECK(run_cli(d, R"({"command":"solve","builtin":"witness112","t":[0,1]})") == 0);
  CHECK(run_cli(d, R"({"command":"experiment","name":"hamiltonian"})") == 0);
  CHECK(run_cli(d, R"({"command":"experiment","name":"example1","n":4})") == 0);
  CHECK(run_cli(d, R"({"command":"experiment","name":"zero_data"})", "--seed 42") == 0);
  CHECK(result(d)["params"]["config"]["seed"] == 42);
  fs::remove_all(d);
}

TEST_CASE("cli exit codes") {
  fs::path d = scratch("codes");
  CHECK(run_cli(d, "not json") == 2);
  CHECK(run_cli(d, R"({"command":"fly"})") == 2);
  CHECK(run_cli(d, R"({"command":"solve","builtin":"nope"})") == 2);
  CHECK(run_cli(d, R"({"command":"solve","builtin":"hat","t":-1})") == 2);
  CHECK(run_cli(d, R"({"command":"distance","builtin":"example2","m":8,"n":8})") == 2);
  CHECK(run_cli(d, R"({"command":"solve","input":{"x":[1,0],"y":[0,0]}})") == 2);
  CHECK(run_cli(d, R"({"command":"energy","input":{"alpha":[1,1],"pos":[0,1]}})") == 2);
  CHECK(run_cli(d, R"({"command":"distance","u":"hat","v":"hat","kappa0":-1})") == 2);
  // Blow-up before the requested time is a contract failure.
  CHECK(run_cli(d, R"({"command":"experiment","name":"peakon_drift","t":2})") == 1);
  fs::remove_all(d);
}

TEST_CASE("cli output is byte-identical across runs") {
  fs::path a = scratch("det_a");
  fs::path b = scratch("det_b");
  const std::string cfg = R"({"command":"experiment","name":"example1","n":4,"t":0.8})";
  REQUIRE(run_cli(a, cfg) == 0);
  REQUIRE(run_cli(b, cfg) == 0);
  for (const auto& entry : fs::directory_iterator(a / "out")) {
    CHECK(slurp(entry.path()) == slurp(b / "out" / entry.path().filename()));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("execute validates in process") {
  CHECK_THROWS_AS(hsflow::execute(json::array()), hsflow::ConfigInvalid);
  CHECK_THROWS_AS(hsflow::execute(json{{"command", "solve"}}), hsflow::ConfigInvalid);
  hsflow::ScenarioResult r = hsflow::execute(json{{"command", "solve"}, {"builtin", "hat"}, {"t", 1.0}});
  CHECK(r.passed());
}
