#include "hsflow/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hsflow/energy.hpp"
#include "hsflow/error.hpp"
#include "hsflow/flow.hpp"

namespace hsflow {
namespace {

using nlohmann::json;

enum class Verbosity { kQuiet, kInfo, kDebug };

Verbosity verbosity_from_env() {
  const char* v = std::getenv("HSFLOW_LOG");
  if (v == nullptr) return Verbosity::kInfo;
  std::string s(v);
  if (s == "0" || s == "quiet" || s == "off") return Verbosity::kQuiet;
  if (s == "2" || s == "debug") return Verbosity::kDebug;
  return Verbosity::kInfo;
}

double get_number(const json& cfg, const char* key, double fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if (!v.is_number()) throw ConfigInvalid(std::string("'") + key + "' must be a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigInvalid(std::string("'") + key + "' must be finite");
  return d;
}

double get_positive(const json& cfg, const char* key, double fallback) {
  double d = get_number(cfg, key, fallback);
  if (!(d > 0.0)) throw ConfigInvalid(std::string("'") + key + "' must be positive");
  return d;
}

int get_count(const json& cfg, const char* key, int fallback, int hi = 1 << 20) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if (!v.is_number_integer()) throw ConfigInvalid(std::string("'") + key + "' must be an integer");
  long long n = v.get<long long>();
  if (n < 1 || n > hi) {
    throw ConfigInvalid(std::string("'") + key + "' must lie in [1, " + std::to_string(hi) + "]");
  }
  return static_cast<int>(n);
}

std::vector<double> get_times(const json& cfg, std::vector<double> fallback) {
  if (!cfg.contains("t")) return fallback;
  const json& v = cfg.at("t");
  std::vector<double> ts;
  if (v.is_number()) {
    ts.push_back(v.get<double>());
  } else if (v.is_array() && !v.empty()) {
    for (const json& e : v) {
      if (!e.is_number()) throw ConfigInvalid("'t' entries must be numbers");
      ts.push_back(e.get<double>());
    }
  } else {
    throw ConfigInvalid("'t' must be a number or a nonempty array");
  }
  for (double t : ts) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigInvalid("times must be finite and nonnegative");
  }
  return ts;
}

double get_time(const json& cfg, double fallback) {
  std::vector<double> ts = get_times(cfg, {fallback});
  if (ts.size() != 1) throw ConfigInvalid("this command takes a single time");
  return ts.front();
}

struct Input {
  std::string builtin;  // empty for inline data
  std::optional<PiecewiseLinearFn> fn;
  std::optional<PeakonConfig> peakons;
};

// One input: a builtin name, {"builtin": name}, {"x", "y"} or {"alpha", "pos"}.
Input parse_input(const json& node, const json& cfg) {
  Input in;
  std::string name;
  if (node.is_string()) {
    name = node.get<std::string>();
  } else if (node.is_object() && node.contains("builtin")) {
    if (!node.at("builtin").is_string()) throw ConfigInvalid("'builtin' must be a string");
    name = node.at("builtin").get<std::string>();
  } else if (node.is_object() && node.contains("x")) {
    try {
      in.fn = node.get<PiecewiseLinearFn>();
    } catch (const json::exception& e) {
      throw ConfigInvalid(std::string("inline function: ") + e.what());
    } catch (const InvalidInput& e) {
      throw ConfigInvalid(std::string("inline function: ") + e.what());
    }
    return in;
  } else if (node.is_object() && node.contains("alpha")) {
    try {
      in.peakons = node.get<PeakonConfig>();
      in.fn = from_peakons(*in.peakons);
    } catch (const json::exception& e) {
      throw ConfigInvalid(std::string("peakon input: ") + e.what());
    } catch (const InvalidInput& e) {
      throw ConfigInvalid(std::string("peakon input: ") + e.what());
    } catch (const ConstraintViolated& e) {
      throw ConfigInvalid(std::string("peakon input: ") + e.what());
    }
    return in;
  } else {
    throw ConfigInvalid("input must be a builtin name, {\"x\",\"y\"} or {\"alpha\",\"pos\"}");
  }

  in.builtin = name;
  if (name == "hat") {
    in.fn = hat();
  } else if (name == "example1_u") {
    in.fn = example1_u(get_count(cfg, "n", 4, 4096));
  } else if (name == "example1_v") {
    in.fn = example1_v(get_count(cfg, "n", 4, 4096));
  } else if (name == "example2") {
    in.fn = example2_sawtooth(get_count(cfg, "m", 1, 4096));
  } else if (name == "witness112" || name == "example1") {
    // Trajectory or pair builtins, resolved by the command.
  } else {
    throw ConfigInvalid("unknown builtin '" + name + "'");
  }
  return in;
}

Input primary_input(const json& cfg) {
  if (cfg.contains("input")) return parse_input(cfg.at("input"), cfg);
  if (cfg.contains("builtin")) return parse_input(cfg.at("builtin"), cfg);
  throw ConfigInvalid("missing 'input' or 'builtin'");
}

const PiecewiseLinearFn& require_fn(const Input& in, const char* command) {
  if (!in.fn) throw ConfigInvalid("builtin '" + in.builtin + "' is not valid for " + command);
  return *in.fn;
}

CsvTable snapshot_table(const PiecewiseLinearFn& u) {
  CsvTable table({"x", "u"});
  auto x = u.breakpoints();
  auto y = u.values();
  for (std::size_t k = 0; k < x.size(); ++k) table.add_row({x[k], y[k]});
  return table;
}

std::string indexed(const char* prefix, std::size_t i) { return prefix + std::to_string(i); }

ScenarioResult cmd_solve(const json& cfg) {
  ScenarioResult r;
  r.name = "solve";
  Input in = primary_input(cfg);
  std::vector<double> times = get_times(cfg, {0.0});
  double tmax = *std::max_element(times.begin(), times.end());

  std::vector<double> curve_times(times.begin(), times.end());
  curve_times.push_back(0.0);
  if (in.builtin == "witness112") {
    bool ok = true;
    for (std::size_t i = 0; i < times.size(); ++i) {
      PiecewiseLinearFn u = conservative_witness(times[i]);
      double e = energy(u);
      r.scalars[indexed("energy_", i)] = e;
      ok = ok && (times[i] == 0.0 ? e == 0.0 : std::abs(e - 8.0) <= 1e-12 * 8.0);
      r.tables.emplace_back(indexed("snapshot_", i) + ".csv", snapshot_table(u));
    }
    r.flags["witness_energy_0_then_8"] = ok;
    std::sort(curve_times.begin(), curve_times.end());
    curve_times.erase(std::unique(curve_times.begin(), curve_times.end()), curve_times.end());
    CsvTable curve({"t", "energy"});
    for (double t : curve_times) curve.add_row({t, energy(conservative_witness(t))});
    r.tables.emplace_back("energy_curve.csv", std::move(curve));
    return r;
  }

  FlowState st(require_fn(in, "solve"));
  bool identity = true;
  for (std::size_t i = 0; i < times.size(); ++i) {
    PiecewiseLinearFn u = solve(st, times[i]);
    double e = energy(u);
    double expected = st.surviving_mass(times[i]);
    r.scalars[indexed("energy_", i)] = e;
    identity = identity && std::abs(e - expected) <= 1e-12 * std::max(1.0, expected);
    r.tables.emplace_back(indexed("snapshot_", i) + ".csv", snapshot_table(u));
  }
  r.scalars["initial_energy"] = st.total_mass();
  r.flags["energy_identity"] = identity;

  for (double e : st.epochs()) {
    if (e <= tmax) curve_times.push_back(e);
  }
  std::sort(curve_times.begin(), curve_times.end());
  curve_times.erase(std::unique(curve_times.begin(), curve_times.end()), curve_times.end());
  CsvTable curve({"t", "energy"});
  for (double t : curve_times) curve.add_row({t, energy(solve(st, t))});
  r.tables.emplace_back("energy_curve.csv", std::move(curve));
  return r;
}

TestFunction parse_bump(const json& cfg) {
  TestFunction tf{1.0, 0.0, 0.5, 1.5};
  if (!cfg.contains("bump")) return tf;
  const json& b = cfg.at("bump");
  if (!b.is_object()) throw ConfigInvalid("'bump' must be an object");
  tf.tc = get_number(b, "tc", tf.tc);
  tf.xc = get_number(b, "xc", tf.xc);
  tf.rt = get_positive(b, "rt", tf.rt);
  tf.rx = get_positive(b, "rx", tf.rx);
  return tf;
}

ScenarioResult cmd_energy(const json& cfg) {
  ScenarioResult r;
  r.name = "energy";
  Input in = primary_input(cfg);
  if (in.builtin == "witness112") {
    TestFunction tf = parse_bump(cfg);
    if (!(tf.t_lo() > 0.0)) throw ConfigInvalid("witness bump must be supported in t > 0");
    WitnessReport w = conservative_witness_check(tf);
    r.scalars["identity_residual"] = w.identity_residual;
    r.scalars["dissipativity_violation"] = w.dissipativity_violation;
    r.scalars["energy_before"] = w.energy_before;
    r.scalars["energy_after"] = w.energy_after;
    r.flags["identity_within_1e-3"] = w.identity_residual <= 1e-3;
    r.flags["violates_dissipation_from_0"] = w.dissipativity_violation > 1e-3;
    return r;
  }

  FlowState st(require_fn(in, "energy"));
  std::vector<DissipationAtom> atoms = dissipation_atoms(st);
  std::vector<double> times;
  if (cfg.contains("t")) {
    times = get_times(cfg, {});
  } else {
    times.push_back(0.0);
    times.insert(times.end(), st.epochs().begin(), st.epochs().end());
    times.push_back(st.epochs().empty() ? 1.0 : st.epochs().back() + 1.0);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    EnergyBalance b = energy_balance(st, times[i], times[i + 1]);
    worst = std::max(worst, std::abs(b.lhs - b.rhs));
  }
  double mass = 0.0;
  for (const DissipationAtom& a : atoms) mass += a.mass;
  r.scalars["initial_energy"] = st.total_mass();
  r.scalars["atom_count"] = static_cast<double>(atoms.size());
  r.scalars["atom_mass"] = mass;
  r.scalars["max_balance_error"] = worst;
  r.flags["balance_exact"] = worst <= 1e-12 * std::max(1.0, st.total_mass());
  r.tables.emplace_back("atoms.csv", atoms_table(atoms));
  r.tables.emplace_back("balance.csv", balance_table(st, times));
  return r;
}

CsvTable dp_sweep(const PiecewiseLinearFn& u, const PiecewiseLinearFn& v, double eps, const MetricParams& mp) {
  CsvTable table({"eps", "value", "atoms_u", "atoms_v"});
  for (double scale : {4.0, 2.0, 1.0}) {
    TransportOutcome o = j_upper_dp(u, v, scale * eps, mp);
    table.add_row({scale * eps, o.value, static_cast<double>(o.u_atoms.atoms.size()),
                   static_cast<double>(o.v_atoms.atoms.size())});
  }
  return table;
}

ScenarioResult cmd_distance(const json& cfg) {
  std::string builtin;
  if (cfg.contains("builtin") && cfg.at("builtin").is_string()) builtin = cfg.at("builtin").get<std::string>();

  if (builtin == "example2") {
    int m = get_count(cfg, "m", 1, 4096);
    int n = get_count(cfg, "n", 8, 4096);
    if (m >= n) throw ConfigInvalid("example2 needs m < n");
    double eps = get_positive(cfg, "eps", 1.0 / (8.0 * n));
    MetricParams mp(get_positive(cfg, "kappa0", 1.0));
    Example2Options opt;
    if (cfg.contains("contrast")) {
      if (!cfg.at("contrast").is_boolean()) throw ConfigInvalid("'contrast' must be a boolean");
      opt.contrast = cfg.at("contrast").get<bool>();
    }
    ScenarioResult r = example2(m, n, eps, mp, opt);
    r.name = "distance";
    r.tables.emplace_back("dp_table.csv", dp_sweep(example2_sawtooth(m), example2_sawtooth(n), eps, mp));
    return r;
  }
  if (builtin == "example1") {
    int n = get_count(cfg, "n", 4, 4096);
    Example1Options opt;
    opt.eps = get_positive(cfg, "eps", opt.eps);
    opt.kappa0 = get_positive(cfg, "kappa0", opt.kappa0);
    ScenarioResult r = example1(n, get_time(cfg, 0.8), opt);
    r.name = "distance";
    return r;
  }
  if (!builtin.empty()) throw ConfigInvalid("distance builtin must be example1 or example2");
  if (!cfg.contains("u") || !cfg.contains("v")) throw ConfigInvalid("distance needs 'u' and 'v' or a pair builtin");

  ScenarioResult r;
  r.name = "distance";
  const PiecewiseLinearFn u0 = require_fn(parse_input(cfg.at("u"), cfg), "distance");
  const PiecewiseLinearFn v0 = require_fn(parse_input(cfg.at("v"), cfg), "distance");
  double t = get_time(cfg, 0.0);
  PiecewiseLinearFn u = solve(FlowState(u0), t);
  PiecewiseLinearFn v = solve(FlowState(v0), t);
  double eps = get_positive(cfg, "eps", 0.02);
  MetricParams mp(get_positive(cfg, "kappa0", default_params(u0).kappa0));
  TransportOutcome o = j_upper_dp(u, v, eps, mp);
  TransportOutcome back = j_upper_dp(v, u, eps, mp);
  r.scalars["value"] = o.value;
  r.scalars["value_reversed"] = back.value;
  r.scalars["kappa0"] = mp.kappa0;
  r.scalars["discard_all"] = discard_all_cost(o.u_atoms, o.v_atoms, mp);
  r.flags["symmetric_within_slack"] = std::abs(o.value - back.value) <= 2.0 * eps * mp.kappa0 * M_PI;
  r.flags["below_discard_all"] = o.value <= r.scalars["discard_all"] + 1e-12;

  CsvTable matching({"i", "j", "x_u", "x_v", "w_u", "w_v"});
  for (auto [i, j] : o.plan.matched) {
    matching.add_row({static_cast<double>(i), static_cast<double>(j), o.u_atoms.atoms[i].x, o.v_atoms.atoms[j].x,
                      o.u_atoms.atoms[i].w, o.v_atoms.atoms[j].w});
  }
  r.tables.emplace_back("dp_table.csv", dp_sweep(u, v, eps, mp));
  r.tables.emplace_back("matching.csv", std::move(matching));
  return r;
}

PeakonConfig peakon_input(const json& cfg) {
  if (!cfg.contains("input")) return {{-1.0, 1.0}, {0.0, 1.0}};
  Input in = parse_input(cfg.at("input"), cfg);
  if (!in.peakons) throw ConfigInvalid("this experiment needs a peakon input {\"alpha\",\"pos\"}");
  return *in.peakons;
}

ScenarioResult cmd_experiment(const json& cfg) {
  if (!cfg.contains("name") || !cfg.at("name").is_string()) throw ConfigInvalid("experiment needs a 'name'");
  std::string name = cfg.at("name").get<std::string>();
  if (name == "example1") {
    Example1Options opt;
    opt.eps = get_positive(cfg, "eps", opt.eps);
    opt.kappa0 = get_positive(cfg, "kappa0", opt.kappa0);
    return example1(get_count(cfg, "n", 4, 4096), get_time(cfg, 0.8), opt);
  }
  if (name == "example2") {
    int m = get_count(cfg, "m", 1, 4096);
    int n = get_count(cfg, "n", 8, 4096);
    if (m >= n) throw ConfigInvalid("example2 needs m < n");
    return example2(m, n, get_positive(cfg, "eps", 1.0 / (8.0 * n)), MetricParams(get_positive(cfg, "kappa0", 1.0)));
  }
  if (name == "peakon_drift") return peakon_drift(peakon_input(cfg), get_time(cfg, 0.2));
  if (name == "hamiltonian") {
    return hamiltonian_crosscheck(peakon_input(cfg), get_time(cfg, 0.2), get_count(cfg, "steps", 200));
  }
  if (name == "zero_data") return zero_data_suite();
  throw ConfigInvalid("unknown experiment '" + name + "'");
}

}  // namespace

ScenarioResult execute(const nlohmann::json& config) {
  if (!config.is_object()) throw ConfigInvalid("config must be a JSON object");
  if (!config.contains("command") || !config.at("command").is_string()) throw ConfigInvalid("missing 'command'");
  std::string command = config.at("command").get<std::string>();
  ScenarioResult r;
  if (command == "solve") {
    r = cmd_solve(config);
  } else if (command == "energy") {
    r = cmd_energy(config);
  } else if (command == "distance") {
    r = cmd_distance(config);
  } else if (command == "experiment") {
    r = cmd_experiment(config);
  } else {
    throw ConfigInvalid("unknown command '" + command + "'");
  }
  r.params["config"] = config;
  return r;
}

int run(const nlohmann::json& config, const std::filesystem::path& out, std::ostream& log) {
  Verbosity verbosity = verbosity_from_env();
  ScenarioResult r;
  try {
    r = execute(config);
  } catch (const ConfigInvalid& e) {
    log << "config invalid: " << e.what() << '\n';
    return kExitConfigInvalid;
  } catch (const InvalidInput& e) {
    log << "config invalid: " << e.what() << '\n';
    return kExitConfigInvalid;
  } catch (const Error& e) {
    log << "contract failed: " << e.what() << '\n';
    return kExitContractFailed;
  }
  r.write(out);
  if (verbosity == Verbosity::kDebug) {
    for (const auto& [k, v] : r.scalars) log << "  " << k << " = " << format_double(v) << '\n';
  }
  if (verbosity != Verbosity::kQuiet) {
    for (const auto& [k, v] : r.flags) {
      if (!v) log << "  failed: " << k << '\n';
    }
    log << r.name << ": " << (r.passed() ? "ok" : "FAILED") << " (" << r.artifacts.size() + 1 << " files in "
        << out.string() << ")\n";
  }
  return r.passed() ? kExitOk : kExitContractFailed;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Exact dissipative flows on piecewise-linear data"};
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "scenario config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--seed", seed, "seed recorded with the run");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigInvalid;
  }

  json config;
  try {
    std::ifstream is(config_path);
    config = json::parse(is);
  } catch (const json::exception& e) {
    std::cerr << "config invalid: " << e.what() << '\n';
    return kExitConfigInvalid;
  }
  if (seed) {
    if (!config.is_object()) {
      std::cerr << "config invalid: config must be a JSON object\n";
      return kExitConfigInvalid;
    }
    config["seed"] = *seed;
  }
  try {
    return run(config, out_dir, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitContractFailed;
  }
}

}  // namespace hsflow
