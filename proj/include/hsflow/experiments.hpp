#ifndef HSFLOW_EXPERIMENTS_HPP_
#define HSFLOW_EXPERIMENTS_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hsflow/csv.hpp"
#include "hsflow/metric.hpp"
#include "hsflow/plfunc.hpp"
#include "json.hpp"

namespace hsflow {

/// Named outputs of one scripted scenario. Maps keep the JSON key order stable.
struct ScenarioResult {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  std::map<std::string, double> scalars;
  std::map<std::string, bool> flags;
  std::vector<std::pair<std::string, CsvTable>> tables;  // file name -> table
  std::vector<std::string> artifacts;                    // paths written by write()

  bool passed() const;
  nlohmann::json to_json() const;
  // Writes result.json plus one CSV per table into `dir`.
  void write(const std::filesystem::path& dir);
};

// Builtin data.
PiecewiseLinearFn hat();                      // 1 - |x| on [-1, 1]
PiecewiseLinearFn example1_f();               // on [0, 1]
PiecewiseLinearFn example1_g();               // on [0, 1]
PiecewiseLinearFn example1_u(int n);          // hat with f-cells on [0, 1]
PiecewiseLinearFn example1_v(int n);          // hat with g-cells on [0, 1]
PiecewiseLinearFn example2_sawtooth(int m);   // slopes +-1 on m teeth in [0, 1]

/// Integral of u_x^2 over (-inf, x].
double cumulative_energy(const PiecewiseLinearFn& u, double x);

struct Example1Options {
  double eps = 0.02;
  double kappa0 = 3.0;
};

ScenarioResult example1(int n, double t, const Example1Options& opt = {});

struct Example2Options {
  bool contrast = true;
  std::size_t assignment_cap = 200;
};

ScenarioResult example2(int m, int n, double eps, const MetricParams& mp, const Example2Options& opt = {});

ScenarioResult peakon_drift(const PeakonConfig& c, double t);

/// State of the finite-dimensional peakon system.
struct PeakonState {
  std::vector<double> pos;
  std::vector<double> alpha;
};

double peakon_hamiltonian(const PeakonState& s);

/// Classical RK4 for x_i' = dH/dalpha_i, alpha_i' = -dH/dx_i.
/// Throws CollisionDetected if two positions cross.
PeakonState integrate_peakons(const PeakonConfig& c, double t, int steps);

ScenarioResult hamiltonian_crosscheck(const PeakonConfig& c, double t, int steps);

/// Least-squares slope of log(error) against log(step) for the RK4 route
/// using steps * 2^k, k = 0..levels-1.
double hamiltonian_order(const PeakonConfig& c, double t, int coarse_steps, int levels);

ScenarioResult zero_data_suite();

}  // namespace hsflow

#endif  // HSFLOW_EXPERIMENTS_HPP_
