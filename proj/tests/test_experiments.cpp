#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "hsflow/error.hpp"
#include "hsflow/experiments.hpp"
#include "hsflow/flow.hpp"
#include "oracles.hpp"

using hsflow::PiecewiseLinearFn;

TEST_CASE("example 1 data") {
  PiecewiseLinearFn f = hsflow::example1_f();
  PiecewiseLinearFn g = hsflow::example1_g();
  CHECK(f(0.25) == doctest::Approx(0.5));
  CHECK(f(0.75) == 0.0);
  CHECK(g(1.0 / 6.0) == doctest::Approx(0.5));
  CHECK(g(0.4) == doctest::Approx(0.5));
  CHECK(g(0.75) == doctest::Approx(0.25));

  PiecewiseLinearFn u = hsflow::example1_u(4);
  PiecewiseLinearFn v = hsflow::example1_v(4);
  // u_n(x) = h(k/n) + f(n x - k + 1) / n on the k-th cell.
  for (int k = 1; k <= 4; ++k) {
    for (double s : {0.1, 0.5, 0.9}) {
      double x = (k - 1 + s) / 4.0;
      double h = 1.0 - k / 4.0;
      CHECK(u(x) == doctest::Approx(h + f(s) / 4.0));
      CHECK(v(x) == doctest::Approx(h + g(s) / 4.0));
    }
  }
  CHECK(u(-0.5) == doctest::Approx(0.5));
  CHECK(u(2.0) == 0.0);
}

TEST_CASE("example 1 scenario") {
  for (int n : {4, 16}) {
    hsflow::ScenarioResult r = hsflow::example1(n, 0.8);
    CHECK(r.passed());
    CHECK(r.scalars["sup_diff"] <= 2.0 / n);
    CHECK(r.scalars["energy_u_t"] == doctest::Approx(3.0));
    CHECK(r.scalars["energy_v_t"] == doctest::Approx(1.5));
    CHECK(r.scalars["dp_distance"] > 0.1);
    CHECK(r.scalars["first_blowup_v"] == doctest::Approx(2.0 / 3.0));
    CHECK(r.scalars["first_blowup_u"] == doctest::Approx(1.0));
    CHECK(r.flags.count("dp_distance_gt_0.1") == 1);
  }
  // Before any blow-up the two solutions are close in energy and in sup norm.
  hsflow::ScenarioResult early = hsflow::example1(16, 0.3);
  CHECK(early.passed());
  CHECK(early.scalars["energy_v_t"] == doctest::Approx(3.0));
  CHECK(early.flags.count("dp_distance_gt_0.1") == 0);
}

TEST_CASE("cumulative energy") {
  PiecewiseLinearFn h = hsflow::hat();
  CHECK(hsflow::cumulative_energy(h, -2.0) == 0.0);
  CHECK(hsflow::cumulative_energy(h, -0.5) == doctest::Approx(0.5));
  CHECK(hsflow::cumulative_energy(h, 5.0) == doctest::Approx(2.0));
}

TEST_CASE("example 2 scenario") {
  PiecewiseLinearFn saw = hsflow::example2_sawtooth(3);
  CHECK(hsflow::energy(saw) == doctest::Approx(1.0));
  CHECK(saw(1.0 / 6.0) == doctest::Approx(1.0 / 6.0));
  CHECK(saw(1.0 / 3.0) == doctest::Approx(0.0));
  for (std::size_t k = 0; k < saw.segment_count(); ++k) CHECK(std::abs(saw.slope(k)) == doctest::Approx(1.0));

  hsflow::ScenarioResult r = hsflow::example2(1, 8, 1.0 / 64.0, hsflow::MetricParams(1.0));
  CHECK(r.passed());
  CHECK(r.scalars["lower_bound"] == doctest::Approx(7.0 / 64.0));
  CHECK(r.scalars["dp_value"] >= 7.0 / 64.0);

  hsflow::ScenarioResult c = hsflow::example2(4, 8, 1.0 / 64.0, hsflow::MetricParams(1.0));
  CHECK(c.scalars["assignment_value"] < c.scalars["dp_value"]);
  CHECK_THROWS_AS(hsflow::example2(8, 8, 0.01, hsflow::MetricParams(1.0)), hsflow::InvalidInput);

  // Many atoms: the contrast runs on a coarser quantum.
  hsflow::ScenarioResult big = hsflow::example2(2, 16, 1.0 / 512.0, hsflow::MetricParams(1.0));
  CHECK(big.scalars["assignment_eps"] > 1.0 / 512.0);
  CHECK(big.passed());
}

TEST_CASE("peakon drift") {
  hsflow::PeakonConfig pair{{-1.0, 1.0}, {0.0, 1.0}};
  hsflow::ScenarioResult r = hsflow::peakon_drift(pair, 0.4);
  CHECK(r.passed());
  CHECK(r.scalars["tail_constant"] == doctest::Approx(1.0));
  CHECK(r.scalars["left_tail_0"] == doctest::Approx(1.0));
  CHECK(r.scalars["drift"] == doctest::Approx(0.25 * 4.0 * 0.4));
  CHECK(r.scalars["matches_quarter_energy"] == 1.0);
  CHECK(r.scalars["matches_quarter_I"] == 0.0);
  CHECK_THROWS_AS(hsflow::peakon_drift(pair, 1.0), hsflow::BlowupBeforeT);

  hsflow::PeakonConfig sym{{0.5, -0.5}, {-1.0, 1.0}};
  hsflow::ScenarioResult s = hsflow::peakon_drift(sym, 2.0);
  CHECK(s.passed());
  CHECK(s.scalars["drift"] == doctest::Approx(0.25 * 2.0 * 2.0));

  hsflow::ScenarioResult zero = hsflow::peakon_drift({{0.0, 0.0}, {0.0, 1.0}}, 1.0);
  CHECK(zero.scalars["drift"] == 0.0);
}

TEST_CASE("peakon ODE") {
  hsflow::PeakonConfig pair{{-1.0, 1.0}, {0.0, 1.0}};
  hsflow::PeakonState s0{pair.pos, pair.alpha};
  // For this pair H = -|x2 - x1| and it equals -energy / 4.
  CHECK(hsflow::peakon_hamiltonian(s0) == doctest::Approx(-1.0));

  hsflow::ScenarioResult r = hsflow::hamiltonian_crosscheck(pair, 0.2, 200);
  CHECK(r.passed());
  CHECK(r.scalars["sup_discrepancy"] <= 1e-6);
  CHECK(r.scalars["hamiltonian_drift"] <= 1e-9);
  CHECK(std::abs(r.scalars["alpha_sum"]) <= 1e-12);

  // Amplitudes of a pair follow a / (1 + a t).
  hsflow::PeakonState st = hsflow::integrate_peakons({{1.0, -1.0}, {0.0, 1.0}}, 0.5, 500);
  CHECK(st.alpha[0] == doctest::Approx(1.0 / 1.5).epsilon(1e-9));

  double order = hsflow::hamiltonian_order(pair, 0.2, 1, 4);
  CHECK(order >= 3.5);
  CHECK(order <= 4.5);

  CHECK_THROWS_AS(hsflow::hamiltonian_crosscheck(pair, 1.5, 100), hsflow::BlowupBeforeT);
  CHECK_THROWS_AS(hsflow::integrate_peakons(pair, 1.5, 30), hsflow::CollisionDetected);
}

TEST_CASE("zero data") {
  hsflow::ScenarioResult r = hsflow::zero_data_suite();
  CHECK(r.passed());
  CHECK(r.scalars["dissipative_sup"] == 0.0);
  CHECK(r.scalars["energy_after"] == doctest::Approx(8.0));
  CHECK(r.scalars["witness_slope_t1"] == doctest::Approx(2.0));
}

TEST_CASE("scenario output") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "hsflow_scenario_test";
  fs::remove_all(dir);
  hsflow::ScenarioResult r = hsflow::zero_data_suite();
  r.write(dir);
  CHECK(fs::exists(dir / "result.json"));
  CHECK(fs::exists(dir / "energy_curve.csv"));
  std::ifstream is(dir / "result.json");
  nlohmann::json j = nlohmann::json::parse(is);
  CHECK(j["name"] == "zero_data");
  CHECK(j["passed"] == true);
  CHECK(j["artifacts"].size() == 1);
  fs::remove_all(dir);
}
