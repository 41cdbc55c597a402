#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "hsflow/error.hpp"
#include "hsflow/experiments.hpp"
#include "hsflow/metric.hpp"
#include "oracles.hpp"

using hsflow::EnergyAtomSeq;
using hsflow::FlowState;
using hsflow::MetricParams;
using hsflow::PiecewiseLinearFn;
using hsflow::PointX;

namespace {
constexpr double kPi = std::numbers::pi;

PointX random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-3.0, 3.0);
  std::uniform_real_distribution<double> w(-kPi / 2, kPi / 2);
  return {c(rng), c(rng), w(rng), false};
}
}  // namespace

TEST_CASE("metric params validate kappa0") {
  CHECK_THROWS_AS(MetricParams(0.0), hsflow::InvalidInput);
  CHECK_THROWS_AS(MetricParams(-1.0), hsflow::InvalidInput);
  CHECK_THROWS_AS(MetricParams{INFINITY}, hsflow::InvalidInput);
  CHECK(hsflow::default_params(hsflow::hat()).kappa0 == 2.0);
  CHECK(hsflow::default_params(PiecewiseLinearFn({0.0, 1.0}, {0.0, 0.5})).kappa0 == 1.0);
}

TEST_CASE("distance on the compactified space") {
  MetricParams mp(1.0);
  PointX p{0.0, 0.0, kPi / 4, false};
  CHECK(hsflow::dist_X(p, p, mp) == 0.0);
  CHECK(hsflow::dist_X(p, PointX::infinity(), mp) == doctest::Approx(3 * kPi / 4));
  CHECK(hsflow::dist_X(PointX::infinity(), PointX::infinity(), mp) == 0.0);

  PointX a{0.0, 0.0, -kPi / 2 + 1e-6, false};
  PointX b{5.0, 9.0, -kPi / 2 + 1e-6, false};
  CHECK(hsflow::dist_X(a, b, mp) == doctest::Approx(2e-6).epsilon(1e-6));

  // Points with angle -pi/2 are identified with infinity.
  PointX q{3.0, -1.0, -kPi / 2, false};
  CHECK(hsflow::dist_X(q, PointX::infinity(), mp) == 0.0);
}

TEST_CASE("distance axioms on random points") {
  std::mt19937_64 rng(7);
  MetricParams mp(2.5);
  for (int trial = 0; trial < 2000; ++trial) {
    PointX p = random_point(rng);
    PointX q = random_point(rng);
    PointX r = random_point(rng);
    if (trial % 7 == 0) r = PointX::infinity();
    CHECK(hsflow::dist_X(p, q, mp) == hsflow::dist_X(q, p, mp));
    CHECK(hsflow::dist_X(p, r, mp) <= hsflow::dist_X(p, q, mp) + hsflow::dist_X(q, r, mp) + 1e-12);
    CHECK(hsflow::dist_X(p, q, mp) <= 2 * mp.kappa0 * kPi);
    CHECK(hsflow::dist_X(p, q, mp) >= 0.0);
  }
}

TEST_CASE("quantize") {
  CHECK(hsflow::quantize(PiecewiseLinearFn::constant(1.0), 0.1).atoms.empty());
  CHECK_THROWS_AS(hsflow::quantize(hsflow::hat(), 0.0), hsflow::InvalidInput);

  EnergyAtomSeq h = hsflow::quantize(hsflow::hat(), 0.5);
  REQUIRE(h.atoms.size() == 4);
  const double xs[] = {-0.75, -0.25, 0.25, 0.75};
  for (int i = 0; i < 4; ++i) {
    CHECK(h.atoms[i].x == doctest::Approx(xs[i]));
    CHECK(h.atoms[i].w == doctest::Approx(i < 2 ? kPi / 4 : -kPi / 4));
    CHECK(h.atoms[i].mass == doctest::Approx(0.5));
    CHECK(h.atoms[i].u == doctest::Approx(1.0 - std::abs(xs[i])));
  }

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ed(0.01, 0.5);
  for (int trial = 0; trial < 30; ++trial) {
    PiecewiseLinearFn u = oracle::random_pl(rng);
    double eps = ed(rng);
    EnergyAtomSeq seq = hsflow::quantize(u, eps);
    double total = 0.0;
    for (std::size_t i = 0; i < seq.atoms.size(); ++i) {
      total += seq.atoms[i].mass;
      if (i + 1 < seq.atoms.size()) {
        CHECK(seq.atoms[i].mass == doctest::Approx(eps));
        CHECK(seq.atoms[i].x <= seq.atoms[i + 1].x);
      }
      CHECK(seq.atoms[i].mass > 0.0);
    }
    CHECK(total == doctest::Approx(hsflow::energy(u)).epsilon(1e-12));
  }
}

TEST_CASE("monotone DP basics") {
  MetricParams mp(1.0);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    PiecewiseLinearFn u = oracle::random_pl(rng, 20);
    PiecewiseLinearFn v = oracle::random_pl(rng, 20);
    CHECK(hsflow::j_upper_dp(u, u, 0.05, mp).value == 0.0);
    auto o = hsflow::j_upper_dp(u, v, 0.05, mp);
    auto back = hsflow::j_upper_dp(v, u, 0.05, mp);
    CHECK(std::abs(o.value - back.value) <= 2 * 0.05 * mp.kappa0 * kPi);
    CHECK(o.value <= hsflow::discard_all_cost(o.u_atoms, o.v_atoms, mp) + 1e-12);
    CHECK(hsflow::plan_cost(o.u_atoms, o.v_atoms, o.plan, mp) == doctest::Approx(o.value));
    // Plan is monotone and covers every atom once.
    for (std::size_t k = 1; k < o.plan.matched.size(); ++k) {
      CHECK(o.plan.matched[k].first > o.plan.matched[k - 1].first);
      CHECK(o.plan.matched[k].second > o.plan.matched[k - 1].second);
    }
    CHECK(o.plan.matched.size() + o.plan.discarded_u.size() == o.u_atoms.atoms.size());
    CHECK(o.plan.matched.size() + o.plan.discarded_v.size() == o.v_atoms.atoms.size());
    // The unconstrained assignment never costs more.
    CHECK(hsflow::assignment_cost(o.u_atoms, o.v_atoms, mp) <= o.value + 1e-9);
  }
}

TEST_CASE("DP matches brute force on tiny sequences") {
  // Enumerate every monotone plan on up to 4 x 4 atoms.
  MetricParams mp(1.3);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  std::uniform_real_distribution<double> w(-1.5, 1.5);
  for (int trial = 0; trial < 30; ++trial) {
    EnergyAtomSeq a;
    EnergyAtomSeq b;
    for (int i = 0; i < 4; ++i) a.atoms.push_back({c(rng), c(rng), w(rng), 0.25});
    for (int i = 0; i < 3; ++i) b.atoms.push_back({c(rng), c(rng), w(rng), 0.25});
    std::function<double(std::size_t, std::size_t)> best = [&](std::size_t i, std::size_t j) -> double {
      if (i == a.atoms.size() && j == b.atoms.size()) return 0.0;
      double r = INFINITY;
      if (i < a.atoms.size()) r = std::min(r, hsflow::discard_cost(a.atoms[i], mp) + best(i + 1, j));
      if (j < b.atoms.size()) r = std::min(r, hsflow::discard_cost(b.atoms[j], mp) + best(i, j + 1));
      if (i < a.atoms.size() && j < b.atoms.size()) {
        r = std::min(r, hsflow::match_cost(a.atoms[i], b.atoms[j], mp) + best(i + 1, j + 1));
      }
      return r;
    };
    CHECK(hsflow::j_upper_dp(a, b, mp).value == doctest::Approx(best(0, 0)));
  }
}

TEST_CASE("assignment solves the unconstrained problem") {
  // Crossed pairs: the monotone plan pays for discards, the assignment crosses.
  MetricParams mp(1.0);
  EnergyAtomSeq a;
  EnergyAtomSeq b;
  a.atoms = {{0.0, 0.0, 0.0, 1.0}, {1.0, 5.0, 0.0, 1.0}};
  b.atoms = {{0.0, 5.0, 0.0, 1.0}, {1.0, 0.0, 0.0, 1.0}};
  CHECK(hsflow::assignment_cost(a, b, mp) == doctest::Approx(2.0));
  CHECK(hsflow::j_upper_dp(a, b, mp).value == doctest::Approx(1.0 + kPi));
  EnergyAtomSeq empty;
  CHECK(hsflow::assignment_cost(empty, empty, mp) == 0.0);
}

TEST_CASE("translation costs distance times mass") {
  MetricParams mp(1.0);
  for (double d : {0.1, 0.3, 0.5}) {
    double value = hsflow::j_upper_dp(hsflow::hat(), hsflow::hat().shifted(d), 0.01, mp).value;
    CHECK(value == doctest::Approx(2.0 * d).epsilon(1e-9));
  }
  std::vector<PiecewiseLinearFn> fs{hsflow::hat(), hsflow::hat().shifted(1.0), hsflow::hat().shifted(2.0)};
  // A large angular weight makes matching cheaper than discarding, so shifts compose.
  auto r = hsflow::metric_axioms_suite(fs, 0.05, MetricParams(3.0));
  CHECK(r.passed());
  CHECK(r.values[0][2] == doctest::Approx(r.values[0][1] + r.values[1][2]).epsilon(1e-9));
}

TEST_CASE("metric axioms suite report") {
  std::vector<PiecewiseLinearFn> two{hsflow::hat(), hsflow::hat()};
  CHECK_THROWS_AS(hsflow::metric_axioms_suite(two, 0.1, MetricParams(1.0)), hsflow::InvalidInput);

  std::mt19937_64 rng(12);
  std::vector<PiecewiseLinearFn> fs;
  for (int i = 0; i < 4; ++i) fs.push_back(oracle::random_pl(rng, 10));
  auto r = hsflow::metric_axioms_suite(fs, 0.05, MetricParams(2.0));
  CHECK(r.max_self == 0.0);
  CHECK(r.slack == doctest::Approx(2 * 0.05 * 2.0 * kPi));
  CHECK(r.passed());
  nlohmann::json j = r;
  CHECK(j["pairs"].size() == 16);
  CHECK(j["passed"] == true);
  CHECK(j.contains("slacks"));
  CHECK(j.contains("bounds"));
}

TEST_CASE("DP refinement in eps") {
  std::mt19937_64 rng(13);
  MetricParams mp(1.5);
  for (int trial = 0; trial < 8; ++trial) {
    PiecewiseLinearFn u = oracle::random_pl(rng, 15);
    PiecewiseLinearFn v = oracle::random_pl(rng, 15);
    double eps = 0.1;
    double coarse = hsflow::j_upper_dp(u, v, eps, mp).value;
    double fine = hsflow::j_upper_dp(u, v, eps / 2, mp).value;
    CHECK(fine <= coarse + 2 * eps * mp.kappa0 * kPi);
  }
}

TEST_CASE("time-shift plan") {
  FlowState h(hsflow::hat());
  MetricParams mp(2.0);
  CHECK(hsflow::plan_cost_time_shift(h, 0.0, mp).cost == 0.0);
  auto c1 = hsflow::plan_cost_time_shift(h, 1.0, mp);
  CHECK(c1.cost < c1.bound);
  CHECK(c1.max_angle_increment <= 0.5 + 1e-15);

  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    FlowState st(oracle::random_pl(rng));
    MetricParams p = hsflow::default_params(st.initial());
    for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
      auto c = hsflow::plan_cost_time_shift(st, t, p);
      CHECK(c.cost <= c.bound);
      CHECK(c.max_angle_increment <= t / 2 + 1e-12);
    }
  }
}

TEST_CASE("time-shift plan cost agrees with sampled integration") {
  // Midpoint sampling of the transport integrand over the initial support.
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 5; ++trial) {
    PiecewiseLinearFn u0 = oracle::random_pl(rng, 6);
    FlowState st(u0);
    MetricParams mp(1.7);
    double t = 0.9;
    PiecewiseLinearFn ut = hsflow::solve(st, t);
    auto b = u0.breakpoints();
    const int n = 200000;
    double h = (b.back() - b.front()) / n;
    double sampled = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = b.front() + (i + 0.5) * h;
      double s = u0.slope_at(x);
      double mass = s * s * h;
      if (2.0 + t * s > 1e-12) {
        double y = hsflow::xi(st, t, x);
        double direct = std::abs(x - y) + std::abs(u0(x) - ut(y)) +
                        mp.kappa0 * std::abs(std::atan(s) - std::atan(2 * s / (2 + t * s)));
        sampled += direct * mass;
      } else {
        sampled += mp.kappa0 * std::abs(kPi / 2 + std::atan(s)) * mass;
      }
    }
    CHECK(hsflow::plan_cost_time_shift(st, t, mp).cost == doctest::Approx(sampled).epsilon(1e-4));
  }
}

TEST_CASE("evolved plan") {
  MetricParams mp(2.0);
  FlowState h(hsflow::hat());
  auto self = hsflow::j_upper_dp(hsflow::hat(), hsflow::hat(), 0.1, mp);
  for (double t : {0.0, 0.5, 1.0, 3.0}) CHECK(hsflow::evolved_plan_cost(h, h, self, t, mp) == 0.0);

  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 5; ++trial) {
    PiecewiseLinearFn u = oracle::random_pl(rng, 10);
    PiecewiseLinearFn v = oracle::random_pl(rng, 10);
    auto base = hsflow::j_upper_dp(u, v, 0.05, mp);
    CHECK(hsflow::evolved_plan_cost(FlowState(u), FlowState(v), base, 0.0, mp) == doctest::Approx(base.value));
  }
}

TEST_CASE("atoms table") {
  auto table = hsflow::atoms_table(hsflow::quantize(hsflow::hat(), 1.0));
  CHECK(table.row_count() == 2);
}
