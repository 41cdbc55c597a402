#include "hsflow/energy.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "hsflow/error.hpp"

namespace hsflow {
namespace {

// 3-point Gauss-Legendre on [-1, 1]; exact for polynomials of degree 5.
constexpr std::array<double, 3> kGaussNodes{-0.7745966692414833770, 0.0, 0.7745966692414833770};
constexpr std::array<double, 3> kGaussWeights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

double bump(double r) {
  if (std::abs(r) >= 1.0) return 0.0;
  double q = 1.0 - r * r;
  return q * q;
}

double bump_prime(double r) {
  if (std::abs(r) >= 1.0) return 0.0;
  return -4.0 * r * (1.0 - r * r);
}

// Applies f on each segment of u clipped to [lo, hi]; tails carry no energy.
template <class F>
double integrate_segments(const PiecewiseLinearFn& u, double lo, double hi, F f) {
  auto x = u.breakpoints();
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    double a = std::max(lo, x[k]);
    double b = std::min(hi, x[k + 1]);
    if (!(b > a)) continue;
    double s = u.slope(k);
    double half = 0.5 * (b - a);
    double mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
      double at = mid + half * kGaussNodes[q];
      sum += half * kGaussWeights[q] * f(at, s);
    }
  }
  return sum;
}

double flux_at(const PiecewiseLinearFn& u, const TestFunction& tf, double t) {
  return integrate_segments(u, tf.x_lo(), tf.x_hi(), [&](double x, double s) {
    double e = s * s;
    return e * tf.dt(t, x) + u(x) * e * tf.dx(t, x);
  });
}

double composite_time(const Trajectory& u, const TestFunction& tf, std::span<const double> pieces, int panels) {
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < pieces.size(); ++p) {
    double h = (pieces[p + 1] - pieces[p]) / panels;
    for (int i = 0; i < panels; ++i) {
      double a = pieces[p] + i * h;
      for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
        double t = a + 0.5 * h * (1.0 + kGaussNodes[q]);
        sum += 0.5 * h * kGaussWeights[q] * flux_at(u(t), tf, t);
      }
    }
  }
  return sum;
}

}  // namespace

std::vector<DissipationAtom> dissipation_atoms(const FlowState& st) {
  std::vector<DissipationAtom> atoms;
  auto x = st.initial().breakpoints();
  for (std::size_t k = 0; k < st.segments().size(); ++k) {
    const SegmentInfo& seg = st.segments()[k];
    if (!(seg.slope < 0.0)) continue;
    atoms.push_back({seg.blowup, xi(st, seg.blowup, x[k]), seg.mass, k});
  }
  std::sort(atoms.begin(), atoms.end(), [](const DissipationAtom& a, const DissipationAtom& b) {
    return a.epoch != b.epoch ? a.epoch < b.epoch : a.location < b.location;
  });
  return atoms;
}

EnergyBalance energy_balance(const FlowState& st, double t1, double t2) {
  if (!(t1 >= 0.0) || !(t2 >= t1)) throw InvalidInput("energy balance needs 0 <= t1 <= t2");
  double lhs = energy(solve(st, t1)) - energy(solve(st, t2));
  double rhs = 0.0;
  for (std::size_t k = 0; k < st.segments().size(); ++k) {
    // Died after t1 and no later than t2.
    if (st.alive(k, t1) && !st.alive(k, t2)) rhs += st.segments()[k].mass;
  }
  return {lhs, rhs};
}

double TestFunction::value(double t, double x) const { return bump((t - tc) / rt) * bump((x - xc) / rx); }

double TestFunction::dt(double t, double x) const {
  return bump_prime((t - tc) / rt) / rt * bump((x - xc) / rx);
}

double TestFunction::dx(double t, double x) const {
  return bump((t - tc) / rt) * bump_prime((x - xc) / rx) / rx;
}

double weighted_energy(const PiecewiseLinearFn& u, const TestFunction& tf, double t) {
  return integrate_segments(u, tf.x_lo(), tf.x_hi(), [&](double x, double s) { return s * s * tf.value(t, x); });
}

double weak_flux_integral(const Trajectory& u, const TestFunction& tf, double t1, double t2,
                          std::span<const double> breaks, const QuadratureOptions& opt) {
  double lo = std::max(t1, tf.t_lo());
  double hi = std::min(t2, tf.t_hi());
  if (!(hi > lo)) return 0.0;
  std::vector<double> pieces{lo, hi};
  for (double b : breaks) {
    if (b > lo && b < hi) pieces.push_back(b);
  }
  std::sort(pieces.begin(), pieces.end());

  int panels = opt.initial_panels;
  double prev = composite_time(u, tf, pieces, panels);
  while (panels < opt.max_panels) {
    panels *= 2;
    double cur = composite_time(u, tf, pieces, panels);
    double diff = std::abs(cur - prev);
    if (diff <= 0.1 * opt.tol || diff <= 1e-3 * std::abs(cur)) return cur;
    prev = cur;
  }
  throw QuadratureUnresolved("time quadrature did not stabilize within " + std::to_string(opt.max_panels) +
                             " panels");
}

double dissipation_inequality_check(const FlowState& st, const TestFunction& tf, double t1, double t2,
                                    const QuadratureOptions& opt) {
  if (!(t1 > 0.0) || !(t2 > t1)) throw InvalidInput("dissipation inequality needs 0 < t1 < t2");
  Trajectory traj = [&st](double t) { return solve(st, t); };
  double rhs = weak_flux_integral(traj, tf, t1, t2, st.epochs(), opt);
  double lhs = weighted_energy(solve(st, t2), tf, t2) - weighted_energy(solve(st, t1), tf, t1);
  return rhs - lhs;
}

PiecewiseLinearFn conservative_witness(double t) {
  if (!(t >= 0.0)) throw InvalidInput("witness time must be nonnegative");
  if (t == 0.0) return PiecewiseLinearFn::constant(0.0);
  return {{-t * t, t * t}, {-2.0 * t, 2.0 * t}};
}

WitnessReport conservative_witness_check(const TestFunction& tf, const QuadratureOptions& opt) {
  Trajectory traj = [](double t) { return conservative_witness(t); };
  WitnessReport report{};
  report.identity_residual = std::abs(weak_flux_integral(traj, tf, 0.0, tf.t_hi(), {}, opt));

  // Dissipation inequality started at t1 = 0: the supplied bump and one centred at the origin.
  auto violation = [&](const TestFunction& f) {
    double t2 = f.t_hi();
    double rhs = weak_flux_integral(traj, f, 0.0, t2, {}, opt);
    double lhs = weighted_energy(conservative_witness(t2), f, t2) -
                 weighted_energy(conservative_witness(0.0), f, 0.0);
    return lhs - rhs;
  };
  TestFunction origin{0.0, 0.0, tf.rt, tf.rx};
  report.dissipativity_violation = std::max(violation(origin), tf.t_hi() > 0.0 ? violation(tf) : 0.0);
  report.energy_before = energy(conservative_witness(0.0));
  report.energy_after = energy(conservative_witness(1.0));
  return report;
}

CsvTable atoms_table(std::span<const DissipationAtom> atoms) {
  CsvTable table({"epoch", "location", "mass"});
  for (const DissipationAtom& a : atoms) table.add_row({a.epoch, a.location, a.mass});
  return table;
}

CsvTable balance_table(const FlowState& st, std::span<const double> times) {
  CsvTable table({"t", "energy", "surviving_mass", "dissipated"});
  for (double t : times) {
    double e = energy(solve(st, t));
    table.add_row({t, e, st.surviving_mass(t), st.total_mass() - e});
  }
  return table;
}

}  // namespace hsflow
