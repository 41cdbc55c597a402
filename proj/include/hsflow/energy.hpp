#ifndef HSFLOW_ENERGY_HPP_
#define HSFLOW_ENERGY_HPP_

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "hsflow/csv.hpp"
#include "hsflow/flow.hpp"

namespace hsflow {

/// Point mass of the dissipation measure: the energy of one segment removed at
/// its blow-up time, located where the segment collapses.
struct DissipationAtom {
  double epoch;
  double location;
  double mass;
  std::size_t segment;
};

/// One atom per negatively sloped segment, ordered by (epoch, location).
std::vector<DissipationAtom> dissipation_atoms(const FlowState& st);

struct EnergyBalance {
  double lhs;  // energy(solve(t1)) - energy(solve(t2))
  double rhs;  // mass of atoms with epoch in (t1, t2]
};

EnergyBalance energy_balance(const FlowState& st, double t1, double t2);

/// Product of C^1 bumps (1 - r^2)^2 in t and x, supported in
/// [tc - rt, tc + rt] x [xc - rx, xc + rx].
struct TestFunction {
  double tc;
  double xc;
  double rt;
  double rx;

  double t_lo() const { return tc - rt; }
  double t_hi() const { return tc + rt; }
  double x_lo() const { return xc - rx; }
  double x_hi() const { return xc + rx; }

  double value(double t, double x) const;
  double dt(double t, double x) const;
  double dx(double t, double x) const;
};

/// Quadrature settings for the weak-form identities.
struct QuadratureOptions {
  double tol = 1e-3;
  int initial_panels = 4;
  int max_panels = 1 << 12;
};

/// A time-dependent piecewise-linear field u(t, .).
using Trajectory = std::function<PiecewiseLinearFn(double)>;

/// int u_x^2(t, x) phi(t, x) dx, exact for piecewise-linear u.
double weighted_energy(const PiecewiseLinearFn& u, const TestFunction& tf, double t);

/// int_{t1}^{t2} int (u_x^2 phi_t + u u_x^2 phi_x) dx dt by composite Gauss
/// quadrature in time (split at `breaks`) and exact Gauss rules in space.
/// Throws QuadratureUnresolved if successive refinements do not agree.
double weak_flux_integral(const Trajectory& u, const TestFunction& tf, double t1, double t2,
                          std::span<const double> breaks, const QuadratureOptions& opt = {});

/// RHS - LHS of the local energy dissipation inequality on [t1, t2], 0 < t1 < t2.
double dissipation_inequality_check(const FlowState& st, const TestFunction& tf, double t1, double t2,
                                    const QuadratureOptions& opt = {});

/// The energy-conserving solution emanating from zero data:
/// -2t left of -t^2, 2x/t on |x| < t^2, 2t right of t^2.
PiecewiseLinearFn conservative_witness(double t);

struct WitnessReport {
  double identity_residual;         // |weak conservation integral| for tf (support in t > 0)
  double dissipativity_violation;   // LHS - RHS of the dissipation inequality from t1 = 0
  double energy_before;             // energy at t = 0
  double energy_after;              // energy at any t > 0
};

WitnessReport conservative_witness_check(const TestFunction& tf, const QuadratureOptions& opt = {});

CsvTable atoms_table(std::span<const DissipationAtom> atoms);
CsvTable balance_table(const FlowState& st, std::span<const double> times);

}  // namespace hsflow

#endif  // HSFLOW_ENERGY_HPP_
