#ifndef HSFLOW_METRIC_HPP_
#define HSFLOW_METRIC_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "hsflow/csv.hpp"
#include "hsflow/flow.hpp"
#include "hsflow/plfunc.hpp"
#include "json.hpp"

namespace hsflow {

struct MetricParams {
  double kappa0 = 1.0;  // weight of the angular coordinate

  explicit MetricParams(double k = 1.0);
};

/// Default weight: max(1, energy(u)).
MetricParams default_params(const PiecewiseLinearFn& u);

/// A point of R^2 x (-pi/2, pi/2] or the identified point at infinity
/// (all points with angle -pi/2).
struct PointX {
  double x = 0.0;
  double u = 0.0;
  double w = 0.0;
  bool at_infinity = false;

  static PointX infinity() { return {0.0, 0.0, 0.0, true}; }
};

/// Distance to the point at infinity: kappa0 |pi/2 + w|.
double dist_to_infinity(const PointX& p, const MetricParams& mp);

/// min(|x - x'| + |u - u'| + kappa0 |w - w'|, route through infinity).
double dist_X(const PointX& p, const PointX& q, const MetricParams& mp);

struct EnergyAtom {
  double x;     // mass midpoint
  double u;     // function value there
  double w;     // arctan of the slope there
  double mass;

  PointX point() const { return {x, u, w, false}; }
};

/// Quantized energy measure: atoms of mass `quantum`, the last one possibly lighter.
struct EnergyAtomSeq {
  std::vector<EnergyAtom> atoms;
  double quantum = 0.0;
  double total_mass = 0.0;
};

EnergyAtomSeq quantize(const PiecewiseLinearFn& u, double eps);

/// Monotone matching between two atom sequences; unmatched atoms go to infinity.
struct MonotonePlan {
  std::vector<std::pair<std::size_t, std::size_t>> matched;
  std::vector<std::size_t> discarded_u;
  std::vector<std::size_t> discarded_v;
};

struct TransportOutcome {
  double value = 0.0;
  EnergyAtomSeq u_atoms;
  EnergyAtomSeq v_atoms;
  MonotonePlan plan;
};

// Cost of sending min(m_a, m_b) from a to b, the excess of either side to infinity.
double match_cost(const EnergyAtom& a, const EnergyAtom& b, const MetricParams& mp);
double discard_cost(const EnergyAtom& a, const MetricParams& mp);

/// Cost of an explicit plan between two atom sequences.
double plan_cost(const EnergyAtomSeq& a, const EnergyAtomSeq& b, const MonotonePlan& plan, const MetricParams& mp);

/// Cost of sending everything on both sides to infinity.
double discard_all_cost(const EnergyAtomSeq& a, const EnergyAtomSeq& b, const MetricParams& mp);

/// Optimal monotone alignment of the quantized energy measures of u and v.
/// An upper-bound surrogate for the transport distance J(u, v).
TransportOutcome j_upper_dp(const PiecewiseLinearFn& u, const PiecewiseLinearFn& v, double eps,
                            const MetricParams& mp);
TransportOutcome j_upper_dp(const EnergyAtomSeq& a, const EnergyAtomSeq& b, const MetricParams& mp);

/// Optimal assignment without the monotonicity constraint (Hungarian method).
/// This is a Kantorovich-type value and never exceeds the monotone optimum.
double assignment_cost(const EnergyAtomSeq& a, const EnergyAtomSeq& b, const MetricParams& mp);

/// Cost of the plan that follows characteristics from u0 to u(t) and sends the
/// segments that blew up before t to infinity, against the a priori bound
///   (pi t / 4 + (c + kappa0) / 2 + ||u0||_inf + (t + 2) / 8 E) t E,  c = 1, E = ||u0_x||^2.
struct TimeShiftCost {
  double cost = 0.0;
  double bound = 0.0;
  double max_angle_increment = 0.0;  // over surviving segments; never above t / 2
};

TimeShiftCost plan_cost_time_shift(const FlowState& st, double t, const MetricParams& mp);

/// Pushes every atom of a base plan along its characteristic and prices the
/// resulting plan at time t. Pairs where either side blew up go to infinity.
double evolved_plan_cost(const FlowState& st_u, const FlowState& st_v, const TransportOutcome& base, double t,
                         const MetricParams& mp);

struct AxiomReport {
  double eps = 0.0;
  double slack = 0.0;                  // 2 eps kappa0 pi
  std::vector<std::vector<double>> values;  // values[i][j] = DP(u_i, u_j)
  double max_self = 0.0;
  double max_symmetry_violation = 0.0;
  double max_triangle_violation = 0.0;

  bool passed() const;
};

AxiomReport metric_axioms_suite(std::span<const PiecewiseLinearFn> us, double eps, const MetricParams& mp);

void to_json(nlohmann::json& j, const AxiomReport& r);

CsvTable atoms_table(const EnergyAtomSeq& seq);

}  // namespace hsflow

#endif  // HSFLOW_METRIC_HPP_
