#ifndef HSFLOW_FLOW_HPP_
#define HSFLOW_FLOW_HPP_

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "hsflow/plfunc.hpp"

namespace hsflow {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// A segment with 2 + t*slope <= kSurvivalTie at time t is treated as dead.
inline constexpr double kSurvivalTie = 1e-12;

/// Time at which the gradient along a characteristic with initial slope `slope`
/// reaches -infinity; +infinity for nonnegative slopes.
double blowup_time(double slope);

/// Strict survivor test: 2 + t*slope > kSurvivalTie. Everything survives at t = 0.
bool survives(double slope, double t);

struct SegmentInfo {
  double slope;
  double length;
  double mass;     // slope^2 * length
  double blowup;   // blowup_time(slope)
};

/// Initial datum together with the per-segment table that drives the
/// closed-form dissipative flow.
class FlowState {
 public:
  explicit FlowState(PiecewiseLinearFn initial);

  const PiecewiseLinearFn& initial() const { return initial_; }
  std::span<const SegmentInfo> segments() const { return segments_; }
  // Sorted distinct finite blow-up times.
  std::span<const double> epochs() const { return epochs_; }

  bool alive(std::size_t k, double t) const { return survives(segments_[k].slope, t); }
  double total_mass() const { return total_mass_; }
  // Sum of the masses of the segments still alive at time t.
  double surviving_mass(double t) const;

 private:
  PiecewiseLinearFn initial_;
  std::vector<SegmentInfo> segments_;
  std::vector<double> epochs_;
  double total_mass_ = 0.0;
};

/// Derivative of the solution along the characteristic from y: 2s/(2 + t s) for a
/// surviving segment, -infinity once the segment has blown up.
double gradient_along(const FlowState& st, double t, double y);

/// One quarter of (surviving mass left of y) - (surviving mass right of y).
double phi(const FlowState& st, double t, double y);

/// Characteristic position xi(t, y).
double xi(const FlowState& st, double t, double y);

/// Solution value u(t, xi(t, y)).
double u_along(const FlowState& st, double t, double y);

/// The nondecreasing map y -> xi(t, y). Shares the breakpoints of the initial
/// datum and has slope 1 on both tails.
struct CharacteristicMap {
  double t = 0.0;
  std::vector<double> y;
  std::vector<double> image;
  std::vector<double> derivative;  // per segment: (2 + t s)^2 / 4, or 0 if dead

  double operator()(double at) const;
};

CharacteristicMap characteristic_map(const FlowState& st, double t);

/// u(t, .) as a piecewise-linear function. Segments that have blown up are
/// collapsed to a point and removed.
PiecewiseLinearFn solve(const FlowState& st, double t);

struct SemigroupDiscrepancy {
  double sup = 0.0;
  double energy = 0.0;
  double max() const { return sup > energy ? sup : energy; }
};

/// Compares S_{s+t} u0 against S_t(S_s u0).
SemigroupDiscrepancy semigroup_check(const FlowState& st, double s, double t);

}  // namespace hsflow

#endif  // HSFLOW_FLOW_HPP_
