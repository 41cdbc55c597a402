#include "hsflow/flow.hpp"

#include <algorithm>
#include <cmath>

#include "hsflow/error.hpp"

namespace hsflow {
namespace {

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("time must be finite and nonnegative");
}

// Time up to which segment k contributes to phi, clipped at t.
double active_until(const SegmentInfo& seg, double t) { return survives(seg.slope, t) ? t : seg.blowup; }

// Signed mass of segment k seen from y: +m if the segment lies left of y,
// -m if it lies right of y, linear split if y is inside.
double signed_mass(const FlowState& st, std::size_t k, std::size_t seg_of_y, double y) {
  const SegmentInfo& seg = st.segments()[k];
  if (seg_of_y == PiecewiseLinearFn::kTail) {
    return y < st.initial().breakpoints().front() ? -seg.mass : seg.mass;
  }
  if (k < seg_of_y) return seg.mass;
  if (k > seg_of_y) return -seg.mass;
  double xl = st.initial().breakpoints()[k];
  double xr = st.initial().breakpoints()[k + 1];
  return seg.slope * seg.slope * ((y - xl) - (xr - y));
}

// Sum over segments of signed_mass * weight(active time).
template <class Weight>
double weighted_sum(const FlowState& st, double t, double y, Weight weight) {
  std::size_t j = st.initial().segment_index(y);
  double sum = 0.0;
  for (std::size_t k = 0; k < st.segments().size(); ++k) {
    sum += signed_mass(st, k, j, y) * weight(active_until(st.segments()[k], t));
  }
  return sum;
}

}  // namespace

double blowup_time(double slope) { return slope < 0.0 ? -2.0 / slope : kInfinity; }

bool survives(double slope, double t) { return t == 0.0 || 2.0 + t * slope > kSurvivalTie; }

FlowState::FlowState(PiecewiseLinearFn initial) : initial_(std::move(initial)) {
  segments_.reserve(initial_.segment_count());
  for (std::size_t k = 0; k < initial_.segment_count(); ++k) {
    double s = initial_.slope(k);
    double len = initial_.length(k);
    segments_.push_back({s, len, s * s * len, blowup_time(s)});
    total_mass_ += s * s * len;
    if (s < 0.0) epochs_.push_back(blowup_time(s));
  }
  std::sort(epochs_.begin(), epochs_.end());
  epochs_.erase(std::unique(epochs_.begin(), epochs_.end()), epochs_.end());
}

double FlowState::surviving_mass(double t) const {
  double m = 0.0;
  for (const SegmentInfo& seg : segments_) {
    if (survives(seg.slope, t)) m += seg.mass;
  }
  return m;
}

double gradient_along(const FlowState& st, double t, double y) {
  check_time(t);
  std::size_t k = st.initial().segment_index(y);
  if (k == PiecewiseLinearFn::kTail) return 0.0;
  double s = st.segments()[k].slope;
  if (!survives(s, t)) return -kInfinity;
  return 2.0 * s / (2.0 + t * s);
}

double phi(const FlowState& st, double t, double y) {
  check_time(t);
  std::size_t j = st.initial().segment_index(y);
  double sum = 0.0;
  for (std::size_t k = 0; k < st.segments().size(); ++k) {
    if (st.alive(k, t)) sum += signed_mass(st, k, j, y);
  }
  return 0.25 * sum;
}

double xi(const FlowState& st, double t, double y) {
  check_time(t);
  // int_0^t (t - s) phi(s, y) ds, phi piecewise constant between blow-ups.
  double drift = weighted_sum(st, t, y, [t](double tau) { return t * tau - 0.5 * tau * tau; });
  return y + t * st.initial()(y) + 0.25 * drift;
}

double u_along(const FlowState& st, double t, double y) {
  check_time(t);
  double drift = weighted_sum(st, t, y, [](double tau) { return tau; });
  return st.initial()(y) + 0.25 * drift;
}

double CharacteristicMap::operator()(double at) const {
  if (at <= y.front()) return image.front() + (at - y.front());
  if (at >= y.back()) return image.back() + (at - y.back());
  auto it = std::upper_bound(y.begin(), y.end(), at);
  std::size_t k = static_cast<std::size_t>(it - y.begin()) - 1;
  return image[k] + derivative[k] * (at - y[k]);
}

CharacteristicMap characteristic_map(const FlowState& st, double t) {
  check_time(t);
  CharacteristicMap map;
  map.t = t;
  auto x = st.initial().breakpoints();
  map.y.assign(x.begin(), x.end());
  map.image.reserve(x.size());
  map.image.push_back(xi(st, t, x.front()));
  for (std::size_t k = 0; k < st.segments().size(); ++k) {
    const SegmentInfo& seg = st.segments()[k];
    double d = 0.0;
    if (survives(seg.slope, t)) {
      double g = 2.0 + t * seg.slope;
      d = 0.25 * g * g;
    }
    map.derivative.push_back(d);
    map.image.push_back(map.image.back() + d * seg.length);
  }
  return map;
}

PiecewiseLinearFn solve(const FlowState& st, double t) {
  check_time(t);
  if (t == 0.0) return st.initial();
  auto x = st.initial().breakpoints();
  std::vector<double> bx{xi(st, t, x.front())};
  std::vector<double> by{u_along(st, t, x.front())};
  for (const SegmentInfo& seg : st.segments()) {
    if (!survives(seg.slope, t)) continue;
    // Survivor: length l (1 + t s / 2)^2, rise s l (1 + t s / 2).
    double stretch = 1.0 + 0.5 * t * seg.slope;
    double next = bx.back() + seg.length * stretch * stretch;
    // A survivor squeezed below the floating-point spacing is dropped like a dead one.
    if (!(next > bx.back())) continue;
    // The rise is fitted to the stored run so the segment keeps its mass exactly;
    // near blow-up the run is short and its rounding would otherwise dominate.
    double run = next - bx.back();
    bx.push_back(next);
    by.push_back(by.back() + std::copysign(std::sqrt(seg.mass * run), seg.slope));
  }
  return {std::move(bx), std::move(by)};
}

SemigroupDiscrepancy semigroup_check(const FlowState& st, double s, double t) {
  check_time(s);
  check_time(t);
  PiecewiseLinearFn direct = solve(st, s + t);
  PiecewiseLinearFn composed = solve(FlowState(solve(st, s)), t);
  return {sup_distance(direct, composed), std::abs(energy(direct) - energy(composed))};
}

}  // namespace hsflow
