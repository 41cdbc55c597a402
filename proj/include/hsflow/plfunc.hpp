#ifndef HSFLOW_PLFUNC_HPP_
#define HSFLOW_PLFUNC_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

namespace hsflow {

/// Continuous piecewise-linear function on the real line with constant tails.
///
/// The function is described by strictly increasing breakpoints x_0 < ... < x_K
/// and the values at those breakpoints. It interpolates linearly in between
/// and is constant to the left of x_0 and to the right of x_K, so its
/// derivative is compactly supported and square integrable. A single
/// breakpoint describes a constant function.
///
/// Instances are immutable after construction.
class PiecewiseLinearFn {
 public:
  static constexpr std::size_t kTail = static_cast<std::size_t>(-1);

  PiecewiseLinearFn(std::vector<double> x, std::vector<double> y);

  static PiecewiseLinearFn constant(double value);

  std::span<const double> breakpoints() const { return x_; }
  std::span<const double> values() const { return y_; }
  std::size_t segment_count() const { return x_.size() - 1; }

  double slope(std::size_t k) const { return (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]); }
  double length(std::size_t k) const { return x_[k + 1] - x_[k]; }

  // Index k of the segment [x_k, x_{k+1}) containing x, or kTail on either tail.
  // Right-continuous: a breakpoint belongs to the segment on its right.
  std::size_t segment_index(double x) const;

  double operator()(double x) const;
  double slope_at(double x) const;

  double left_tail() const { return y_.front(); }
  double right_tail() const { return y_.back(); }
  double sup_norm() const;

  // Merge adjacent collinear segments (relative slope tolerance).
  PiecewiseLinearFn normalized(double tol = 1e-12) const;
  PiecewiseLinearFn shifted(double dx) const;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

/// Integral of the squared derivative, computed exactly segment by segment.
double energy(const PiecewiseLinearFn& f);

double eval(const PiecewiseLinearFn& f, double x);

/// sup_x |f(x) - g(x)|, attained on the union of both breakpoint sets.
double sup_distance(const PiecewiseLinearFn& f, const PiecewiseLinearFn& g);

/// Same breakpoints after normalization, values within `tol`.
bool approx_equal(const PiecewiseLinearFn& f, const PiecewiseLinearFn& g, double tol = 1e-9);

/// u(x) = sum_i alpha_i |x - pos_i| with sum_i alpha_i = 0.
struct PeakonConfig {
  std::vector<double> alpha;
  std::vector<double> pos;
};

PiecewiseLinearFn from_peakons(const PeakonConfig& c);

// sum_i alpha_i pos_i. This is the left tail value of the peakon function;
// the right tail value is its negative.
double peakon_tail_constant(const PeakonConfig& c);

/// Checks |f(x) - f(y)| <= ||f_x||_{L2} sqrt(|x - y|) on every supplied pair.
bool holder_bound_check(const PiecewiseLinearFn& f, std::span<const std::pair<double, double>> pairs);

void to_json(nlohmann::json& j, const PiecewiseLinearFn& f);
void to_json(nlohmann::json& j, const PeakonConfig& c);
void from_json(const nlohmann::json& j, PeakonConfig& c);

}  // namespace hsflow

namespace nlohmann {
// PiecewiseLinearFn has no default constructor.
template <>
struct adl_serializer<hsflow::PiecewiseLinearFn> {
  static hsflow::PiecewiseLinearFn from_json(const json& j);
  static void to_json(json& j, const hsflow::PiecewiseLinearFn& f) { hsflow::to_json(j, f); }
};
}  // namespace nlohmann

#endif  // HSFLOW_PLFUNC_HPP_
