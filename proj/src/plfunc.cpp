#include "hsflow/plfunc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hsflow/error.hpp"

namespace hsflow {

PiecewiseLinearFn::PiecewiseLinearFn(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.empty() || x_.size() != y_.size()) {
    throw InvalidInput("piecewise-linear function needs matching, non-empty x and y");
  }
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) {
      throw InvalidInput("piecewise-linear function has non-finite data");
    }
    if (i > 0 && !(x_[i] > x_[i - 1])) {
      throw InvalidInput("breakpoints must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
}

PiecewiseLinearFn PiecewiseLinearFn::constant(double value) { return {{0.0}, {value}}; }

std::size_t PiecewiseLinearFn::segment_index(double x) const {
  if (x < x_.front() || x >= x_.back()) return kTail;
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double PiecewiseLinearFn::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  std::size_t k = segment_index(x);
  double lambda = (x - x_[k]) / (x_[k + 1] - x_[k]);
  return y_[k] + lambda * (y_[k + 1] - y_[k]);
}

double PiecewiseLinearFn::slope_at(double x) const {
  std::size_t k = segment_index(x);
  return k == kTail ? 0.0 : slope(k);
}

double PiecewiseLinearFn::sup_norm() const {
  double m = 0.0;
  for (double v : y_) m = std::max(m, std::abs(v));
  return m;
}

PiecewiseLinearFn PiecewiseLinearFn::normalized(double tol) const {
  std::vector<double> x{x_.front()};
  std::vector<double> y{y_.front()};
  for (std::size_t i = 1; i + 1 < x_.size(); ++i) {
    double left = (y_[i] - y.back()) / (x_[i] - x.back());
    double right = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    double scale = std::max({1.0, std::abs(left), std::abs(right)});
    if (std::abs(left - right) <= tol * scale) continue;
    x.push_back(x_[i]);
    y.push_back(y_[i]);
  }
  if (x_.size() > 1) {
    x.push_back(x_.back());
    y.push_back(y_.back());
  }
  // Flat end segments are indistinguishable from the tails.
  while (x.size() > 1 && std::abs(y[1] - y[0]) <= tol * std::max(1.0, std::abs(y[0]))) {
    x.erase(x.begin());
    y.erase(y.begin());
  }
  while (x.size() > 1 && std::abs(y[y.size() - 1] - y[y.size() - 2]) <= tol * std::max(1.0, std::abs(y.back()))) {
    x.pop_back();
    y.pop_back();
  }
  return {std::move(x), std::move(y)};
}

PiecewiseLinearFn PiecewiseLinearFn::shifted(double dx) const {
  std::vector<double> x = x_;
  for (double& v : x) v += dx;
  return {std::move(x), y_};
}

double energy(const PiecewiseLinearFn& f) {
  double sum = 0.0;
  auto x = f.breakpoints();
  auto y = f.values();
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    double du = y[k + 1] - y[k];
    sum += du * du / (x[k + 1] - x[k]);
  }
  return sum;
}

double eval(const PiecewiseLinearFn& f, double x) { return f(x); }

double sup_distance(const PiecewiseLinearFn& f, const PiecewiseLinearFn& g) {
  double d = 0.0;
  for (double x : f.breakpoints()) d = std::max(d, std::abs(f(x) - g(x)));
  for (double x : g.breakpoints()) d = std::max(d, std::abs(f(x) - g(x)));
  return d;
}

bool approx_equal(const PiecewiseLinearFn& f, const PiecewiseLinearFn& g, double tol) {
  PiecewiseLinearFn a = f.normalized();
  PiecewiseLinearFn b = g.normalized();
  if (a.breakpoints().size() != b.breakpoints().size()) return false;
  for (std::size_t i = 0; i < a.breakpoints().size(); ++i) {
    if (std::abs(a.breakpoints()[i] - b.breakpoints()[i]) > tol) return false;
    if (std::abs(a.values()[i] - b.values()[i]) > tol) return false;
  }
  return true;
}

PiecewiseLinearFn from_peakons(const PeakonConfig& c) {
  if (c.alpha.size() != c.pos.size() || c.alpha.empty()) {
    throw InvalidInput("peakon config needs matching, non-empty alpha and pos");
  }
  double sum = std::accumulate(c.alpha.begin(), c.alpha.end(), 0.0);
  double scale = 0.0;
  for (double a : c.alpha) scale += std::abs(a);
  if (std::abs(sum) > 1e-12 * std::max(1.0, scale)) {
    throw ConstraintViolated("peakon amplitudes sum to " + std::to_string(sum) + ", expected 0");
  }
  std::vector<double> x = c.pos;
  std::sort(x.begin(), x.end());
  if (std::adjacent_find(x.begin(), x.end()) != x.end()) {
    throw InvalidInput("peakon positions must be distinct");
  }
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < c.alpha.size(); ++j) y[i] += c.alpha[j] * std::abs(x[i] - c.pos[j]);
  }
  return {std::move(x), std::move(y)};
}

double peakon_tail_constant(const PeakonConfig& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.alpha.size(); ++i) s += c.alpha[i] * c.pos[i];
  return s;
}

bool holder_bound_check(const PiecewiseLinearFn& f, std::span<const std::pair<double, double>> pairs) {
  double k = std::sqrt(energy(f));
  for (auto [x, y] : pairs) {
    double lhs = std::abs(f(x) - f(y));
    double rhs = k * std::sqrt(std::abs(x - y));
    // Rounding slack proportional to the values involved.
    double slack = 1e-12 * std::max({1.0, std::abs(f(x)), std::abs(f(y))});
    if (lhs > rhs + slack) return false;
  }
  return true;
}

void to_json(nlohmann::json& j, const PiecewiseLinearFn& f) {
  j = nlohmann::json{{"x", std::vector<double>(f.breakpoints().begin(), f.breakpoints().end())},
                     {"y", std::vector<double>(f.values().begin(), f.values().end())}};
}

void to_json(nlohmann::json& j, const PeakonConfig& c) { j = nlohmann::json{{"alpha", c.alpha}, {"pos", c.pos}}; }

void from_json(const nlohmann::json& j, PeakonConfig& c) {
  j.at("alpha").get_to(c.alpha);
  j.at("pos").get_to(c.pos);
}

}  // namespace hsflow

hsflow::PiecewiseLinearFn nlohmann::adl_serializer<hsflow::PiecewiseLinearFn>::from_json(const json& j) {
  return {j.at("x").get<std::vector<double>>(), j.at("y").get<std::vector<double>>()};
}
