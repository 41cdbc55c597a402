#include "hsflow/metric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "hsflow/error.hpp"

namespace hsflow {
namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

// Integral over [0, len] of |a0 + (a1 - a0) s / len|.
double abs_linear_integral(double a0, double a1, double len) {
  if ((a0 >= 0.0) == (a1 >= 0.0)) return 0.5 * len * (std::abs(a0) + std::abs(a1));
  double span = std::abs(a0) + std::abs(a1);
  return 0.5 * len * (a0 * a0 + a1 * a1) / span;
}

EnergyAtom evolve_atom(const FlowState& st, const EnergyAtom& a, double t) {
  double g = gradient_along(st, t, a.x);
  double w = std::isinf(g) ? -kHalfPi : std::atan(g);
  return {xi(st, t, a.x), u_along(st, t, a.x), w, a.mass};
}

bool atom_alive(const FlowState& st, const EnergyAtom& a, double t) { return !std::isinf(gradient_along(st, t, a.x)); }

enum class Step : std::uint8_t { kMatch, kDropU, kDropV };

}  // namespace

MetricParams::MetricParams(double k) : kappa0(k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidInput("kappa0 must be finite and positive");
}

MetricParams default_params(const PiecewiseLinearFn& u) { return MetricParams(std::max(1.0, energy(u))); }

double dist_to_infinity(const PointX& p, const MetricParams& mp) {
  return p.at_infinity ? 0.0 : mp.kappa0 * std::abs(kHalfPi + p.w);
}

double dist_X(const PointX& p, const PointX& q, const MetricParams& mp) {
  double via_infinity = dist_to_infinity(p, mp) + dist_to_infinity(q, mp);
  if (p.at_infinity || q.at_infinity) return via_infinity;
  double direct = std::abs(p.x - q.x) + std::abs(p.u - q.u) + mp.kappa0 * std::abs(p.w - q.w);
  return std::min(direct, via_infinity);
}

EnergyAtomSeq quantize(const PiecewiseLinearFn& u, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput("quantum must be finite and positive");
  EnergyAtomSeq seq;
  seq.quantum = eps;
  seq.total_mass = energy(u);
  if (seq.total_mass <= 0.0) return seq;

  // Cumulative mass at each breakpoint.
  auto x = u.breakpoints();
  std::vector<double> cum(x.size(), 0.0);
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    double s = u.slope(k);
    cum[k + 1] = cum[k] + s * s * u.length(k);
  }
  double total = cum.back();
  // A remainder below 1e-9 eps is folded into the last atom.
  auto count = static_cast<std::size_t>(std::ceil(total / eps - 1e-9));
  count = std::max<std::size_t>(count, 1);
  seq.atoms.reserve(count);
  std::size_t k = 0;
  for (std::size_t j = 0; j < count; ++j) {
    double start = static_cast<double>(j) * eps;
    double mass = j + 1 == count ? total - start : eps;
    double mid = start + 0.5 * mass;
    while (k + 2 < x.size() && cum[k + 1] <= mid) ++k;
    double s = u.slope(k);
    double pos = s == 0.0 ? x[k] : std::clamp(x[k] + (mid - cum[k]) / (s * s), x[k], x[k + 1]);
    seq.atoms.push_back({pos, u(pos), std::atan(u.slope_at(pos)), mass});
  }
  return seq;
}

double match_cost(const EnergyAtom& a, const EnergyAtom& b, const MetricParams& mp) {
  double common = std::min(a.mass, b.mass);
  return common * dist_X(a.point(), b.point(), mp) + (a.mass - common) * dist_to_infinity(a.point(), mp) +
         (b.mass - common) * dist_to_infinity(b.point(), mp);
}

double discard_cost(const EnergyAtom& a, const MetricParams& mp) { return a.mass * dist_to_infinity(a.point(), mp); }

double plan_cost(const EnergyAtomSeq& a, const EnergyAtomSeq& b, const MonotonePlan& plan, const MetricParams& mp) {
  double cost = 0.0;
  for (auto [i, j] : plan.matched) cost += match_cost(a.atoms[i], b.atoms[j], mp);
  for (std::size_t i : plan.discarded_u) cost += discard_cost(a.atoms[i], mp);
  for (std::size_t j : plan.discarded_v) cost += discard_cost(b.atoms[j], mp);
  return cost;
}

double discard_all_cost(const EnergyAtomSeq& a, const EnergyAtomSeq& b, const MetricParams& mp) {
  double cost = 0.0;
  for (const EnergyAtom& e : a.atoms) cost += discard_cost(e, mp);
  for (const EnergyAtom& e : b.atoms) cost += discard_cost(e, mp);
  return cost;
}

TransportOutcome j_upper_dp(const PiecewiseLinearFn& u, const PiecewiseLinearFn& v, double eps,
                            const MetricParams& mp) {
  return j_upper_dp(quantize(u, eps), quantize(v, eps), mp);
}

TransportOutcome j_upper_dp(const EnergyAtomSeq& a, const EnergyAtomSeq& b, const MetricParams& mp) {
  const std::size_t n = a.atoms.size();
  const std::size_t m = b.atoms.size();
  const std::size_t w = m + 1;
  std::vector<double> cost((n + 1) * w, 0.0);
  std::vector<Step> step((n + 1) * w, Step::kMatch);

  for (std::size_t i = 1; i <= n; ++i) {
    cost[i * w] = cost[(i - 1) * w] + discard_cost(a.atoms[i - 1], mp);
    step[i * w] = Step::kDropU;
  }
  for (std::size_t j = 1; j <= m; ++j) {
    cost[j] = cost[j - 1] + discard_cost(b.atoms[j - 1], mp);
    step[j] = Step::kDropV;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      double match = cost[(i - 1) * w + j - 1] + match_cost(a.atoms[i - 1], b.atoms[j - 1], mp);
      double drop_u = cost[(i - 1) * w + j] + discard_cost(a.atoms[i - 1], mp);
      double drop_v = cost[i * w + j - 1] + discard_cost(b.atoms[j - 1], mp);
      double best = match;
      Step s = Step::kMatch;
      if (drop_u < best) {
        best = drop_u;
        s = Step::kDropU;
      }
      if (drop_v < best) {
        best = drop_v;
        s = Step::kDropV;
      }
      cost[i * w + j] = best;
      step[i * w + j] = s;
    }
  }

  TransportOutcome out;
  out.value = cost[n * w + m];
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    switch (step[i * w + j]) {
      case Step::kMatch:
        out.plan.matched.emplace_back(i - 1, j - 1);
        --i;
        --j;
        break;
      case Step::kDropU:
        out.plan.discarded_u.push_back(--i);
        break;
      case Step::kDropV:
        out.plan.discarded_v.push_back(--j);
        break;
    }
  }
  std::reverse(out.plan.matched.begin(), out.plan.matched.end());
  std::reverse(out.plan.discarded_u.begin(), out.plan.discarded_u.end());
  std::reverse(out.plan.discarded_v.begin(), out.plan.discarded_v.end());
  out.u_atoms = a;
  out.v_atoms = b;
  return out;
}

double assignment_cost(const EnergyAtomSeq& a, const EnergyAtomSeq& b, const MetricParams& mp) {
  // Square problem of size n + m: real atoms of one side are paired either
  // with a real atom of the other side or with their own dummy (infinity).
  const std::size_t n = a.atoms.size();
  const std::size_t m = b.atoms.size();
  const std::size_t size = n + m;
  if (size == 0) return 0.0;
  const double big = 1e18;
  auto c = [&](std::size_t r, std::size_t col) -> double {
    if (r < n && col < m) return match_cost(a.atoms[r], b.atoms[col], mp);
    if (r < n) return col - m == r ? discard_cost(a.atoms[r], mp) : big;
    if (col < m) return r - n == col ? discard_cost(b.atoms[col], mp) : big;
    return 0.0;
  };

  // Hungarian method with potentials, 1-based, O(size^3).
  std::vector<double> pu(size + 1, 0.0), pv(size + 1, 0.0), minv(size + 1);
  std::vector<std::size_t> match(size + 1, 0), way(size + 1, 0);
  std::vector<char> used(size + 1);
  for (std::size_t r = 1; r <= size; ++r) {
    match[0] = r;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), std::numeric_limits<double>::infinity());
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      std::size_t i0 = match[j0];
      std::size_t j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (std::size_t j = 1; j <= size; ++j) {
        if (used[j]) continue;
        double cur = c(i0 - 1, j - 1) - pu[i0] - pv[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= size; ++j) {
        if (used[j]) {
          pu[match[j]] += delta;
          pv[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= size; ++j) total += c(match[j] - 1, j - 1);
  return total;
}

TimeShiftCost plan_cost_time_shift(const FlowState& st, double t, const MetricParams& mp) {
  if (!(t >= 0.0)) throw InvalidInput("time must be nonnegative");
  TimeShiftCost out;
  const PiecewiseLinearFn& u0 = st.initial();
  auto x = u0.breakpoints();
  for (std::size_t k = 0; k < st.segments().size(); ++k) {
    const SegmentInfo& seg = st.segments()[k];
    if (seg.mass == 0.0) continue;
    double density = seg.slope * seg.slope;
    if (!st.alive(k, t)) {
      out.cost += mp.kappa0 * std::abs(kHalfPi + std::atan(seg.slope)) * seg.mass;
      continue;
    }
    // Displacement and value change are affine in x on the segment.
    double d0 = x[k] - xi(st, t, x[k]);
    double d1 = x[k + 1] - xi(st, t, x[k + 1]);
    double v0 = u0(x[k]) - u_along(st, t, x[k]);
    double v1 = u0(x[k + 1]) - u_along(st, t, x[k + 1]);
    double angle = std::abs(std::atan(seg.slope) - std::atan(2.0 * seg.slope / (2.0 + t * seg.slope)));
    out.max_angle_increment = std::max(out.max_angle_increment, angle);
    out.cost += density * (abs_linear_integral(d0, d1, seg.length) + abs_linear_integral(v0, v1, seg.length)) +
                mp.kappa0 * angle * seg.mass;
  }
  const double c = 1.0;
  double e = st.total_mass();
  out.bound = (std::numbers::pi * t / 4.0 + (c + mp.kappa0) / 2.0 + u0.sup_norm() + (t + 2.0) / 8.0 * e) * t * e;
  return out;
}

double evolved_plan_cost(const FlowState& st_u, const FlowState& st_v, const TransportOutcome& base, double t,
                         const MetricParams& mp) {
  const auto& ua = base.u_atoms.atoms;
  const auto& va = base.v_atoms.atoms;
  double cost = 0.0;
  for (auto [i, j] : base.plan.matched) {
    EnergyAtom p = evolve_atom(st_u, ua[i], t);
    EnergyAtom q = evolve_atom(st_v, va[j], t);
    if (atom_alive(st_u, ua[i], t) && atom_alive(st_v, va[j], t)) {
      cost += match_cost(p, q, mp);
    } else {
      cost += discard_cost(p, mp) + discard_cost(q, mp);
    }
  }
  for (std::size_t i : base.plan.discarded_u) cost += discard_cost(evolve_atom(st_u, ua[i], t), mp);
  for (std::size_t j : base.plan.discarded_v) cost += discard_cost(evolve_atom(st_v, va[j], t), mp);
  return cost;
}

bool AxiomReport::passed() const {
  return max_self <= 1e-12 && max_symmetry_violation <= slack && max_triangle_violation <= slack;
}

AxiomReport metric_axioms_suite(std::span<const PiecewiseLinearFn> us, double eps, const MetricParams& mp) {
  if (us.size() < 3) throw InvalidInput("metric axioms need at least three functions");
  AxiomReport r;
  r.eps = eps;
  r.slack = 2.0 * eps * mp.kappa0 * std::numbers::pi;
  std::vector<EnergyAtomSeq> atoms;
  atoms.reserve(us.size());
  for (const auto& u : us) atoms.push_back(quantize(u, eps));
  const std::size_t n = us.size();
  r.values.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) r.values[i][j] = j_upper_dp(atoms[i], atoms[j], mp).value;
  }
  for (std::size_t i = 0; i < n; ++i) {
    r.max_self = std::max(r.max_self, std::abs(r.values[i][i]));
    for (std::size_t j = 0; j < n; ++j) {
      r.max_symmetry_violation = std::max(r.max_symmetry_violation, std::abs(r.values[i][j] - r.values[j][i]));
      for (std::size_t k = 0; k < n; ++k) {
        double excess = r.values[i][k] - r.values[i][j] - r.values[j][k];
        r.max_triangle_violation = std::max(r.max_triangle_violation, excess);
      }
    }
  }
  return r;
}

void to_json(nlohmann::json& j, const AxiomReport& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t a = 0; a < r.values.size(); ++a) {
    for (std::size_t b = 0; b < r.values.size(); ++b) pairs.push_back({{"i", a}, {"j", b}, {"value", r.values[a][b]}});
  }
  j = nlohmann::json{{"eps", r.eps},
                     {"pairs", pairs},
                     {"values", r.values},
                     {"slacks", {{"symmetry", r.slack}, {"triangle", r.slack}}},
                     {"bounds",
                      {{"max_self", r.max_self},
                       {"max_symmetry_violation", r.max_symmetry_violation},
                       {"max_triangle_violation", r.max_triangle_violation}}},
                     {"passed", r.passed()}};
}

CsvTable atoms_table(const EnergyAtomSeq& seq) {
  CsvTable table({"x", "u", "w", "mass"});
  for (const EnergyAtom& a : seq.atoms) table.add_row({a.x, a.u, a.w, a.mass});
  return table;
}

}  // namespace hsflow
