#pragma once

// Demand solvers: maximize u over the budget set B(p), producing the optimal
// value v(p) and a representation of the maximizer set D(p). Closed forms
// cover Cobb-Douglas, linear, and 1-D piecewise-linear models; projected
// gradient handles declared-concave smooth models; a grid enumerator (n <= 3)
// is the independent brute-force oracle and the only solver that detects
// multi-valued demand.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pricegrad/budget.hpp"
#include "pricegrad/errors.hpp"
#include "pricegrad/utility.hpp"
#include "pricegrad/vec.hpp"

namespace pricegrad {

enum class DemandMethod { closed_form, projected_gradient, grid };

enum class MaximizerKind { Points, Interval1D };

struct DemandResult {
  MaximizerKind kind = MaximizerKind::Points;
  std::vector<Bundle> points;     // Points
  double lo = 0.0, hi = 0.0;      // Interval1D (1-D models); hi may be +inf
  double value = 0.0;
  DemandMethod method = DemandMethod::closed_form;
  double residual = 0.0;

  // canonical single maximizer, used where any demand point will do
  Bundle representative() const {
    if (kind == MaximizerKind::Points) {
      if (points.empty()) throw SolverError("DemandResult: no maximizer recorded");
      return points.front();
    }
    return {std::isinf(hi) ? lo : hi};
  }
};

namespace detail {

inline void require_interior_price(const PriceVector& p, const char* where) {
  for (double pi : p)
    if (!(pi > 0)) throw std::invalid_argument(std::string(where) + ": boundary price");
}

// Maximize a continuous piecewise-linear function over [0, cap] (cap = +inf
// allowed) by inspecting segment endpoints; ties across a whole segment mean
// the argmax is an interval.
inline DemandResult pwl_maximize(const UtilityModel& u, double cap) {
  std::vector<double> cand;
  cand.push_back(0.0);
  for (double b : u.breakpoints)
    if (b > 0.0 && b < cap) cand.push_back(b);
  bool unbounded_side = std::isinf(cap);
  if (!unbounded_side) cand.push_back(cap);
  std::sort(cand.begin(), cand.end());

  double tail_slope = u.slopes.back();
  if (unbounded_side && tail_slope > 0)
    throw SolverError("demand_closed_form: utility unbounded over the free budget");

  double vmax = -kInf;
  for (double c : cand) vmax = std::max(vmax, detail::pwl_value(u, c));
  // an eventually flat tail competes at the level of the last breakpoint
  double tail_level = -kInf;
  if (unbounded_side && tail_slope == 0.0) {
    tail_level = u.break_values.back();
    vmax = std::max(vmax, tail_level);
  }

  const double tie = 1e-12 * (1.0 + std::abs(vmax));
  std::vector<std::pair<double, double>> runs;  // closed maximizer intervals
  for (std::size_t k = 0; k < cand.size(); ++k) {
    if (detail::pwl_value(u, cand[k]) < vmax - tie) continue;
    double lo = cand[k], hi = cand[k];
    while (k + 1 < cand.size() && detail::pwl_value(u, cand[k + 1]) >= vmax - tie) {
      // both endpoints at the max level: the whole segment is flat at vmax
      hi = cand[++k];
    }
    runs.push_back({lo, hi});
  }
  if (unbounded_side && tail_level >= vmax - tie) {
    double b_last = u.breakpoints.back();
    if (!runs.empty() && runs.back().second >= b_last - tie)
      runs.back().second = kInf;
    else
      runs.push_back({std::max(b_last, 0.0), kInf});
  }
  if (runs.empty()) throw SolverError("demand_closed_form: empty maximizer set");

  DemandResult r;
  r.value = vmax;
  r.method = DemandMethod::closed_form;
  r.residual = 0.0;
  if (runs.size() == 1 && runs[0].second > runs[0].first) {
    r.kind = MaximizerKind::Interval1D;
    r.lo = runs[0].first;
    r.hi = runs[0].second;
  } else {
    r.kind = MaximizerKind::Points;
    for (const auto& run : runs) {
      r.points.push_back({run.first});
      if (run.second > run.first && !std::isinf(run.second)) r.points.push_back({run.second});
    }
  }
  return r;
}

}  // namespace detail

inline DemandResult demand_closed_form(const UtilityModel& u, const PriceVector& p) {
  require_dim(p, u.dim, "demand_closed_form");
  switch (u.kind) {
    case UtilityKind::CobbDouglas: {
      detail::require_interior_price(p, "demand_closed_form");
      double total = 0.0;
      for (double a : u.exponents) total += a;
      Bundle x(u.dim);
      for (std::size_t i = 0; i < u.dim; ++i) x[i] = (u.exponents[i] / total) / p[i];
      DemandResult r;
      r.kind = MaximizerKind::Points;
      r.points = {x};
      r.value = utility_value(u, x);
      r.method = DemandMethod::closed_form;
      return r;
    }
    case UtilityKind::Linear: {
      detail::require_interior_price(p, "demand_closed_form");
      // spend everything on a best-rate good: rates c_i / p_i
      double best = 0.0;
      for (std::size_t i = 0; i < u.dim; ++i) best = std::max(best, u.coeffs[i] / p[i]);
      DemandResult r;
      r.kind = MaximizerKind::Points;
      r.method = DemandMethod::closed_form;
      if (best <= 0.0) {  // satiated: constant zero utility, keep the origin
        r.points = {zeros(u.dim)};
        r.value = 0.0;
        return r;
      }
      for (std::size_t i = 0; i < u.dim; ++i) {
        if (u.coeffs[i] / p[i] >= best * (1.0 - 1e-12)) {
          Bundle x = zeros(u.dim);
          x[i] = 1.0 / p[i];
          r.points.push_back(std::move(x));
        }
      }
      r.value = best;
      return r;
    }
    case UtilityKind::PiecewiseLinear1D: {
      if (p[0] < 0) throw std::invalid_argument("demand_closed_form: negative price");
      double cap = p[0] > 0 ? 1.0 / p[0] : kInf;
      return detail::pwl_maximize(u, cap);
    }
    case UtilityKind::CustomSmooth:
      throw std::invalid_argument("demand_closed_form: no closed form for custom models");
  }
  throw std::logic_error("demand_closed_form: bad kind");
}

struct PgConfig {
  int max_iters = 5000;
  // NOTE: the Armijo test compares utility values, so residuals below
  // sqrt(machine eps) drown in rounding noise; 1e-7 is the honest floor.
  double tol = 1e-7;        // fixed-point residual |x - proj(x + grad)|
  double armijo = 1e-4;
  double min_step = 1e-18;
};

inline DemandResult demand_projected_gradient(const UtilityModel& u, const PriceVector& p,
                                              const PgConfig& cfg = {}) {
  require_dim(p, u.dim, "demand_projected_gradient");
  detail::require_interior_price(p, "demand_projected_gradient");
  if (!u.concave)
    throw std::invalid_argument("demand_projected_gradient: model must be declared concave");

  const std::size_t n = u.dim;
  Bundle x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 0.5 / (static_cast<double>(n) * p[i]);

  double residual = kInf;
  for (int it = 0; it < cfg.max_iters; ++it) {
    Vec g = utility_gradient(u, x);
    Bundle full = project_onto_budget(p, add_scaled(x, 1.0, g));
    residual = norm_inf(sub(x, full));
    if (residual <= cfg.tol) break;

    double ux = utility_value(u, x);
    double t = 1.0;
    bool moved = false;
    while (t >= cfg.min_step) {
      Bundle y = t == 1.0 ? full : project_onto_budget(p, add_scaled(x, t, g));
      double decrease = dot(g, sub(y, x));
      if (utility_value(u, y) >= ux + cfg.armijo * decrease && decrease > 0) {
        x = std::move(y);
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;  // no admissible ascent step: stationary to line-search resolution
  }

  if (residual > cfg.tol) {
    Vec g = utility_gradient(u, x);
    residual = norm_inf(sub(x, project_onto_budget(p, add_scaled(x, 1.0, g))));
    if (residual > cfg.tol)
      throw SolverError("demand_projected_gradient: no convergence within max_iters (residual " +
                        std::to_string(residual) + ")");
  }

  DemandResult r;
  r.kind = MaximizerKind::Points;
  r.points = {x};
  r.value = utility_value(u, x);
  r.method = DemandMethod::projected_gradient;
  r.residual = residual;
  return r;
}

// Brute-force oracle: enumerate an axis-aligned grid over B(p) and keep every
// point within value_tol_rel*(1+|vmax|) of the grid maximum. In one dimension
// adjacent maximizers merge into an interval. box_hi bounds the 1-D search
// when p = 0 leaves the budget unbounded.
inline DemandResult demand_grid(const UtilityModel& u, const PriceVector& p, double step,
                                double value_tol_rel = 1e-9, double box_hi = 0.0) {
  require_dim(p, u.dim, "demand_grid");
  const std::size_t n = u.dim;
  if (n > 3) throw std::invalid_argument("demand_grid: supported only for n <= 3");
  if (!(step > 0)) throw std::invalid_argument("demand_grid: step must be positive");

  bool free_budget = false;
  for (double pi : p) {
    if (pi < 0) throw std::invalid_argument("demand_grid: negative price");
    if (pi == 0.0) free_budget = true;
  }
  if (free_budget && !(n == 1 && box_hi > 0))
    throw std::invalid_argument("demand_grid: zero price needs a 1-D explicit box");

  // per-axis grids 0, step, 2*step, ..., ending exactly at the axis cap
  std::vector<std::vector<double>> axes(n);
  double count = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double cap = free_budget ? box_hi : 1.0 / p[i];
    count *= cap / step + 2.0;
    if (count > 2e7) throw SolverError("demand_grid: grid too large");
    auto& axis = axes[i];
    for (double t = 0.0; t <= cap * (1.0 + 1e-12); t += step) axis.push_back(t);
    if (axis.back() < cap - 1e-15 * (1.0 + cap)) axis.push_back(cap);
  }

  std::vector<std::size_t> shape(n), idx(n, 0);
  for (std::size_t i = 0; i < n; ++i) shape[i] = axes[i].size();

  double vmax = -kInf;
  auto feasible = [&](const Bundle& x) { return dot(p, x) <= 1.0 + 1e-12 || free_budget; };
  Bundle x(n);
  auto for_each_point = [&](auto&& body) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      for (std::size_t i = 0; i < n; ++i) x[i] = axes[i][idx[i]];
      if (feasible(x)) body(x);
      std::size_t k = 0;
      while (k < n && ++idx[k] == shape[k]) idx[k++] = 0;
      if (k == n) break;
    }
  };

  for_each_point([&](const Bundle& pt) { vmax = std::max(vmax, utility_value(u, pt)); });
  if (!std::isfinite(vmax)) throw SolverError("demand_grid: no feasible grid point");

  const double keep = vmax - value_tol_rel * (1.0 + std::abs(vmax));
  DemandResult r;
  r.value = vmax;
  r.method = DemandMethod::grid;
  r.residual = step;

  if (n == 1) {
    std::vector<double> hits;
    for (double t : axes[0])
      if ((p[0] * t <= 1.0 + 1e-12 || free_budget) && utility_value(u, {t}) >= keep)
        hits.push_back(t);
    // merge runs of adjacent grid hits
    std::vector<std::pair<double, double>> runs;
    for (std::size_t k = 0; k < hits.size(); ++k) {
      double lo = hits[k], hi = hits[k];
      while (k + 1 < hits.size() && hits[k + 1] - hits[k] <= step * (1.0 + 1e-9)) hi = hits[++k];
      runs.push_back({lo, hi});
    }
    if (runs.size() == 1 && runs[0].second > runs[0].first) {
      r.kind = MaximizerKind::Interval1D;
      r.lo = runs[0].first;
      r.hi = runs[0].second;
    } else {
      r.kind = MaximizerKind::Points;
      for (const auto& run : runs) {
        r.points.push_back({run.first});
        if (run.second > run.first) r.points.push_back({run.second});
      }
    }
    return r;
  }

  r.kind = MaximizerKind::Points;
  for_each_point([&](const Bundle& pt) {
    if (utility_value(u, pt) >= keep && r.points.size() < 4096) r.points.push_back(pt);
  });
  return r;
}

struct SolveConfig {
  PgConfig pg;
  double grid_step = 1e-3;
  double grid_value_tol = 1e-9;
};

// Dispatch to the best solver for the model kind.
inline DemandResult solve_demand(const UtilityModel& u, const PriceVector& p,
                                 const SolveConfig& cfg = {}) {
  switch (u.kind) {
    case UtilityKind::CobbDouglas:
    case UtilityKind::Linear:
    case UtilityKind::PiecewiseLinear1D:
      return demand_closed_form(u, p);
    case UtilityKind::CustomSmooth:
      if (u.concave) return demand_projected_gradient(u, p, cfg.pg);
      if (u.dim <= 3) return demand_grid(u, p, cfg.grid_step, cfg.grid_value_tol);
      throw SolverError("solve_demand: no solver for non-concave custom models with n > 3");
  }
  throw std::logic_error("solve_demand: bad kind");
}

inline double indirect_utility(const UtilityModel& u, const PriceVector& p,
                               const SolveConfig& cfg = {}) {
  return solve_demand(u, p, cfg).value;
}

struct SaturationViolation {
  PriceVector price;
  Bundle bundle;
  double budget_value = 0.0;  // <p, x> at the offending maximizer
};

struct SaturationReport {
  std::size_t prices_checked = 0;
  std::size_t points_checked = 0;
  std::vector<SaturationViolation> violations;

  bool passed() const { return violations.empty(); }
};

// Budget-saturation scan: every demand point of a non-satiated model should
// exhaust the budget. Interval-valued demand is probed at its endpoints and
// midpoint, where a saturation failure must show up first.
inline SaturationReport check_budget_saturation(
    const UtilityModel& u, const std::vector<PriceVector>& price_samples,
    const std::function<DemandResult(const PriceVector&)>& demand_oracle, double tol) {
  SaturationReport rep;
  for (const auto& p : price_samples) {
    require_dim(p, u.dim, "check_budget_saturation");
    DemandResult d = demand_oracle(p);
    std::vector<Bundle> probes;
    if (d.kind == MaximizerKind::Points) {
      probes = d.points;
    } else {
      probes.push_back({d.lo});
      double hi = std::isinf(d.hi) ? d.lo + 1.0 : d.hi;
      probes.push_back({hi});
      probes.push_back({0.5 * (d.lo + hi)});
    }
    for (const auto& x : probes) {
      ++rep.points_checked;
      double s = dot(p, x);
      if (std::abs(s - 1.0) > tol) rep.violations.push_back({p, x, s});
    }
    ++rep.prices_checked;
  }
  return rep;
}

}  // namespace pricegrad
