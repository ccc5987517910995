#pragma once

// Budget-set geometry and the coderivative of the budget map
//
//   B(p) = { x >= 0 : <p, x> <= 1 }        (income normalized to 1)
//
// At an interior price and a nonzero bundle the coderivative value is a ray
// segment { lambda * x : lambda in L } on the demand ray, where L solves the
// per-coordinate system  x*_i + lambda * p_i  (= 0 on inactive coordinates,
// >= 0 on active ones), intersected with lambda >= 0. Slack budgets collapse
// the value to {0} or Empty depending on normal-cone membership of -x*.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pricegrad/cone.hpp"
#include "pricegrad/errors.hpp"
#include "pricegrad/sets.hpp"
#include "pricegrad/vec.hpp"

namespace pricegrad {

struct BudgetProblem {
  OrthantCone cone;  // income is identically 1

  explicit BudgetProblem(std::size_t n) : cone(n) {}
};

namespace detail {

inline void check_price_in_cone(const Vec& p, const char* where) {
  for (double pi : p)
    if (pi < 0) throw std::invalid_argument(std::string(where) + ": negative price coordinate");
}

}  // namespace detail

inline bool budget_contains(const PriceVector& p, const Bundle& x, double tol) {
  require_same_dim(p, x, "budget_contains");
  detail::check_price_in_cone(p, "budget_contains");
  for (double xi : x)
    if (xi < -tol) return false;
  return dot(p, x) <= 1.0 + tol;
}

// KKT residual of "x is the Euclidean projection of y onto B(p)": recovers
// the multiplier of the budget row by least squares over free coordinates
// and returns the largest stationarity/feasibility/complementarity violation.
inline double projection_residual(const PriceVector& p, const Vec& y, const Bundle& x) {
  require_same_dim(p, y, "projection_residual");
  require_same_dim(p, x, "projection_residual");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (x[i] > 0 && p[i] > 0) {
      num += p[i] * (y[i] - x[i]);
      den += p[i] * p[i];
    }
  }
  double mu = den > 0 ? std::max(0.0, num / den) : 0.0;
  double r = std::max(0.0, dot(p, x) - 1.0);
  r = std::max(r, std::abs(mu * (dot(p, x) - 1.0)));
  for (std::size_t i = 0; i < p.size(); ++i) {
    r = std::max(r, -x[i]);
    double s = y[i] - x[i] - mu * p[i];
    if (x[i] > 0)
      r = std::max(r, std::abs(s));
    else
      r = std::max(r, s);
  }
  return r;
}

// Exact Euclidean projection onto B(p). The clamped point is optimal when
// affordable; otherwise the budget row is tight and x(mu) = max(y - mu p, 0)
// with mu solving <p, x(mu)> = 1, found by walking the sorted breakpoints
// mu_i = y_i / p_i where coordinates leave the support.
inline Bundle project_onto_budget(const PriceVector& p, const Vec& y, double tol = 1e-10) {
  require_same_dim(p, y, "project_onto_budget");
  detail::check_price_in_cone(p, "project_onto_budget");
  if (is_zero(p))
    throw std::invalid_argument("project_onto_budget: unbounded projection request (p = 0)");

  Bundle x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = std::max(y[i], 0.0);
  if (dot(p, x) <= 1.0) return x;

  struct Entry {
    double mu;
    std::size_t i;
  };
  std::vector<Entry> brk;
  double a = 0.0, b = 0.0;  // <p, x(mu)> = a - mu*b over the current support
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0 && y[i] > 0) {
      brk.push_back({y[i] / p[i], i});
      a += p[i] * y[i];
      b += p[i] * p[i];
    }
  }
  std::sort(brk.begin(), brk.end(), [](const Entry& l, const Entry& r) { return l.mu < r.mu; });

  double mu = 0.0;
  bool found = false;
  for (const auto& e : brk) {
    double cand = (a - 1.0) / b;
    if (cand <= e.mu) {
      mu = cand;
      found = true;
      break;
    }
    a -= p[e.i] * y[e.i];
    b -= p[e.i] * p[e.i];
  }
  if (!found)
    throw SolverError("project_onto_budget: breakpoint walk failed");  // not reachable: g(mu)->0

  for (std::size_t i = 0; i < p.size(); ++i)
    x[i] = p[i] > 0 ? std::max(y[i] - mu * p[i], 0.0) : std::max(y[i], 0.0);

  double res = projection_residual(p, y, x);
  if (res > std::max(tol, 1e-12 * (1.0 + norm_inf(y))))
    throw SolverError("project_onto_budget: KKT residual " + std::to_string(res) +
                      " exceeds tolerance");
  return x;
}

// Solves { lambda >= 0 : x* + lambda p in -N(x; R^n_+) } given the active-set
// descriptor of x. Inactive coordinates give equalities (consistent ratios
// are averaged; spread beyond tol*(1+|lambda|) means Empty), active ones give
// one-sided bounds, so the result is Empty, a singleton, or a ray.
inline LambdaSet lambda_set(const PriceVector& p, const Bundle& x, const Vec& xstar,
                            const NormalConeDescriptor& d, double tol) {
  require_same_dim(p, x, "lambda_set");
  require_same_dim(p, xstar, "lambda_set");
  require_dim(d.base_point, p.size(), "lambda_set");
  detail::check_price_in_cone(p, "lambda_set");

  for (std::size_t i = 0; i < x.size(); ++i)
    if (!d.is_active(i) && x[i] <= 10.0 * d.eps_act)
      throw SolverError("lambda_set: active-set classification ambiguous at coordinate " +
                        std::to_string(i));

  const double scale = 1.0 + norm_inf(xstar);

  // equality rows: x*_i + lambda p_i = 0 on inactive coordinates
  double ratio_sum = 0.0;
  std::size_t ratio_count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (d.is_active(i)) continue;
    if (p[i] > 0) {
      ratio_sum += -xstar[i] / p[i];
      ++ratio_count;
    } else if (std::abs(xstar[i]) > tol * scale) {
      return LambdaSet::empty();  // 0*lambda cannot cancel a nonzero covector entry
    }
  }

  if (ratio_count > 0) {
    double lam = ratio_sum / static_cast<double>(ratio_count);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (d.is_active(i) || p[i] <= 0) continue;
      if (std::abs(-xstar[i] / p[i] - lam) > tol * (1.0 + std::abs(lam)))
        return LambdaSet::empty();
    }
    if (lam < -tol * (1.0 + std::abs(lam))) return LambdaSet::empty();
    lam = std::max(lam, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!d.is_active(i)) continue;
      if (xstar[i] + lam * p[i] < -tol * (scale + lam * (1.0 + norm_inf(p))))
        return LambdaSet::empty();
    }
    return LambdaSet::singleton(lam);
  }

  // no equality rows: the active inequalities leave a ray
  double lo = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!d.is_active(i)) continue;
    if (p[i] > 0)
      lo = std::max(lo, -xstar[i] / p[i]);
    else if (xstar[i] < -tol * scale)
      return LambdaSet::empty();
  }
  return LambdaSet::ray(std::max(lo, 0.0));
}

// Coderivative of the budget map at (p, x) applied to x*. The value equals
// both the regular and the limiting coderivative (the budget graph is
// regular at such points), so one set serves as both.
inline RaySegmentSet coderivative_budget(const PriceVector& p, const Bundle& x, const Vec& xstar,
                                         double tol = 1e-9) {
  require_same_dim(p, x, "coderivative_budget");
  require_same_dim(p, xstar, "coderivative_budget");
  const std::size_t n = p.size();
  for (double pi : p)
    if (!(pi > tol))
      throw std::invalid_argument("coderivative_budget: price must be interior to the cone");

  OrthantCone cone(n);
  if (!cone_contains(cone, x, kActiveTol))
    throw std::invalid_argument("coderivative_budget: bundle outside the goods cone");
  if (norm_inf(x) <= kActiveTol)
    throw std::invalid_argument("coderivative_budget: bundle must be nonzero");

  double s = dot(p, x);
  if (s > 1.0 + tol)
    throw std::invalid_argument("coderivative_budget: bundle outside the budget set");

  NormalConeDescriptor d = normal_cone_at(cone, x);
  if (s > 1.0 - tol) {  // saturated budget: ray segment through x
    LambdaSet L = lambda_set(p, x, xstar, d, tol);
    return RaySegmentSet::make_union(n, {{x, L}});
  }
  // slack budget: value is {0} iff -x* is a normal covector at x
  bool ok = normal_cone_contains(d, scaled(-1.0, xstar), tol * (1.0 + norm_inf(xstar)));
  return ok ? RaySegmentSet::zero(n) : RaySegmentSet::empty(n);
}

struct DemandMultiplier {
  LambdaSet lambdas;
  bool budget_saturated = false;
};

// Multiplier set pinned by a differentiable-utility demand point: when the
// budget is saturated the only candidate is lambda = <grad_u, x> (normals at
// x annihilate x, so pairing the stationarity relation with x isolates it);
// with slack the gradient itself must be a normal covector and lambda = 0.
// The caller certifies (p, x) is a demand pair; the stationarity residual is
// still checked and a violation throws HypothesisError.
inline DemandMultiplier demand_multiplier_set(const PriceVector& p, const Bundle& x,
                                              const Vec& grad_u, double tol) {
  require_same_dim(p, x, "demand_multiplier_set");
  require_same_dim(p, grad_u, "demand_multiplier_set");
  detail::check_price_in_cone(p, "demand_multiplier_set");

  OrthantCone cone(p.size());
  NormalConeDescriptor d = normal_cone_at(cone, x);
  const double rtol = tol * (1.0 + norm_inf(grad_u));
  double s = dot(p, x);
  if (s > 1.0 + tol)
    throw std::invalid_argument("demand_multiplier_set: bundle outside the budget set");

  if (s > 1.0 - tol) {
    double lam = dot(grad_u, x);
    if (lam < -rtol)
      throw HypothesisError("demand_multiplier_set: negative multiplier; not a demand pair");
    lam = std::max(lam, 0.0);
    Vec z = add_scaled(grad_u, -lam, p);
    if (!normal_cone_contains(d, z, rtol * (1.0 + lam * norm_inf(p))))
      throw HypothesisError(
          "demand_multiplier_set: stationarity residual rejects the certified demand pair");
    return {LambdaSet::singleton(lam), true};
  }

  if (!normal_cone_contains(d, grad_u, rtol))
    throw HypothesisError(
        "demand_multiplier_set: slack budget but grad u is not a normal covector; "
        "not a demand pair");
  return {LambdaSet::singleton(0.0), false};
}

}  // namespace pricegrad
