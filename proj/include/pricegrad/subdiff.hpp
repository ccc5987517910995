#pragma once

// Subdifferential estimates for the negative indirect utility -v around an
// interior price. Everything reduces to coderivative values of the budget
// map on demand rays:
//
//   frechet:  intersection over upper subgradients x* of u at one demand
//             point of the lambda segments solving  -x* + lambda p in -N,
//   limiting: union of those segments over x* in the upper subdifferential,
//             and over the demand set in inner-semicompact mode,
//   singular: the same union with x* running through the singular upper
//             subdifferential (always {0} for locally Lipschitz models).
//
// Estimates are labeled upper_bound unless the caller asserts the equality
// hypotheses (selection/differentiability assertions below), and slack
// budgets can force genuine emptiness, labeled empty_by_theorem.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pricegrad/budget.hpp"
#include "pricegrad/demand.hpp"
#include "pricegrad/errors.hpp"
#include "pricegrad/sets.hpp"
#include "pricegrad/utility.hpp"
#include "pricegrad/vec.hpp"

namespace pricegrad {

enum class Exactness { exact, upper_bound, empty_by_theorem };

enum class LimitingMode { inner_semicontinuous, inner_semicompact };

// Equality hypotheses the theory needs but no algorithm can certify; the
// caller asserts them explicitly and the report records which were used.
struct HypothesisAssertions {
  bool nsc = false;                        // demand saturates the budget
  bool inner_semicontinuous = false;       // demand map inner semicontinuous at the pair
  bool upper_lipschitz_selection = false;  // local upper Lipschitzian selection of demand
  bool strict_differentiability = false;   // u strictly differentiable at demand points
  bool directional_lipschitz = false;      // -v directionally Lipschitzian at the price
};

struct SubdiffReport {
  PriceVector price;
  RaySegmentSet frechet{RaySegmentSet::empty(0)};
  RaySegmentSet limiting{RaySegmentSet::empty(0)};
  RaySegmentSet singular{RaySegmentSet::empty(0)};
  Exactness frechet_exactness = Exactness::upper_bound;
  Exactness limiting_exactness = Exactness::upper_bound;
  Exactness singular_exactness = Exactness::upper_bound;
  HypothesisAssertions assertions;
  std::vector<std::string> hypotheses_used;
};

namespace detail {

inline void require_interior_price_tol(const PriceVector& p, double tol, const char* where) {
  for (double pi : p)
    if (!(pi > tol)) throw std::invalid_argument(std::string(where) + ": boundary price");
}

// saturated iff <p,x> in (1 - tol, 1 + tol]; beyond 1 + tol is infeasible
inline bool classify_saturated(const PriceVector& p, const Bundle& x, double tol,
                               const char* where) {
  double s = dot(p, x);
  if (s > 1.0 + tol)
    throw std::invalid_argument(std::string(where) + ": bundle outside the budget set");
  return s > 1.0 - tol;
}

// union over x* in [lo, hi] (1-D) of { lambda >= 0 : x* - lambda p in N(x) };
// for x > 0 the normal cone is {0}, so lambda = x*/p pointwise and the union
// is the rescaled nonnegative part of the interval
inline LambdaSet lambda_union_interval(double p, double lo, double hi) {
  if (hi < 0) return LambdaSet::empty();
  double llo = std::max(lo, 0.0) / p;
  double lhi = hi / p;
  if (lhi <= llo) return LambdaSet::singleton(llo);
  return LambdaSet::interval(llo, lhi);
}

// does the upper subdifferential meet the normal cone at x?
inline bool subdiff_meets_normal_cone(const UpperSubdiffSet& s, const NormalConeDescriptor& d,
                                      double tol) {
  switch (s.kind) {
    case UpperSubdiffKind::Empty:
      return false;
    case UpperSubdiffKind::Singleton:
      return normal_cone_contains(d, s.gradient, tol);
    case UpperSubdiffKind::Interval1D:
      // 1-D: N is {0} at x > 0 and (-inf, 0] at x = 0
      if (d.is_active(0)) return s.lo <= tol;
      return s.lo <= tol && s.hi >= -tol;
  }
  return false;
}

// is the upper subdifferential contained in the normal cone at x?
inline bool subdiff_inside_normal_cone(const UpperSubdiffSet& s, const NormalConeDescriptor& d,
                                       double tol) {
  switch (s.kind) {
    case UpperSubdiffKind::Empty:
      return true;
    case UpperSubdiffKind::Singleton:
      return normal_cone_contains(d, s.gradient, tol);
    case UpperSubdiffKind::Interval1D:
      if (d.is_active(0)) return s.hi <= tol;
      return std::abs(s.lo) <= tol && std::abs(s.hi) <= tol;
  }
  return false;
}

inline void sort_segments(std::vector<RaySegment>& segs) {
  std::sort(segs.begin(), segs.end(), [](const RaySegment& a, const RaySegment& b) {
    return std::lexicographical_compare(a.base.begin(), a.base.end(), b.base.begin(),
                                        b.base.end());
  });
}

}  // namespace detail

// Estimate of the regular (Frechet) subdifferential of -v at an interior
// price through one demand point. Saturated budgets intersect the lambda
// segments over the upper subdifferential of u; slack budgets give at most
// {0}, and exactly the empty set once some upper subgradient fails to be a
// normal covector at the demand point.
inline RaySegmentSet frechet_subdiff_estimate(const UtilityModel& u, const PriceVector& p_bar,
                                              const Bundle& x_bar, double tol = 1e-9) {
  require_dim(p_bar, u.dim, "frechet_subdiff_estimate");
  require_dim(x_bar, u.dim, "frechet_subdiff_estimate");
  detail::require_interior_price_tol(p_bar, tol, "frechet_subdiff_estimate");
  if (norm_inf(x_bar) <= kActiveTol)
    throw std::invalid_argument("frechet_subdiff_estimate: demand point must be nonzero");

  const std::size_t n = u.dim;
  UpperSubdiffSet S = upper_subdifferential(u, x_bar);
  if (S.is_empty())
    throw HypothesisError(
        "frechet_subdiff_estimate: empty upper subdifferential at the demand point");

  OrthantCone cone(n);
  NormalConeDescriptor d = normal_cone_at(cone, x_bar);
  bool saturated = detail::classify_saturated(p_bar, x_bar, tol, "frechet_subdiff_estimate");

  if (saturated) {
    if (S.kind == UpperSubdiffKind::Singleton) {
      LambdaSet L = lambda_set(p_bar, x_bar, scaled(-1.0, S.gradient), d, tol);
      return RaySegmentSet::make_union(n, {{x_bar, L}});
    }
    // Interval1D, so n = 1 and x_bar > 0: each subgradient pins its own
    // lambda, hence a nondegenerate interval intersects to nothing
    if (S.hi - S.lo <= tol * (1.0 + std::abs(S.lo) + std::abs(S.hi))) {
      double mid = 0.5 * (S.lo + S.hi);
      LambdaSet L = lambda_set(p_bar, x_bar, {-mid}, d, tol);
      return RaySegmentSet::make_union(n, {{x_bar, L}});
    }
    return RaySegmentSet::empty(n);
  }

  double rtol = tol * (1.0 + (S.kind == UpperSubdiffKind::Singleton
                                  ? norm_inf(S.gradient)
                                  : std::max(std::abs(S.lo), std::abs(S.hi))));
  return detail::subdiff_inside_normal_cone(S, d, rtol) ? RaySegmentSet::zero(n)
                                                        : RaySegmentSet::empty(n);
}

// Limiting and singular subdifferential estimates of -v at an interior
// price. inner_semicontinuous mode works through the representative demand
// point only; inner_semicompact mode (finite dimensions) unions over the
// whole demand representation, sampling interval-valued demand at 101 points
// with the endpoints always present. Also attaches the Frechet estimate at
// the representative point when one is available.
inline SubdiffReport limiting_subdiff_estimate(const UtilityModel& u, const PriceVector& p_bar,
                                               const DemandResult& demand, LimitingMode mode,
                                               double tol = 1e-9,
                                               const HypothesisAssertions& hyp = {}) {
  require_dim(p_bar, u.dim, "limiting_subdiff_estimate");
  detail::require_interior_price_tol(p_bar, tol, "limiting_subdiff_estimate");

  SubdiffReport rep;
  rep.price = p_bar;
  rep.assertions = hyp;
  const std::size_t n = u.dim;
  rep.frechet = RaySegmentSet::empty(n);
  rep.limiting = RaySegmentSet::empty(n);
  rep.singular = RaySegmentSet::empty(n);

  if (mode == LimitingMode::inner_semicompact) {
    if (!hyp.nsc)
      throw HypothesisError(
          "limiting_subdiff_estimate: inner-semicompact mode needs the budget-saturation "
          "assertion");
    rep.hypotheses_used.push_back("inner_semicompact(mode)");
    rep.hypotheses_used.push_back("budget_saturation(asserted)");
  } else {
    rep.hypotheses_used.push_back("inner_semicontinuous(asserted)");
    if (hyp.nsc) rep.hypotheses_used.push_back("budget_saturation(asserted)");
  }

  // demand points feeding the union
  std::vector<Bundle> points;
  if (mode == LimitingMode::inner_semicontinuous) {
    points.push_back(demand.representative());
  } else if (demand.kind == MaximizerKind::Points) {
    points = demand.points;
  } else {
    double hi = std::isinf(demand.hi) ? demand.lo + 1.0 : demand.hi;
    for (int j = 0; j <= 100; ++j)
      points.push_back({demand.lo + (hi - demand.lo) * static_cast<double>(j) / 100.0});
  }

  OrthantCone cone(n);
  std::vector<RaySegment> limiting_segs;
  bool limiting_zero = false;
  bool all_slack_disconnected = true;  // every slack point killed its contribution
  bool any_slack = false;
  bool saw_origin = false;
  Bundle zero_base;  // some nonzero demand point, used to encode the {0} member

  for (const auto& x : points) {
    if (norm_inf(x) <= kActiveTol) {
      saw_origin = true;
      continue;  // the ray formula needs a nonzero base point
    }
    if (zero_base.empty()) zero_base = x;

    NormalConeDescriptor d = normal_cone_at(cone, x);

    // qualification: the singular upper subdifferential may meet the normal
    // cone only at 0; locally Lipschitz models give {0} and pass trivially
    UpperSubdiffSet sing = singular_upper_subdifferential(u, x);
    if (sing.kind == UpperSubdiffKind::Singleton && norm_inf(sing.gradient) > tol &&
        normal_cone_contains(d, sing.gradient, tol))
      throw HypothesisError(
          "limiting_subdiff_estimate: qualification failure, nonzero singular upper subgradient "
          "is a normal covector");

    UpperSubdiffSet S = upper_subdifferential(u, x);
    bool saturated = detail::classify_saturated(p_bar, x, tol, "limiting_subdiff_estimate");

    if (saturated) {
      all_slack_disconnected = false;
      switch (S.kind) {
        case UpperSubdiffKind::Empty:
          break;  // nothing to union
        case UpperSubdiffKind::Singleton: {
          LambdaSet L = lambda_set(p_bar, x, scaled(-1.0, S.gradient), d, tol);
          if (!L.is_empty()) limiting_segs.push_back({x, L});
          break;
        }
        case UpperSubdiffKind::Interval1D: {
          LambdaSet L = detail::lambda_union_interval(p_bar[0], S.lo, S.hi);
          if (!L.is_empty()) limiting_segs.push_back({x, L});
          break;
        }
      }
    } else {
      any_slack = true;
      double rtol = tol * (1.0 + (S.kind == UpperSubdiffKind::Singleton
                                      ? norm_inf(S.gradient)
                                      : std::max(std::abs(S.lo), std::abs(S.hi))));
      if (detail::subdiff_meets_normal_cone(S, d, rtol)) {
        limiting_zero = true;
        all_slack_disconnected = false;
      }
    }
  }

  if (saw_origin) rep.hypotheses_used.push_back("origin_demand_point_skipped");

  // assemble the limiting set
  if (limiting_zero && !zero_base.empty())
    limiting_segs.push_back({zero_base, LambdaSet::singleton(0.0)});
  detail::sort_segments(limiting_segs);
  rep.limiting = RaySegmentSet::make_union(n, limiting_segs);

  // the singular union contributes lambda = 0 on every usable demand ray
  rep.singular = zero_base.empty()
                     ? RaySegmentSet::empty(n)
                     : RaySegmentSet::make_union(n, {{zero_base, LambdaSet::singleton(0.0)}});

  rep.hypotheses_used.push_back("qualification_verified");
  if (hyp.upper_lipschitz_selection) rep.hypotheses_used.push_back("upper_lipschitz_selection(asserted)");
  if (hyp.strict_differentiability) rep.hypotheses_used.push_back("strict_differentiability(asserted)");
  if (hyp.directional_lipschitz) rep.hypotheses_used.push_back("directional_lipschitz(asserted)");

  // exactness labels
  if (mode == LimitingMode::inner_semicontinuous && any_slack && all_slack_disconnected &&
      limiting_segs.empty()) {
    rep.limiting_exactness = Exactness::empty_by_theorem;
  } else if (hyp.strict_differentiability && hyp.upper_lipschitz_selection) {
    rep.limiting_exactness = Exactness::exact;
  } else {
    rep.limiting_exactness = Exactness::upper_bound;
  }
  // a singular estimate of {0} is exact: horizon subdifferentials always
  // contain zero, and the bound says they contain nothing else
  rep.singular_exactness =
      rep.singular.is_zero() ? Exactness::exact : Exactness::upper_bound;

  // Frechet layer at the representative point, when the model admits one
  try {
    Bundle x_rep = demand.representative();
    if (norm_inf(x_rep) > kActiveTol) {
      rep.frechet = frechet_subdiff_estimate(u, p_bar, x_rep, tol);
      bool differentiable = upper_subdifferential(u, x_rep).kind == UpperSubdiffKind::Singleton;
      rep.frechet_exactness = (hyp.upper_lipschitz_selection && differentiable)
                                  ? Exactness::exact
                                  : Exactness::upper_bound;
    }
  } catch (const HypothesisError&) {
    rep.hypotheses_used.push_back("frechet_estimate_unavailable");
  }

  return rep;
}

// Convenience wrapper: solve demand, then estimate.
inline SubdiffReport subdiff_report_at(const UtilityModel& u, const PriceVector& p_bar,
                                       LimitingMode mode, double tol = 1e-9,
                                       const HypothesisAssertions& hyp = {},
                                       const SolveConfig& solve_cfg = {}) {
  return limiting_subdiff_estimate(u, p_bar, solve_demand(u, p_bar, solve_cfg), mode, tol, hyp);
}

// Support of the (convexified) sum of the limiting and singular estimates:
// alpha(q) = sigma_limiting(q) + sigma_singular(q). Minkowski sums add
// supports and convex closure keeps them, so this evaluates the Clarke
// bound exactly on the estimates. Empty estimates flag as -inf.
inline double clarke_bound_support(const SubdiffReport& report, const Vec& q) {
  double a = support_function(report.limiting, q);
  double b = support_function(report.singular, q);
  if (std::isinf(a) && a < 0) return -kInf;
  if (std::isinf(b) && b < 0) return -kInf;
  return a + b;
}

struct RateBounds {
  Vec direction;
  double upper = kInf;           // upper Dini derivative of v along q is <= this
  double lower = -kInf;          // lower Dini derivative of v along q is >= this
  double clarke_support = kInf;  // alpha(q)
};

// Directional rate-of-change bounds for the optimal value v along q:
//   d+ v(p;q) <= -sigma_frechet(q)  (vacuous +inf when the estimate is empty)
//   d- v(p;q) >= -alpha(q)          (needs the directional-Lipschitz assertion)
inline RateBounds rate_of_change_bounds(const SubdiffReport& report, const Vec& q) {
  require_dim(q, report.price.size(), "rate_of_change_bounds");
  RateBounds rb;
  rb.direction = q;
  double sf = support_function(report.frechet, q);
  rb.upper = std::isinf(sf) && sf < 0 ? kInf : -sf;
  rb.clarke_support = clarke_bound_support(report, q);
  if (report.assertions.directional_lipschitz && std::isfinite(rb.clarke_support))
    rb.lower = -rb.clarke_support;
  else
    rb.lower = -kInf;
  return rb;
}

}  // namespace pricegrad
