#pragma once

// Value sets for coderivatives and subdifferential estimates. Everything the
// engine produces lives on rays through demand bundles:
//
//   { lambda * base : lambda in L },   L a subset of [0, inf)
//
// so a LambdaSet describes L and a RaySegmentSet is a finite union of such
// rays, with Empty and the singleton {0} kept as explicit canonical forms.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pricegrad/vec.hpp"

namespace pricegrad {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class LambdaKind { Empty, Singleton, Interval, Ray };

struct LambdaSet {
  LambdaKind kind = LambdaKind::Empty;
  double lo = 0.0;
  double hi = 0.0;  // Singleton: hi == lo; Ray: hi == +inf

  static LambdaSet empty() { return {}; }

  static LambdaSet singleton(double v) {
    if (v < 0) throw std::invalid_argument("LambdaSet: negative singleton");
    return {LambdaKind::Singleton, v, v};
  }

  static LambdaSet interval(double lo, double hi) {
    if (lo < 0 || hi < lo) throw std::invalid_argument("LambdaSet: bad interval bounds");
    if (hi == lo) return singleton(lo);
    if (std::isinf(hi)) return ray(lo);
    return {LambdaKind::Interval, lo, hi};
  }

  static LambdaSet ray(double lo) {
    if (lo < 0) throw std::invalid_argument("LambdaSet: negative ray start");
    return {LambdaKind::Ray, lo, kInf};
  }

  bool is_empty() const { return kind == LambdaKind::Empty; }

  bool contains(double v, double tol) const {
    if (is_empty()) return false;
    return v >= lo - tol && v <= hi + tol;
  }

  bool is_zero_singleton(double tol = 0.0) const {
    return kind == LambdaKind::Singleton && std::abs(lo) <= tol;
  }
};

inline LambdaSet intersect(const LambdaSet& a, const LambdaSet& b, double tol) {
  if (a.is_empty() || b.is_empty()) return LambdaSet::empty();
  double lo = std::max(a.lo, b.lo);
  double hi = std::min(a.hi, b.hi);
  if (lo > hi + tol) return LambdaSet::empty();
  if (lo >= hi) return LambdaSet::singleton(std::max(0.0, std::min(lo, hi)));
  if (std::isinf(hi)) return LambdaSet::ray(lo);
  return LambdaSet::interval(lo, hi);
}

// Smallest interval/ray containing both; exact for overlapping or adjacent
// pieces, which is the only way the engine ever merges.
inline LambdaSet convex_merge(const LambdaSet& a, const LambdaSet& b) {
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  double lo = std::min(a.lo, b.lo);
  double hi = std::max(a.hi, b.hi);
  if (std::isinf(hi)) return LambdaSet::ray(lo);
  if (hi == lo) return LambdaSet::singleton(lo);
  return LambdaSet::interval(lo, hi);
}

enum class RaySegmentKind { Empty, ZeroSingleton, Union };

struct RaySegment {
  Bundle base;       // nonzero
  LambdaSet lambdas; // nonempty
};

struct RaySegmentSet {
  RaySegmentKind kind = RaySegmentKind::Empty;
  std::size_t dim = 0;
  std::vector<RaySegment> segments;  // populated only for Union

  static RaySegmentSet empty(std::size_t dim) { return {RaySegmentKind::Empty, dim, {}}; }

  static RaySegmentSet zero(std::size_t dim) { return {RaySegmentKind::ZeroSingleton, dim, {}}; }

  // Canonicalizing constructor: drops empty lambda sets, rejects zero bases,
  // and collapses to ZeroSingleton when only lambda = 0 survives.
  static RaySegmentSet make_union(std::size_t dim, std::vector<RaySegment> segs) {
    std::vector<RaySegment> kept;
    for (auto& s : segs) {
      if (s.lambdas.is_empty()) continue;
      require_dim(s.base, dim, "RaySegmentSet");
      if (pricegrad::is_zero(s.base)) throw std::invalid_argument("RaySegmentSet: zero base point");
      kept.push_back(std::move(s));
    }
    if (kept.empty()) return empty(dim);
    bool all_zero = true;
    for (const auto& s : kept)
      if (!s.lambdas.is_zero_singleton()) all_zero = false;
    if (all_zero) return zero(dim);
    return {RaySegmentKind::Union, dim, std::move(kept)};
  }

  bool is_empty() const { return kind == RaySegmentKind::Empty; }
  bool is_zero() const { return kind == RaySegmentKind::ZeroSingleton; }
};

// sup { <xi, q> : xi in s }, with -inf for the empty set.
inline double support_function(const RaySegmentSet& s, const Vec& q) {
  require_dim(q, s.dim, "support_function");
  switch (s.kind) {
    case RaySegmentKind::Empty:
      return -kInf;
    case RaySegmentKind::ZeroSingleton:
      return 0.0;
    case RaySegmentKind::Union:
      break;
  }
  double best = -kInf;
  for (const auto& seg : s.segments) {
    double c = dot(seg.base, q);
    double v;
    if (seg.lambdas.kind == LambdaKind::Ray && c > 0) {
      v = kInf;
    } else {
      // linear in lambda, so the sup sits at an interval endpoint
      double at_lo = seg.lambdas.lo * c;
      double at_hi = std::isinf(seg.lambdas.hi) ? (c < 0 ? -kInf : 0.0) : seg.lambdas.hi * c;
      v = std::max(at_lo, at_hi);
    }
    best = std::max(best, v);
  }
  return best;
}

inline bool contains_zero(const RaySegmentSet& s, double tol = 0.0) {
  switch (s.kind) {
    case RaySegmentKind::Empty:
      return false;
    case RaySegmentKind::ZeroSingleton:
      return true;
    case RaySegmentKind::Union:
      for (const auto& seg : s.segments)
        if (seg.lambdas.contains(0.0, tol)) return true;
      return false;
  }
  return false;
}

// Membership of a concrete vector, used by oracles and tests. A vector
// belongs to a Union member iff it is lambda * base for some admissible
// lambda; the best lambda on the ray is the least-squares one.
inline bool ray_segment_set_contains(const RaySegmentSet& s, const Vec& v, double tol) {
  require_dim(v, s.dim, "ray_segment_set_contains");
  switch (s.kind) {
    case RaySegmentKind::Empty:
      return false;
    case RaySegmentKind::ZeroSingleton:
      return norm_inf(v) <= tol;
    case RaySegmentKind::Union:
      break;
  }
  for (const auto& seg : s.segments) {
    double bb = dot(seg.base, seg.base);
    double lam = dot(v, seg.base) / bb;
    if (lam < 0) lam = 0;
    if (!seg.lambdas.contains(lam, tol)) {
      // clamp to the admissible range and retry the residual there
      lam = std::min(std::max(lam, seg.lambdas.lo), seg.lambdas.hi);
      if (std::isinf(lam)) continue;
      if (!seg.lambdas.contains(lam, tol)) continue;
    }
    if (norm_inf(add_scaled(v, -lam, seg.base)) <= tol * (1.0 + norm_inf(v))) return true;
  }
  return false;
}

}  // namespace pricegrad
