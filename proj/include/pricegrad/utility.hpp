#pragma once

// Utility function catalogue. Four model kinds cover everything the engine
// needs: Cobb-Douglas products, linear utilities, continuous piecewise-linear
// functions of one good, and user-supplied smooth callbacks. Upper
// subdifferentials are analytic per kind; nothing here does generic
// nonsmooth calculus.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "pricegrad/cone.hpp"
#include "pricegrad/errors.hpp"
#include "pricegrad/rng.hpp"
#include "pricegrad/vec.hpp"

namespace pricegrad {

enum class UtilityKind { CobbDouglas, Linear, PiecewiseLinear1D, CustomSmooth };

inline const char* utility_kind_name(UtilityKind k) {
  switch (k) {
    case UtilityKind::CobbDouglas: return "cobb_douglas";
    case UtilityKind::Linear: return "linear";
    case UtilityKind::PiecewiseLinear1D: return "piecewise_linear_1d";
    case UtilityKind::CustomSmooth: return "custom_smooth";
  }
  return "?";
}

struct UtilityModel {
  UtilityKind kind = UtilityKind::Linear;
  std::size_t dim = 0;
  bool concave = false;

  // CobbDouglas: u(x) = scale * prod x_i^alpha_i, alpha_i in (0,1)
  double scale = 1.0;
  Vec exponents;

  // Linear: u(x) = <coeffs, x>
  Vec coeffs;

  // PiecewiseLinear1D: continuous, slopes[j] on (breakpoints[j-1], breakpoints[j]),
  // anchored by value_at_first_break = u(breakpoints[0])
  Vec breakpoints;
  Vec slopes;
  double value_at_first_break = 0.0;
  Vec break_values;  // derived: u at each breakpoint

  // CustomSmooth
  std::function<double(const Vec&)> value_fn;
  std::function<Vec(const Vec&)> grad_fn;
};

enum class UpperSubdiffKind { Empty, Singleton, Interval1D };

struct UpperSubdiffSet {
  UpperSubdiffKind kind = UpperSubdiffKind::Empty;
  Vec gradient;         // Singleton
  double lo = 0.0;      // Interval1D, dim 1 only
  double hi = 0.0;

  static UpperSubdiffSet empty() { return {}; }

  static UpperSubdiffSet singleton(Vec g) {
    UpperSubdiffSet s;
    s.kind = UpperSubdiffKind::Singleton;
    s.gradient = std::move(g);
    return s;
  }

  static UpperSubdiffSet interval_1d(double lo, double hi) {
    if (hi < lo) throw std::invalid_argument("UpperSubdiffSet: hi < lo");
    UpperSubdiffSet s;
    s.kind = UpperSubdiffKind::Interval1D;
    s.lo = lo;
    s.hi = hi;
    return s;
  }

  bool is_empty() const { return kind == UpperSubdiffKind::Empty; }
};

inline double utility_value(const UtilityModel& u, const Bundle& x, double tol = kActiveTol);

namespace detail {

inline std::size_t pwl_segment(const UtilityModel& u, double x) {
  // index j such that slopes[j] applies; j = count of breakpoints < x
  const auto& b = u.breakpoints;
  return static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), x) - b.begin());
}

inline double pwl_value(const UtilityModel& u, double x) {
  std::size_t j = pwl_segment(u, x);
  if (j == 0) return u.value_at_first_break + u.slopes[0] * (x - u.breakpoints[0]);
  return u.break_values[j - 1] + u.slopes[j] * (x - u.breakpoints[j - 1]);
}

inline void check_nonnegative(const Bundle& x, double tol, const char* where) {
  for (double xi : x)
    if (xi < -tol) throw std::invalid_argument(std::string(where) + ": negative coordinate");
}

}  // namespace detail

inline double utility_value(const UtilityModel& u, const Bundle& x, double tol) {
  require_dim(x, u.dim, "utility_value");
  detail::check_nonnegative(x, tol, "utility_value");
  switch (u.kind) {
    case UtilityKind::CobbDouglas: {
      double v = u.scale;
      for (std::size_t i = 0; i < u.dim; ++i) {
        double xi = std::max(x[i], 0.0);
        if (xi == 0.0) return 0.0;  // 0^alpha = 0 for alpha > 0
        v *= std::pow(xi, u.exponents[i]);
      }
      return v;
    }
    case UtilityKind::Linear:
      return dot(u.coeffs, x);
    case UtilityKind::PiecewiseLinear1D:
      return detail::pwl_value(u, x[0]);
    case UtilityKind::CustomSmooth:
      return u.value_fn(x);
  }
  throw std::logic_error("utility_value: bad kind");
}

inline Vec utility_gradient(const UtilityModel& u, const Bundle& x) {
  require_dim(x, u.dim, "utility_gradient");
  switch (u.kind) {
    case UtilityKind::CobbDouglas: {
      for (double xi : x)
        if (xi <= 0.0)
          throw SolverError("utility_gradient: Cobb-Douglas gradient needs an interior point");
      double v = utility_value(u, x);
      Vec g(u.dim);
      for (std::size_t i = 0; i < u.dim; ++i) g[i] = u.exponents[i] * v / x[i];
      return g;
    }
    case UtilityKind::Linear:
      return u.coeffs;
    case UtilityKind::PiecewiseLinear1D: {
      for (double b : u.breakpoints)
        if (std::abs(x[0] - b) <= kActiveTol)
          throw SolverError("utility_gradient: nondifferentiable at a breakpoint");
      return {u.slopes[detail::pwl_segment(u, x[0])]};
    }
    case UtilityKind::CustomSmooth: {
      Vec g = u.grad_fn(x);
      require_dim(g, u.dim, "utility_gradient: callback");
      return g;
    }
  }
  throw std::logic_error("utility_gradient: bad kind");
}

// Frechet upper subdifferential of u at x. Differentiable points give the
// gradient singleton; a concave 1-D kink gives the slope interval between
// the adjacent pieces; a convex kink has no upper subgradient at all.
inline UpperSubdiffSet upper_subdifferential(const UtilityModel& u, const Bundle& x) {
  require_dim(x, u.dim, "upper_subdifferential");
  switch (u.kind) {
    case UtilityKind::CobbDouglas: {
      for (double xi : x)
        if (xi <= kActiveTol)
          throw SolverError(
              "upper_subdifferential: no analytic rule for Cobb-Douglas at the boundary");
      return UpperSubdiffSet::singleton(utility_gradient(u, x));
    }
    case UtilityKind::Linear:
      return UpperSubdiffSet::singleton(u.coeffs);
    case UtilityKind::PiecewiseLinear1D: {
      for (std::size_t j = 0; j < u.breakpoints.size(); ++j) {
        if (std::abs(x[0] - u.breakpoints[j]) <= kActiveTol) {
          double left = u.slopes[j];
          double right = u.slopes[j + 1];
          if (right > left) return UpperSubdiffSet::empty();  // convex kink
          return UpperSubdiffSet::interval_1d(right, left);
        }
      }
      return UpperSubdiffSet::singleton({u.slopes[detail::pwl_segment(u, x[0])]});
    }
    case UtilityKind::CustomSmooth:
      return UpperSubdiffSet::singleton(utility_gradient(u, x));
  }
  throw std::logic_error("upper_subdifferential: bad kind");
}

inline bool locally_lipschitz_at(const UtilityModel& u, const Bundle& x) {
  if (u.kind == UtilityKind::CobbDouglas) {
    for (double xi : x)
      if (xi <= kActiveTol) return false;  // gradient blows up toward the boundary
  }
  return true;
}

// Singular (horizon) upper subdifferential: {0} wherever the model is
// locally Lipschitz. Points without that guarantee are rejected rather
// than guessed.
inline UpperSubdiffSet singular_upper_subdifferential(const UtilityModel& u, const Bundle& x) {
  require_dim(x, u.dim, "singular_upper_subdifferential");
  if (!locally_lipschitz_at(u, x))
    throw HypothesisError(
        "singular_upper_subdifferential: model is not locally Lipschitz at this point");
  return UpperSubdiffSet::singleton(zeros(u.dim));
}

// Registration-time validation: finite-difference gradient agreement on
// random interior points, plus the midpoint concavity test for models that
// declare themselves concave.
inline void validate_model(const UtilityModel& u, std::uint64_t seed = 20260814) {
  Rng rng(seed);
  if (u.kind == UtilityKind::CustomSmooth) {
    for (int k = 0; k < 200; ++k) {
      Vec x = rng.uniform_vec(u.dim, 0.25, 1.75);
      Vec g = utility_gradient(u, x);
      for (std::size_t i = 0; i < u.dim; ++i) {
        double h = 1e-6 * (1.0 + std::abs(x[i]));
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        double fd = (u.value_fn(xp) - u.value_fn(xm)) / (2.0 * h);
        if (std::abs(fd - g[i]) > 1e-5 * (1.0 + std::abs(g[i])))
          throw HypothesisError("validate_model: gradient callback disagrees with finite differences");
      }
    }
  }
  if (u.concave) {
    for (int k = 0; k < 500; ++k) {
      Vec x = rng.uniform_vec(u.dim, 0.0, 2.0);
      Vec y = rng.uniform_vec(u.dim, 0.0, 2.0);
      Vec m = scaled(0.5, add_scaled(x, 1.0, y));
      double lhs = utility_value(u, m);
      double rhs = 0.5 * (utility_value(u, x) + utility_value(u, y));
      if (lhs < rhs - 1e-12)
        throw HypothesisError("validate_model: declared-concave model fails midpoint concavity");
    }
  }
}

inline UtilityModel cobb_douglas(double scale, Vec exponents) {
  if (!(scale > 0)) throw std::invalid_argument("cobb_douglas: scale must be positive");
  if (exponents.empty()) throw std::invalid_argument("cobb_douglas: empty exponents");
  double total = 0.0;
  for (double a : exponents) {
    if (!(a > 0) || !(a < 1))
      throw std::invalid_argument("cobb_douglas: exponents must lie in (0,1)");
    total += a;
  }
  UtilityModel u;
  u.kind = UtilityKind::CobbDouglas;
  u.dim = exponents.size();
  u.scale = scale;
  u.exponents = std::move(exponents);
  u.concave = total <= 1.0 + 1e-12;  // degree <= 1 homogeneity
  return u;
}

inline UtilityModel linear_utility(Vec coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("linear_utility: empty coefficients");
  for (double c : coeffs)
    if (c < 0) throw std::invalid_argument("linear_utility: coefficients must be >= 0");
  UtilityModel u;
  u.kind = UtilityKind::Linear;
  u.dim = coeffs.size();
  u.coeffs = std::move(coeffs);
  u.concave = true;
  return u;
}

inline UtilityModel piecewise_linear_1d(Vec breakpoints, Vec slopes, double value_at_first_break) {
  if (breakpoints.empty()) throw std::invalid_argument("piecewise_linear_1d: need a breakpoint");
  for (std::size_t j = 1; j < breakpoints.size(); ++j)
    if (!(breakpoints[j] > breakpoints[j - 1]))
      throw std::invalid_argument("piecewise_linear_1d: breakpoints must increase strictly");
  if (slopes.size() != breakpoints.size() + 1)
    throw std::invalid_argument("piecewise_linear_1d: need breakpoints+1 slopes");
  UtilityModel u;
  u.kind = UtilityKind::PiecewiseLinear1D;
  u.dim = 1;
  u.breakpoints = std::move(breakpoints);
  u.slopes = std::move(slopes);
  u.value_at_first_break = value_at_first_break;
  u.break_values.resize(u.breakpoints.size());
  u.break_values[0] = value_at_first_break;
  for (std::size_t j = 1; j < u.breakpoints.size(); ++j)
    u.break_values[j] =
        u.break_values[j - 1] + u.slopes[j] * (u.breakpoints[j] - u.breakpoints[j - 1]);
  u.concave = std::is_sorted(u.slopes.rbegin(), u.slopes.rend());
  return u;
}

inline UtilityModel custom_smooth(std::size_t dim, std::function<double(const Vec&)> value_fn,
                                  std::function<Vec(const Vec&)> grad_fn, bool concave,
                                  std::uint64_t validation_seed = 20260814) {
  if (dim < 1) throw std::invalid_argument("custom_smooth: dim must be >= 1");
  if (!value_fn || !grad_fn) throw std::invalid_argument("custom_smooth: missing callbacks");
  UtilityModel u;
  u.kind = UtilityKind::CustomSmooth;
  u.dim = dim;
  u.concave = concave;
  u.value_fn = std::move(value_fn);
  u.grad_fn = std::move(grad_fn);
  validate_model(u, validation_seed);
  return u;
}

}  // namespace pricegrad
