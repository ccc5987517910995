#pragma once

// Geometry of the goods cone R^n_+ (which is self-dual, so the price cone is
// the same orthant). The normal cone at a point x of the orthant is
//   N(x; R^n_+) = { z : z_i <= 0 where x_i = 0,  z_i = 0 where x_i > 0 },
// with "x_i = 0" decided by the active-set tolerance eps_act.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "pricegrad/vec.hpp"

namespace pricegrad {

// Coordinates at or below this are treated as exactly zero when classifying
// active constraints; demand solvers return approximate corner solutions.
inline constexpr double kActiveTol = 1e-9;

struct OrthantCone {
  std::size_t dim;

  explicit OrthantCone(std::size_t n) : dim(n) {
    if (n < 1) throw std::invalid_argument("OrthantCone: dim must be >= 1");
  }
};

inline bool cone_contains(const OrthantCone& c, const Vec& x, double tol) {
  require_dim(x, c.dim, "cone_contains");
  if (tol < 0) throw std::invalid_argument("cone_contains: tol must be >= 0");
  for (double xi : x)
    if (xi < -tol) return false;
  return true;
}

struct NormalConeDescriptor {
  Bundle base_point;
  std::vector<char> active;  // active[i] != 0 iff x_i treated as 0
  double eps_act = kActiveTol;

  std::size_t dim() const { return base_point.size(); }

  bool is_active(std::size_t i) const { return active[i] != 0; }

  std::vector<std::size_t> active_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < active.size(); ++i)
      if (active[i]) idx.push_back(i);
    return idx;
  }
};

inline NormalConeDescriptor normal_cone_at(const OrthantCone& c, const Bundle& x,
                                           double eps_act = kActiveTol) {
  if (!cone_contains(c, x, eps_act))
    throw std::invalid_argument("normal_cone_at: point outside the orthant beyond tolerance");
  NormalConeDescriptor d;
  d.base_point = x;
  d.eps_act = eps_act;
  d.active.resize(c.dim);
  for (std::size_t i = 0; i < c.dim; ++i) d.active[i] = (x[i] <= eps_act) ? 1 : 0;
  return d;
}

// Largest constraint violation of z against N(base_point; R^n_+); zero means
// membership. Doubles as a distance-like residual for stationarity checks.
inline double normal_cone_violation(const NormalConeDescriptor& d, const Vec& z) {
  require_dim(z, d.dim(), "normal_cone_violation");
  double worst = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double v = d.is_active(i) ? z[i] : std::abs(z[i]);
    if (v > worst) worst = v;
  }
  return worst;
}

inline bool normal_cone_contains(const NormalConeDescriptor& d, const Vec& z, double tol) {
  return normal_cone_violation(d, z) <= tol;
}

}  // namespace pricegrad
