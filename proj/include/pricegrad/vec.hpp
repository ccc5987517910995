#pragma once

// Dense-vector helpers shared across the library. Vectors are plain
// std::vector<double>; dimensions are validated at API boundaries.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pricegrad {

using Vec = std::vector<double>;
using PriceVector = Vec;
using Bundle = Vec;

inline void require_dim(const Vec& a, std::size_t n, const char* where) {
  if (a.size() != n)
    throw std::invalid_argument(std::string(where) + ": expected dimension " +
                                std::to_string(n) + ", got " + std::to_string(a.size()));
}

inline void require_same_dim(const Vec& a, const Vec& b, const char* where) {
  require_dim(b, a.size(), where);
}

inline double dot(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) {
  double s = 0.0;
  for (double ai : a) s += ai * ai;
  return std::sqrt(s);
}

inline double norm1(const Vec& a) {
  double s = 0.0;
  for (double ai : a) s += std::abs(ai);
  return s;
}

inline double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double ai : a) m = std::max(m, std::abs(ai));
  return m;
}

// a + t*b
inline Vec add_scaled(const Vec& a, double t, const Vec& b) {
  require_same_dim(a, b, "add_scaled");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + t * b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) { return add_scaled(a, -1.0, b); }

inline Vec scaled(double t, const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = t * a[i];
  return r;
}

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

inline bool is_zero(const Vec& a, double tol = 0.0) { return norm_inf(a) <= tol; }

}  // namespace pricegrad
