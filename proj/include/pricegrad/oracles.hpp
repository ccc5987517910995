#pragma once

// Independent brute-force checks used to validate the calculus layer:
// difference-quotient estimates of Dini directional derivatives of v,
// finite-difference gradients of v, an empirical Lipschitz-likeness
// (Aubin inclusion) certificate for the budget map, and a sampled
// test of the approximate-normal inequality that defines coderivatives.
// These are statistical evidence, not proofs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pricegrad/budget.hpp"
#include "pricegrad/demand.hpp"
#include "pricegrad/rng.hpp"
#include "pricegrad/utility.hpp"
#include "pricegrad/vec.hpp"

namespace pricegrad {

struct SamplingSchedule {
  double t0 = 1e-3;     // largest step
  double ratio = 0.7;   // geometric decay
  int count = 36;       // number of steps
  double radius = 1e-2; // neighborhood radius for graph samplers

  void validate() const {
    if (!(t0 > 0)) throw std::invalid_argument("SamplingSchedule: t0 must be positive");
    if (!(ratio > 0) || !(ratio < 1))
      throw std::invalid_argument("SamplingSchedule: ratio must lie in (0,1)");
    if (count < 3) throw std::invalid_argument("SamplingSchedule: count must be >= 3");
    double t_last = t0 * std::pow(ratio, count);
    if (!(t_last > 1e3 * 2.220446049250313e-16))
      throw std::invalid_argument("SamplingSchedule: smallest step is numerically meaningless");
  }
};

namespace detail {

inline std::vector<double> dini_quotients(const UtilityModel& u, const PriceVector& p,
                                          const Vec& q, const SamplingSchedule& sched) {
  sched.validate();
  require_same_dim(p, q, "dini quotients");
  double v0 = indirect_utility(u, p);
  std::vector<double> quot;
  double t = sched.t0;
  for (int k = 0; k < sched.count; ++k, t *= sched.ratio) {
    Vec pt = add_scaled(p, t, q);
    for (double c : pt)
      if (!(c > 0))
        throw std::invalid_argument("dini oracle: sampled price leaves the interior cone");
    quot.push_back((indirect_utility(u, pt) - v0) / t);
  }
  return quot;
}

// extremum over the geometric tail; early large-t quotients only carry
// truncation error
template <class Cmp>
inline double dini_tail_extremum(const std::vector<double>& quot, Cmp cmp) {
  std::size_t tail = (quot.size() + 2) / 3;
  double best = quot[quot.size() - tail];
  for (std::size_t k = quot.size() - tail; k < quot.size(); ++k)
    if (cmp(quot[k], best)) best = quot[k];
  return best;
}

}  // namespace detail

inline double dini_upper(const UtilityModel& u, const PriceVector& p, const Vec& q,
                         const SamplingSchedule& sched = {}) {
  auto quot = detail::dini_quotients(u, p, q, sched);
  return detail::dini_tail_extremum(quot, std::greater<double>());
}

inline double dini_lower(const UtilityModel& u, const PriceVector& p, const Vec& q,
                         const SamplingSchedule& sched = {}) {
  auto quot = detail::dini_quotients(u, p, q, sched);
  return detail::dini_tail_extremum(quot, std::less<double>());
}

// Central finite differences of the indirect utility.
inline Vec fd_gradient_v(const UtilityModel& u, const PriceVector& p, double h = 1e-5) {
  require_dim(p, u.dim, "fd_gradient_v");
  if (!(h > 0)) throw std::invalid_argument("fd_gradient_v: h must be positive");
  Vec g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] - h > 0))
      throw std::invalid_argument("fd_gradient_v: stencil leaves the interior cone");
    Vec pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    g[i] = (indirect_utility(u, pp) - indirect_utility(u, pm)) / (2.0 * h);
  }
  return g;
}

struct AubinConfig {
  double radius_p = 0.1;
  double radius_x = 0.1;
  std::vector<double> ell_grid;  // empty: geometric default 1e-3 * 1.5^k
  int samples = 1000;
  std::uint64_t seed = 1;
};

struct AubinReport {
  bool found = false;
  double ell = 0.0;        // smallest admissible grid value
  double sup_ratio = 0.0;  // observed sup of dist(x, B(p')) / |p - p'|
  int samples_used = 0;
  PriceVector worst_p, worst_p2;
  Bundle worst_x;
};

// Empirical Lipschitz-likeness certificate for the budget map around
// (p_bar, x_bar): sample prices p, p' near p_bar and bundles x in B(p) near
// x_bar, measure dist(x, B(p')), and report the smallest grid ell with
// dist <= ell * |p - p'| across every sample.
inline AubinReport aubin_inclusion_test(const PriceVector& p_bar, const Bundle& x_bar,
                                        const AubinConfig& cfg = {}) {
  require_same_dim(p_bar, x_bar, "aubin_inclusion_test");
  detail::require_interior_price(p_bar, "aubin_inclusion_test");
  if (norm_inf(x_bar) <= kActiveTol)
    throw std::invalid_argument("aubin_inclusion_test: base bundle must be nonzero");

  const std::size_t n = p_bar.size();
  Rng rng(cfg.seed);
  auto ball_point = [&](const Vec& center, double radius) {
    Vec d = rng.unit_vec(n);
    double r = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(n));
    Vec y = add_scaled(center, r, d);
    for (auto& yi : y) yi = std::max(yi, 0.0);
    return y;
  };

  std::vector<std::pair<double, double>> obs;  // (dist, |p - p'|)
  AubinReport rep;
  for (int k = 0; k < cfg.samples; ++k) {
    PriceVector p = ball_point(p_bar, cfg.radius_p);
    PriceVector p2 = ball_point(p_bar, cfg.radius_p);
    if (is_zero(p) || is_zero(p2)) continue;

    Bundle x = ball_point(x_bar, cfg.radius_x);
    if (k % 2 == 0) {
      double s = dot(p, x);
      if (s > 1e-9) {
        Bundle face = scaled(1.0 / s, x);
        if (norm2(sub(face, x_bar)) <= cfg.radius_x) x = std::move(face);
      }
    }
    if (!budget_contains(p, x, 0.0)) continue;

    double gap = norm2(sub(p, p2));
    if (gap < 1e-14) continue;
    double dist = norm2(sub(x, project_onto_budget(p2, x)));
    obs.push_back({dist, gap});
    ++rep.samples_used;
    if (dist / gap > rep.sup_ratio) {
      rep.sup_ratio = dist / gap;
      rep.worst_p = p;
      rep.worst_p2 = p2;
      rep.worst_x = x;
    }
  }

  std::vector<double> grid = cfg.ell_grid;
  if (grid.empty())
    for (int k = 0; k <= 50; ++k) grid.push_back(1e-3 * std::pow(1.5, k));
  std::sort(grid.begin(), grid.end());

  for (double ell : grid) {
    bool ok = true;
    for (const auto& [dist, gap] : obs)
      if (dist > ell * gap + 1e-15) {
        ok = false;
        break;
      }
    if (ok) {
      rep.found = true;
      rep.ell = ell;
      break;
    }
  }
  return rep;
}

// Stratified sampler of graph points (p, x), x in B(p), near a base pair.
// Half of the draws are pushed onto the budget face, since normal behavior
// is decided there; every returned point keeps |p-p0| + |x-x0| <= radius
// (sum norm on the product space).
class BudgetGraphSampler {
 public:
  BudgetGraphSampler(PriceVector p0, Bundle x0, double radius, std::uint64_t seed)
      : p0_(std::move(p0)), x0_(std::move(x0)), radius_(radius), rng_(seed) {
    require_same_dim(p0_, x0_, "BudgetGraphSampler");
    detail::require_interior_price(p0_, "BudgetGraphSampler");
  }

  // may return the base pair itself when a draw fails; callers skip it
  std::pair<PriceVector, Bundle> operator()() {
    for (int attempt = 0; attempt < 16; ++attempt) {
      bool boundary = (counter_++ % 2) == 0;
      PriceVector p = perturb(p0_, 0.3 * radius_);
      for (auto& pi : p) pi = std::max(pi, 1e-12);
      Bundle x = perturb(x0_, 0.6 * radius_);
      double s = dot(p, x);
      if (boundary || s > 1.0) {
        if (s <= 1e-9) continue;
        x = scaled(1.0 / s, x);
      }
      if (!budget_contains(p, x, 0.0)) continue;
      if (norm2(sub(p, p0_)) + norm2(sub(x, x0_)) <= radius_) return {p, x};
    }
    return {p0_, x0_};
  }

 private:
  Vec perturb(const Vec& center, double radius) {
    Vec d = rng_.unit_vec(center.size());
    double r = radius * std::pow(rng_.uniform01(), 1.0 / static_cast<double>(center.size()));
    Vec y = add_scaled(center, r, d);
    for (auto& yi : y) yi = std::max(yi, 0.0);
    return y;
  }

  PriceVector p0_;
  Bundle x0_;
  double radius_;
  Rng rng_;
  std::uint64_t counter_ = 0;
};

// Sampled approximate-normal inequality at (p0, x0): a candidate pair
// (w_p, w_x), normalized to unit sum-norm, must satisfy
//   <w, g - (p0, x0)> / |g - (p0, x0)| <= eps
// for every sampled graph point g. Zero candidates pass trivially (the zero
// covector is a normal at every point).
template <class GraphSampler>
inline bool epsilon_normal_test(GraphSampler&& sample, const PriceVector& p0, const Bundle& x0,
                                const Vec& w_p, const Vec& w_x, double eps, int sample_count,
                                double* worst_ratio = nullptr) {
  require_same_dim(p0, x0, "epsilon_normal_test");
  require_same_dim(w_p, w_x, "epsilon_normal_test");
  require_same_dim(p0, w_p, "epsilon_normal_test");

  double scale = norm2(w_p) + norm2(w_x);
  if (worst_ratio) *worst_ratio = -kInf;
  if (scale <= 1e-300) return true;

  double worst = -kInf;
  for (int k = 0; k < sample_count; ++k) {
    auto [p, x] = sample();
    Vec dp = sub(p, p0);
    Vec dx = sub(x, x0);
    double den = norm2(dp) + norm2(dx);
    if (den < 1e-12) continue;
    double ratio = (dot(w_p, dp) + dot(w_x, dx)) / (scale * den);
    worst = std::max(worst, ratio);
  }
  if (worst_ratio) *worst_ratio = worst;
  return worst <= eps;
}

}  // namespace pricegrad
