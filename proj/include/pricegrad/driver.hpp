#pragma once

// Analysis pipeline behind the CLI: parse a pricegrad-config/1 document, run
// the requested analyses against one utility model, and emit a
// pricegrad-report/1 document plus optional two-column series files.
// Config syntax is documented in the README; unknown keys are rejected.
//
// Exit codes: 0 ok, 2 config/schema, 3 solver, 4 hypothesis, 5 I/O, 1 other.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pricegrad/budget.hpp"
#include "pricegrad/demand.hpp"
#include "pricegrad/errors.hpp"
#include "pricegrad/oracles.hpp"
#include "pricegrad/rng.hpp"
#include "pricegrad/subdiff.hpp"
#include "pricegrad/utility.hpp"
#include "pricegrad/vec.hpp"

namespace pricegrad {

using json = nlohmann::json;

struct RunOptions {
  std::string config_path;
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed_override;
  int verbosity = 0;  // <0 quiet, 0 one line per analysis, >0 chatty
};

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

inline const json& get_field(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  return j.at(key);
}

inline double get_num(const json& j, const std::string& key, const std::string& where) {
  const json& v = get_field(j, key, where);
  if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

inline double get_num_or(const json& j, const std::string& key, double dflt,
                         const std::string& where) {
  return j.contains(key) ? get_num(j, key, where) : dflt;
}

inline std::string get_str(const json& j, const std::string& key, const std::string& where) {
  const json& v = get_field(j, key, where);
  if (!v.is_string()) throw ConfigError(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

inline std::string get_str_or(const json& j, const std::string& key, const std::string& dflt,
                              const std::string& where) {
  return j.contains(key) ? get_str(j, key, where) : dflt;
}

inline bool get_bool_or(const json& j, const std::string& key, bool dflt,
                        const std::string& where) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(where + ": '" + key + "' must be a boolean");
  return v.get<bool>();
}

inline Vec get_vec(const json& j, const std::string& key, const std::string& where) {
  const json& v = get_field(j, key, where);
  if (!v.is_array() || v.empty())
    throw ConfigError(where + ": '" + key + "' must be a nonempty numeric array");
  Vec out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + ": '" + key + "' must be numeric");
    out.push_back(e.get<double>());
  }
  return out;
}

inline Vec get_dim_vec(const json& j, const std::string& key, std::size_t n,
                       const std::string& where) {
  Vec v = get_vec(j, key, where);
  if (v.size() != n)
    throw ConfigError(where + ": '" + key + "' has dimension " + std::to_string(v.size()) +
                      ", model has " + std::to_string(n));
  return v;
}

inline UtilityModel parse_model(const json& m) {
  std::string type = get_str(m, "type", "model");
  if (type == "cobb_douglas") {
    check_keys(m, {"type", "scale", "exponents"}, "model");
    return cobb_douglas(get_num_or(m, "scale", 1.0, "model"),
                        get_vec(m, "exponents", "model"));
  }
  if (type == "linear") {
    check_keys(m, {"type", "coeffs"}, "model");
    return linear_utility(get_vec(m, "coeffs", "model"));
  }
  if (type == "piecewise_linear_1d") {
    check_keys(m, {"type", "breakpoints", "slopes", "value_at_first_break"}, "model");
    return piecewise_linear_1d(get_vec(m, "breakpoints", "model"),
                               get_vec(m, "slopes", "model"),
                               get_num(m, "value_at_first_break", "model"));
  }
  throw ConfigError("model: unknown type '" + type + "'");
}

inline HypothesisAssertions parse_assertions(const json& a) {
  HypothesisAssertions hyp;
  if (!a.is_array()) throw ConfigError("assertions: expected an array of strings");
  for (const auto& e : a) {
    if (!e.is_string()) throw ConfigError("assertions: entries must be strings");
    std::string name = e.get<std::string>();
    if (name == "budget_saturation")
      hyp.nsc = true;
    else if (name == "inner_semicontinuous")
      hyp.inner_semicontinuous = true;
    else if (name == "upper_lipschitz_selection")
      hyp.upper_lipschitz_selection = true;
    else if (name == "strict_differentiability")
      hyp.strict_differentiability = true;
    else if (name == "directional_lipschitz")
      hyp.directional_lipschitz = true;
    else
      throw ConfigError("assertions: unknown assertion '" + name + "'");
  }
  return hyp;
}

inline LimitingMode parse_mode(const std::string& s, const std::string& where) {
  if (s == "inner_semicontinuous") return LimitingMode::inner_semicontinuous;
  if (s == "inner_semicompact") return LimitingMode::inner_semicompact;
  throw ConfigError(where + ": unknown mode '" + s + "'");
}

// nonfinite doubles serialize as strings so the report stays valid JSON
inline json num_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline json vec_json(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(num_json(x));
  return a;
}

inline json lambda_json(const LambdaSet& L) {
  switch (L.kind) {
    case LambdaKind::Empty:
      return json{{"kind", "empty"}};
    case LambdaKind::Singleton:
      return json{{"kind", "singleton"}, {"value", num_json(L.lo)}};
    case LambdaKind::Interval:
      return json{{"kind", "interval"}, {"lo", num_json(L.lo)}, {"hi", num_json(L.hi)}};
    case LambdaKind::Ray:
      return json{{"kind", "ray"}, {"lo", num_json(L.lo)}};
  }
  return json{};
}

inline json set_json(const RaySegmentSet& s) {
  json j;
  j["dim"] = s.dim;
  switch (s.kind) {
    case RaySegmentKind::Empty:
      j["kind"] = "empty";
      break;
    case RaySegmentKind::ZeroSingleton:
      j["kind"] = "zero";
      break;
    case RaySegmentKind::Union: {
      j["kind"] = "union";
      json segs = json::array();
      for (const auto& seg : s.segments)
        segs.push_back(json{{"base", vec_json(seg.base)}, {"lambda", lambda_json(seg.lambdas)}});
      j["segments"] = segs;
      break;
    }
  }
  return j;
}

inline const char* exactness_str(Exactness e) {
  switch (e) {
    case Exactness::exact: return "exact";
    case Exactness::upper_bound: return "upper_bound";
    case Exactness::empty_by_theorem: return "empty_by_theorem";
  }
  return "?";
}

inline const char* method_str(DemandMethod m) {
  switch (m) {
    case DemandMethod::closed_form: return "closed_form";
    case DemandMethod::projected_gradient: return "projected_gradient";
    case DemandMethod::grid: return "grid";
  }
  return "?";
}

inline json demand_json(const DemandResult& r) {
  json j;
  j["method"] = method_str(r.method);
  j["value"] = num_json(r.value);
  j["residual"] = num_json(r.residual);
  if (r.kind == MaximizerKind::Points) {
    j["kind"] = "points";
    json pts = json::array();
    for (const auto& x : r.points) pts.push_back(vec_json(x));
    j["points"] = pts;
  } else {
    j["kind"] = "interval";
    j["lo"] = num_json(r.lo);
    j["hi"] = num_json(r.hi);
  }
  return j;
}

inline std::string fmt_g(double x, int prec = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

inline std::string vec_str(const Vec& v, int prec = 6) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt_g(v[i], prec);
  }
  return s + "]";
}

inline std::string lambda_str(const LambdaSet& L) {
  switch (L.kind) {
    case LambdaKind::Empty: return "empty";
    case LambdaKind::Singleton: return "{" + fmt_g(L.lo) + "}";
    case LambdaKind::Interval: return "[" + fmt_g(L.lo) + ", " + fmt_g(L.hi) + "]";
    case LambdaKind::Ray: return "[" + fmt_g(L.lo) + ", inf)";
  }
  return "?";
}

inline std::string set_str(const RaySegmentSet& s) {
  switch (s.kind) {
    case RaySegmentKind::Empty:
      return "empty";
    case RaySegmentKind::ZeroSingleton:
      return "{0}";
    case RaySegmentKind::Union: {
      std::string out = "union{";
      for (std::size_t i = 0; i < s.segments.size(); ++i) {
        if (i) out += "; ";
        out += "base=" + vec_str(s.segments[i].base) + " lambda=" + lambda_str(s.segments[i].lambdas);
      }
      return out + "}";
    }
  }
  return "?";
}

inline std::filesystem::path resolve_output(const std::string& rel, const std::string& out_dir) {
  std::filesystem::path p(rel);
  if (p.is_absolute()) return p;
  return std::filesystem::path(out_dir) / p;
}

inline void write_series_file(const std::filesystem::path& path, const std::string& kind,
                              const std::string& columns,
                              const std::vector<std::string>& meta,
                              const std::vector<std::pair<double, double>>& rows) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open series file " + path.string());
  out << "# pricegrad-series/1 kind=" << kind << "\n";
  for (const auto& m : meta) out << "# " << m << "\n";
  out << "# columns: " << columns << "\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g\t%.17g\n", r.first, r.second);
    out << buf;
  }
  out.flush();
  if (!out.good()) throw IoError("failed writing series file " + path.string());
}

inline std::string join17(const Vec& v) {
  std::string s;
  char buf[48];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    if (i) s += ",";
    s += buf;
  }
  return s;
}

struct AnalysisContext {
  const UtilityModel& model;
  HypothesisAssertions assertions;
  double tolerance;
  std::uint64_t seed;
  std::string output_dir;
  int verbosity;
};

inline void say(const AnalysisContext& ctx, const std::string& line) {
  if (ctx.verbosity >= 0) std::cout << line << "\n";
}

inline json run_demand_analysis(const AnalysisContext& ctx, const json& a) {
  check_keys(a, {"kind", "price", "method", "grid_step", "grid_value_tol", "cross_check",
                 "cross_check_tol"},
             "analysis demand");
  Vec p = get_dim_vec(a, "price", ctx.model.dim, "analysis demand");
  SolveConfig scfg;
  scfg.grid_step = get_num_or(a, "grid_step", scfg.grid_step, "analysis demand");
  scfg.grid_value_tol = get_num_or(a, "grid_value_tol", scfg.grid_value_tol, "analysis demand");
  std::string method = get_str_or(a, "method", "auto", "analysis demand");

  DemandResult r;
  if (method == "auto")
    r = solve_demand(ctx.model, p, scfg);
  else if (method == "closed_form")
    r = demand_closed_form(ctx.model, p);
  else if (method == "projected_gradient")
    r = demand_projected_gradient(ctx.model, p, scfg.pg);
  else if (method == "grid")
    r = demand_grid(ctx.model, p, scfg.grid_step, scfg.grid_value_tol);
  else
    throw ConfigError("analysis demand: unknown method '" + method + "'");

  json out;
  out["kind"] = "demand";
  out["price"] = vec_json(p);
  out["result"] = demand_json(r);

  // advisory cross-check against the independent grid oracle; disagreement
  // marks the analysis indeterminate rather than failing the run
  if (get_bool_or(a, "cross_check", false, "analysis demand")) {
    json cc;
    if (ctx.model.dim > 2) {
      cc["ran"] = false;
      cc["note"] = "grid cross-check limited to dimension <= 2";
    } else {
      try {
        DemandResult g = demand_grid(ctx.model, p, scfg.grid_step, scfg.grid_value_tol);
        double cc_tol = get_num_or(a, "cross_check_tol", 1e-2, "analysis demand");
        bool agrees = std::abs(g.value - r.value) <= cc_tol * (1.0 + std::abs(r.value));
        cc["ran"] = true;
        cc["grid_value"] = num_json(g.value);
        cc["agrees"] = agrees;
        cc["indeterminate"] = !agrees;
      } catch (const SolverError& e) {
        cc["ran"] = false;
        cc["note"] = e.what();
      }
    }
    out["cross_check"] = cc;
  }

  std::string line = "demand @ p=" + vec_str(p) + ": value=" + fmt_g(r.value) +
                     " method=" + method_str(r.method);
  if (r.kind == MaximizerKind::Points)
    line += " points=" + std::to_string(r.points.size());
  else
    line += " interval=[" + fmt_g(r.lo) + ", " + fmt_g(r.hi) + "]";
  say(ctx, line);
  return out;
}

inline json subdiff_json_sections(const SubdiffReport& rep) {
  json j;
  j["price"] = vec_json(rep.price);
  j["frechet"] = set_json(rep.frechet);
  j["limiting"] = set_json(rep.limiting);
  j["singular"] = set_json(rep.singular);
  j["frechet_exactness"] = exactness_str(rep.frechet_exactness);
  j["limiting_exactness"] = exactness_str(rep.limiting_exactness);
  j["singular_exactness"] = exactness_str(rep.singular_exactness);
  j["hypotheses_used"] = rep.hypotheses_used;
  return j;
}

inline json run_subdiff_analysis(const AnalysisContext& ctx, const json& a) {
  check_keys(a, {"kind", "price", "mode", "tolerance"}, "analysis subdiff_report");
  Vec p = get_dim_vec(a, "price", ctx.model.dim, "analysis subdiff_report");
  LimitingMode mode = parse_mode(get_str(a, "mode", "analysis subdiff_report"), "analysis subdiff_report");
  double tol = get_num_or(a, "tolerance", ctx.tolerance, "analysis subdiff_report");
  SubdiffReport rep = subdiff_report_at(ctx.model, p, mode, tol, ctx.assertions);

  json out = subdiff_json_sections(rep);
  out["kind"] = "subdiff_report";
  say(ctx, "subdiff @ p=" + vec_str(p) + ": frechet=" + set_str(rep.frechet) +
              " limiting=" + set_str(rep.limiting) + " singular=" + set_str(rep.singular));
  if (ctx.verbosity > 0)
    for (const auto& h : rep.hypotheses_used) say(ctx, "  hypothesis: " + h);
  return out;
}

inline json run_rate_bounds_analysis(const AnalysisContext& ctx, const json& a) {
  check_keys(a, {"kind", "price", "mode", "directions", "tolerance"}, "analysis rate_bounds");
  Vec p = get_dim_vec(a, "price", ctx.model.dim, "analysis rate_bounds");
  LimitingMode mode = parse_mode(get_str(a, "mode", "analysis rate_bounds"), "analysis rate_bounds");
  double tol = get_num_or(a, "tolerance", ctx.tolerance, "analysis rate_bounds");
  const json& dirs = get_field(a, "directions", "analysis rate_bounds");
  if (!dirs.is_array() || dirs.empty())
    throw ConfigError("analysis rate_bounds: 'directions' must be a nonempty array");

  SubdiffReport rep = subdiff_report_at(ctx.model, p, mode, tol, ctx.assertions);
  json out;
  out["kind"] = "rate_bounds";
  out["price"] = vec_json(p);
  out["subdiff"] = subdiff_json_sections(rep);
  json bounds = json::array();
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    json wrap;
    wrap["direction"] = dirs[k];
    Vec q = get_dim_vec(wrap, "direction", ctx.model.dim, "analysis rate_bounds");
    RateBounds rb = rate_of_change_bounds(rep, q);
    bounds.push_back(json{{"direction", vec_json(q)},
                          {"upper", num_json(rb.upper)},
                          {"lower", num_json(rb.lower)},
                          {"clarke_support", num_json(rb.clarke_support)}});
    if (ctx.verbosity > 0)
      say(ctx, "  q=" + vec_str(q) + ": upper=" + fmt_g(rb.upper) + " lower=" + fmt_g(rb.lower) +
                  " alpha=" + fmt_g(rb.clarke_support));
  }
  out["bounds"] = bounds;
  say(ctx, "rate bounds @ p=" + vec_str(p) + ": " + std::to_string(dirs.size()) + " directions");
  return out;
}

inline json run_nsc_scan_analysis(const AnalysisContext& ctx, const json& a, std::uint64_t salt) {
  check_keys(a, {"kind", "prices", "price_count", "price_low", "price_high", "tolerance"},
             "analysis nsc_scan");
  double tol = get_num_or(a, "tolerance", 1e-6, "analysis nsc_scan");
  std::vector<PriceVector> prices;
  if (a.contains("prices")) {
    if (a.contains("price_count") || a.contains("price_low") || a.contains("price_high"))
      throw ConfigError("analysis nsc_scan: give either 'prices' or random-scan parameters");
    const json& pl = a.at("prices");
    if (!pl.is_array() || pl.empty())
      throw ConfigError("analysis nsc_scan: 'prices' must be a nonempty array");
    for (std::size_t i = 0; i < pl.size(); ++i) {
      json wrap;
      wrap["p"] = pl[i];
      prices.push_back(get_dim_vec(wrap, "p", ctx.model.dim, "analysis nsc_scan"));
    }
  } else {
    int count = static_cast<int>(get_num_or(a, "price_count", 100, "analysis nsc_scan"));
    double lo = get_num_or(a, "price_low", 0.1, "analysis nsc_scan");
    double hi = get_num_or(a, "price_high", 3.0, "analysis nsc_scan");
    if (count < 1 || !(lo > 0.0) || !(hi > lo))
      throw ConfigError("analysis nsc_scan: need price_count >= 1 and 0 < price_low < price_high");
    Rng rng(ctx.seed ^ salt);
    for (int i = 0; i < count; ++i) prices.push_back(rng.uniform_vec(ctx.model.dim, lo, hi));
  }

  SolveConfig scfg;
  SaturationReport sat = check_budget_saturation(
      ctx.model, prices,
      [&](const PriceVector& p) { return solve_demand(ctx.model, p, scfg); }, tol);

  json out;
  out["kind"] = "nsc_scan";
  out["prices_checked"] = sat.prices_checked;
  out["points_checked"] = sat.points_checked;
  out["passed"] = sat.passed();
  json viol = json::array();
  for (const auto& v : sat.violations)
    viol.push_back(json{{"price", vec_json(v.price)},
                        {"bundle", vec_json(v.bundle)},
                        {"budget_value", num_json(v.budget_value)}});
  out["violations"] = viol;
  say(ctx, "nsc scan: " + std::to_string(sat.prices_checked) + " prices, " +
              std::to_string(sat.points_checked) + " points, violations=" +
              std::to_string(sat.violations.size()) + (sat.passed() ? " (pass)" : " (fail)"));
  return out;
}

inline json run_aubin_analysis(const AnalysisContext& ctx, const json& a, std::uint64_t salt) {
  check_keys(a, {"kind", "price", "bundle", "radius_p", "radius_x", "samples"},
             "analysis aubin_test");
  Vec p = get_dim_vec(a, "price", ctx.model.dim, "analysis aubin_test");
  Vec x = get_dim_vec(a, "bundle", ctx.model.dim, "analysis aubin_test");
  if (!budget_contains(p, x, 1e-9))
    throw ConfigError("analysis aubin_test: bundle lies outside the budget set");
  AubinConfig acfg;
  acfg.radius_p = get_num_or(a, "radius_p", acfg.radius_p, "analysis aubin_test");
  acfg.radius_x = get_num_or(a, "radius_x", acfg.radius_x, "analysis aubin_test");
  acfg.samples = static_cast<int>(get_num_or(a, "samples", acfg.samples, "analysis aubin_test"));
  acfg.seed = ctx.seed ^ salt;
  AubinReport rep = aubin_inclusion_test(p, x, acfg);

  json out;
  out["kind"] = "aubin_test";
  out["price"] = vec_json(p);
  out["bundle"] = vec_json(x);
  out["found"] = rep.found;
  out["ell"] = num_json(rep.ell);
  out["sup_ratio"] = num_json(rep.sup_ratio);
  out["samples_used"] = rep.samples_used;
  say(ctx, std::string("aubin test @ p=") + vec_str(p) +
              (rep.found ? ": ell=" + fmt_g(rep.ell) + " sup_ratio=" + fmt_g(rep.sup_ratio)
                         : ": no certificate on the grid") +
              " samples=" + std::to_string(rep.samples_used));
  return out;
}

inline json run_series_analysis(const AnalysisContext& ctx, const json& a) {
  std::string skind = get_str(a, "series_kind", "analysis series");
  std::string rel_path = get_str(a, "path", "analysis series");
  std::filesystem::path path = resolve_output(rel_path, ctx.output_dir);
  std::vector<std::pair<double, double>> rows;
  std::vector<std::string> meta;
  std::string columns;

  if (skind == "v_along_ray") {
    if (a.contains("p_min")) {
      check_keys(a, {"kind", "series_kind", "path", "p_min", "p_max", "count"}, "analysis series");
      if (ctx.model.dim != 1)
        throw ConfigError("analysis series: scalar price range needs a 1-D model");
      double lo = get_num(a, "p_min", "analysis series");
      double hi = get_num(a, "p_max", "analysis series");
      int count = static_cast<int>(get_num_or(a, "count", 100, "analysis series"));
      if (!(lo > 0.0) || hi < lo || count < 1)
        throw ConfigError("analysis series: need 0 < p_min <= p_max and count >= 1");
      int n = (hi == lo) ? 1 : count;
      for (int j = 0; j < n; ++j) {
        double p = (n == 1) ? lo : lo + (hi - lo) * static_cast<double>(j) / (n - 1);
        rows.emplace_back(p, indirect_utility(ctx.model, {p}));
      }
      meta.push_back("p_min=" + fmt_g(lo, 17) + " p_max=" + fmt_g(hi, 17) +
                     " count=" + std::to_string(n));
      columns = "p v";
    } else {
      check_keys(a, {"kind", "series_kind", "path", "price", "direction", "t_min", "t_max",
                     "count"},
                 "analysis series");
      Vec p = get_dim_vec(a, "price", ctx.model.dim, "analysis series");
      Vec q = get_dim_vec(a, "direction", ctx.model.dim, "analysis series");
      double t0 = get_num(a, "t_min", "analysis series");
      double t1 = get_num(a, "t_max", "analysis series");
      int count = static_cast<int>(get_num_or(a, "count", 100, "analysis series"));
      if (t1 < t0 || count < 1)
        throw ConfigError("analysis series: need t_min <= t_max and count >= 1");
      for (double t : {t0, t1}) {
        Vec pt = add_scaled(p, t, q);
        for (double c : pt)
          if (!(c > 0.0))
            throw ConfigError("analysis series: ray leaves the interior price region");
      }
      int n = (t1 == t0) ? 1 : count;
      for (int j = 0; j < n; ++j) {
        double t = (n == 1) ? t0 : t0 + (t1 - t0) * static_cast<double>(j) / (n - 1);
        rows.emplace_back(t, indirect_utility(ctx.model, add_scaled(p, t, q)));
      }
      meta.push_back("price=" + join17(p) + " direction=" + join17(q));
      meta.push_back("t_min=" + fmt_g(t0, 17) + " t_max=" + fmt_g(t1, 17) +
                     " count=" + std::to_string(n));
      columns = "t v";
    }
  } else if (skind == "dini_trace") {
    check_keys(a, {"kind", "series_kind", "path", "price", "direction", "t0", "ratio", "count"},
               "analysis series");
    Vec p = get_dim_vec(a, "price", ctx.model.dim, "analysis series");
    Vec q = get_dim_vec(a, "direction", ctx.model.dim, "analysis series");
    SamplingSchedule sched;
    sched.t0 = get_num_or(a, "t0", sched.t0, "analysis series");
    sched.ratio = get_num_or(a, "ratio", sched.ratio, "analysis series");
    sched.count = static_cast<int>(get_num_or(a, "count", sched.count, "analysis series"));
    sched.validate();
    Vec far = add_scaled(p, sched.t0, q);
    for (double c : far)
      if (!(c > 0.0)) throw ConfigError("analysis series: ray leaves the interior price region");
    double v0 = indirect_utility(ctx.model, p);
    double t = sched.t0;
    for (int k = 0; k < sched.count; ++k, t *= sched.ratio)
      rows.emplace_back(t, (indirect_utility(ctx.model, add_scaled(p, t, q)) - v0) / t);
    meta.push_back("price=" + join17(p) + " direction=" + join17(q));
    meta.push_back("t0=" + fmt_g(sched.t0, 17) + " ratio=" + fmt_g(sched.ratio, 17) +
                   " count=" + std::to_string(sched.count));
    columns = "t quotient";
  } else {
    throw ConfigError("analysis series: unknown series_kind '" + skind + "'");
  }

  meta.insert(meta.begin(), "model=" + std::string(utility_kind_name(ctx.model.kind)));
  write_series_file(path, skind, columns, meta, rows);

  json out;
  out["kind"] = "series";
  out["series_kind"] = skind;
  out["path"] = rel_path;
  out["rows"] = rows.size();
  say(ctx, "series " + skind + " -> " + path.string() + " (" + std::to_string(rows.size()) +
              " rows)");
  return out;
}

inline int run_impl(const RunOptions& opt) {
  std::ifstream in(opt.config_path);
  if (!in) throw IoError("cannot read config " + opt.config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse: ") + e.what());
  }

  check_keys(cfg, {"format", "seed", "tolerance", "model", "assertions", "analyses", "output"},
             "config");
  if (get_str(cfg, "format", "config") != "pricegrad-config/1")
    throw ConfigError("config: expected format tag 'pricegrad-config/1'");

  UtilityModel model = parse_model(get_field(cfg, "model", "config"));
  HypothesisAssertions hyp =
      cfg.contains("assertions") ? parse_assertions(cfg.at("assertions")) : HypothesisAssertions{};
  double tolerance = get_num_or(cfg, "tolerance", 1e-9, "config");
  if (!(tolerance > 0.0)) throw ConfigError("config: tolerance must be positive");
  std::uint64_t seed = opt.seed_override
                           ? *opt.seed_override
                           : static_cast<std::uint64_t>(get_num_or(cfg, "seed", 1, "config"));

  std::string report_rel = "report.json";
  if (cfg.contains("output")) {
    check_keys(cfg.at("output"), {"report"}, "output");
    report_rel = get_str_or(cfg.at("output"), "report", report_rel, "output");
  }

  AnalysisContext ctx{model, hyp, tolerance, seed, opt.output_dir, opt.verbosity};

  json report;
  report["format"] = "pricegrad-report/1";
  report["config"] = opt.config_path;
  report["seed"] = seed;
  report["tolerance"] = num_json(tolerance);
  report["model"] = cfg.at("model");
  report["assertions"] = cfg.contains("assertions") ? cfg.at("assertions") : json::array();

  json sections = json::array();
  const json analyses = cfg.contains("analyses") ? cfg.at("analyses") : json::array();
  if (!analyses.is_array()) throw ConfigError("config: 'analyses' must be an array");
  for (std::size_t i = 0; i < analyses.size(); ++i) {
    const json& a = analyses[i];
    if (!a.is_object()) throw ConfigError("analyses: entries must be objects");
    std::string kind = get_str(a, "kind", "analysis");
    std::uint64_t salt = 0x9e3779b97f4a7c15ULL * (i + 1);
    if (kind == "demand")
      sections.push_back(run_demand_analysis(ctx, a));
    else if (kind == "subdiff_report")
      sections.push_back(run_subdiff_analysis(ctx, a));
    else if (kind == "rate_bounds")
      sections.push_back(run_rate_bounds_analysis(ctx, a));
    else if (kind == "nsc_scan")
      sections.push_back(run_nsc_scan_analysis(ctx, a, salt));
    else if (kind == "aubin_test")
      sections.push_back(run_aubin_analysis(ctx, a, salt));
    else if (kind == "series")
      sections.push_back(run_series_analysis(ctx, a));
    else
      throw ConfigError("analysis: unknown kind '" + kind + "'");
  }
  report["analyses"] = sections;

  std::filesystem::path report_path = resolve_output(report_rel, opt.output_dir);
  std::error_code ec;
  if (report_path.has_parent_path())
    std::filesystem::create_directories(report_path.parent_path(), ec);
  std::ofstream out(report_path);
  if (!out) throw IoError("cannot open report file " + report_path.string());
  out << report.dump(2) << "\n";
  out.flush();
  if (!out.good()) throw IoError("failed writing report file " + report_path.string());
  say(ctx, "report -> " + report_path.string());
  return 0;
}

}  // namespace detail

inline int run(const RunOptions& opt) {
  try {
    return detail::run_impl(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis error: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 5;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pricegrad
