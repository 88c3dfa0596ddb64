#pragma once

// JSON run configuration. Every object is checked against its key list, so
// misspelled keys fail validation instead of silently taking defaults.

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ado/convergence.hpp"
#include "ado/error.hpp"
#include "ado/nodal_problem.hpp"
#include "ado/oracle.hpp"
#include "ado/quadrature.hpp"
#include "ado/scattering.hpp"
#include "ado/slab_problem.hpp"

namespace ado::cli {

using json = nlohmann::json;

enum class Mode { Solve1d, Solve2d, Oracle1d, Oracle2d, Quad, Converge, Benchmark };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Solve1d: return "solve1d";
    case Mode::Solve2d: return "solve2d";
    case Mode::Oracle1d: return "oracle1d";
    case Mode::Oracle2d: return "oracle2d";
    case Mode::Quad: return "quad";
    case Mode::Converge: return "converge";
    case Mode::Benchmark: return "benchmark";
  }
  return "unknown";
}

struct QuadSpec {
  std::string scheme = "gauss";  // gauss (half-range), lqn, pntn, pntnsn
  int order = 2;
};

struct BenchmarkSpec {
  std::string name = "fig7";
  double sigma_s = 0.9;
  QuadSpec quad{"lqn", 4};
  int h = 2, k = 2;
  PhasePath phase_path = PhasePath::Exact;
  LinearSolver solver = LinearSolver::SparseLU;
};

struct RunConfig {
  Mode mode = Mode::Solve1d;
  json raw;  // the validated input, echoed into the manifest
  std::string output_dir = "ado-out";
  std::vector<std::string> plots;
  int tau_points = 11;
  std::vector<double> tau;  // explicit sample points; overrides tau_points
  int verbosity = 0;

  std::optional<SlabProblem> slab;
  std::optional<NodalProblem> nodal;
  QuadSpec quad;
  oracle::OracleConfig oracle;
  int oracle_nx = 64, oracle_ny = 64;
  RefinementSeries series;
  BenchmarkSpec benchmark;
};

[[noreturn]] inline void schema_error(const std::string& where, const std::string& msg) {
  fail(ErrorCategory::InvalidArgument, "schema: " + where + ": " + msg);
}

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) schema_error(where, "expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) schema_error(where, "unknown key '" + key + "'");
}

inline const json& required(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) schema_error(where, "missing key '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where, "expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) schema_error(where, "expected an integer");
  return j.get<int>();
}

inline std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) schema_error(where, "expected a string");
  return j.get<std::string>();
}

inline std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

inline double number_or(const json& j, const std::string& key, double def, const std::string& where) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : def;
}

inline PhaseFunction parse_phase(const json& j, const std::string& where) {
  check_keys(j, {"g", "order", "coefficients"}, where);
  if (j.contains("coefficients")) {
    if (j.contains("g") || j.contains("order")) schema_error(where, "give either g/order or coefficients");
    return phase_from_coefficients(numbers(j.at("coefficients"), where + ".coefficients"));
  }
  if (!j.contains("g")) return isotropic_phase();
  const double g = number(j.at("g"), where + ".g");
  const int order = integer(required(j, "order", where), where + ".order");
  return hg_coefficients(g, order);
}

inline QuadSpec parse_quad(const json& j, const std::string& where) {
  check_keys(j, {"scheme", "order"}, where);
  QuadSpec q;
  q.scheme = j.contains("scheme") ? text(j.at("scheme"), where + ".scheme") : "gauss";
  q.order = integer(required(j, "order", where), where + ".order");
  if (q.scheme != "gauss" && q.scheme != "lqn" && q.scheme != "pntn" && q.scheme != "pntnsn")
    schema_error(where + ".scheme", "expected gauss, lqn, pntn or pntnsn");
  return q;
}

inline SphereScheme sphere_scheme(const std::string& name, const std::string& where) {
  if (name == "lqn") return SphereScheme::LevelSymmetric;
  if (name == "pntn") return SphereScheme::LegendreChebyshevQuad;
  if (name == "pntnsn") return SphereScheme::LegendreChebyshevTri;
  schema_error(where, "expected lqn, pntn or pntnsn");
}

inline std::vector<double> parse_incidence(const json& j, const HalfRangeQuadrature& q, const std::string& where) {
  check_keys(j, {"type", "value", "power", "values"}, where);
  const std::string type = text(required(j, "type", where), where + ".type");
  if (type == "vacuum") return {};
  if (type == "constant") return constant_incidence(q, number(required(j, "value", where), where + ".value"));
  if (type == "cosine-power")
    return cosine_power_incidence(q, number(required(j, "value", where), where + ".value"),
                                  number(required(j, "power", where), where + ".power"));
  if (type == "values") {
    auto v = numbers(required(j, "values", where), where + ".values");
    if (v.size() != q.size()) schema_error(where + ".values", "need one value per quadrature node");
    return v;
  }
  schema_error(where + ".type", "expected vacuum, constant, cosine-power or values");
}

inline std::vector<std::vector<double>> parse_polynomials(const json& j, std::size_t n, const std::string& where) {
  if (!j.is_array() || j.size() != n) schema_error(where, "need one coefficient list per quadrature node");
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < n; ++k) {
    auto row = numbers(j[k], where + "[" + std::to_string(k) + "]");
    if (static_cast<int>(row.size()) > SlabSource::kMaxDegree + 1)
      schema_error(where, "polynomial degree above " + std::to_string(SlabSource::kMaxDegree));
    out.push_back(std::move(row));
  }
  return out;
}

inline SlabProblem parse_slab(const json& j) {
  const std::string w = "slab";
  check_keys(j, {"tau", "albedo", "phase", "quadrature", "left", "right", "source"}, w);
  SlabProblem p;
  const auto tau = numbers(required(j, "tau", w), w + ".tau");
  if (tau.size() != 2) schema_error(w + ".tau", "expected [tau_a, tau_b]");
  p.tau_a = tau[0];
  p.tau_b = tau[1];
  p.albedo = number(required(j, "albedo", w), w + ".albedo");
  if (j.contains("phase")) p.phase = parse_phase(j.at("phase"), w + ".phase");
  const auto qs = parse_quad(required(j, "quadrature", w), w + ".quadrature");
  if (qs.scheme != "gauss") schema_error(w + ".quadrature.scheme", "slab problems use the gauss half-range set");
  p.quad = half_range_gauss(qs.order);
  auto side = [&](const char* name, std::vector<double>& f, double& rs, double& rd) {
    if (!j.contains(name)) return;
    const std::string ws = w + "." + name;
    const json& s = j.at(name);
    check_keys(s, {"incidence", "specular", "diffuse"}, ws);
    if (s.contains("incidence")) f = parse_incidence(s.at("incidence"), p.quad, ws + ".incidence");
    rs = number_or(s, "specular", 0.0, ws);
    rd = number_or(s, "diffuse", 0.0, ws);
  };
  side("left", p.f1, p.rho1s, p.rho1d);
  side("right", p.f2, p.rho2s, p.rho2d);
  if (j.contains("source")) {
    const json& s = j.at("source");
    const std::string ws = w + ".source";
    check_keys(s, {"constant", "plus", "minus"}, ws);
    if (s.contains("constant")) {
      if (s.contains("plus") || s.contains("minus")) schema_error(ws, "give either constant or plus/minus");
      p.source = SlabSource::isotropic_constant(static_cast<int>(p.quad.size()), number(s.at("constant"), ws + ".constant"));
    } else {
      if (s.contains("plus")) p.source.plus = parse_polynomials(s.at("plus"), p.quad.size(), ws + ".plus");
      if (s.contains("minus")) p.source.minus = parse_polynomials(s.at("minus"), p.quad.size(), ws + ".minus");
    }
  }
  return p;
}

inline std::vector<double> parse_lines(const json& j, const std::string& key, const std::string& where) {
  const std::string w = where + "." + key;
  if (j.at(key).is_object()) {
    const json& u = j.at(key);
    check_keys(u, {"length", "cells"}, w);
    const double length = number(required(u, "length", w), w + ".length");
    const int cells = integer(required(u, "cells", w), w + ".cells");
    if (!(length > 0.0) || cells < 1) schema_error(w, "need length > 0 and cells >= 1");
    return uniform_lines(length, cells);
  }
  return numbers(j.at(key), w);
}

inline NodalMaterial parse_material(const json& j, const std::string& where) {
  check_keys(j, {"sigma_t", "sigma_s", "source", "phase"}, where);
  NodalMaterial m;
  m.sigma_t = number(required(j, "sigma_t", where), where + ".sigma_t");
  m.sigma_s = number_or(j, "sigma_s", 0.0, where);
  m.source = number_or(j, "source", 0.0, where);
  if (j.contains("phase")) m.phase = parse_phase(j.at("phase"), where + ".phase");
  return m;
}

inline EdgeCondition parse_edge(const json& j, const SphereQuadrature& q, const std::string& where) {
  check_keys(j, {"type", "value", "values"}, where);
  const std::string type = text(required(j, "type", where), where + ".type");
  EdgeCondition e;
  if (type == "vacuum") return e;
  if (type == "constant") {
    e.value.assign(q.size(), number(required(j, "value", where), where + ".value"));
    return e;
  }
  if (type == "values") {
    e.value = numbers(required(j, "values", where), where + ".values");
    if (e.value.size() != q.size()) schema_error(where + ".values", "need one value per direction");
    return e;
  }
  schema_error(where + ".type", "expected vacuum, constant or values");
}

inline PhasePath parse_phase_path(const json& j, const std::string& where) {
  const std::string s = text(j, where);
  if (s == "exact") return PhasePath::Exact;
  if (s == "expanded") return PhasePath::Expanded;
  schema_error(where, "expected exact or expanded");
}

inline LinearSolver parse_solver(const json& j, const std::string& where) {
  const std::string s = text(j, where);
  if (s == "sparse-lu") return LinearSolver::SparseLU;
  if (s == "bicgstab") return LinearSolver::BiCGSTAB;
  schema_error(where, "expected sparse-lu or bicgstab");
}

inline NodalProblem parse_nodal(const json& j) {
  const std::string w = "nodal";
  check_keys(j, {"x_lines", "y_lines", "materials", "quadrature", "boundary", "phase_path", "solver",
                 "iterative_tolerance"},
             w);
  NodalProblem p;
  required(j, "x_lines", w);
  required(j, "y_lines", w);
  p.x_lines = parse_lines(j, "x_lines", w);
  p.y_lines = parse_lines(j, "y_lines", w);
  const auto qs = parse_quad(required(j, "quadrature", w), w + ".quadrature");
  p.quad = make_sphere_quadrature(sphere_scheme(qs.scheme, w + ".quadrature.scheme"), qs.order);
  const json& mats = required(j, "materials", w);
  if (!mats.is_array() || mats.empty()) schema_error(w + ".materials", "expected a non-empty array");
  const int regions = (static_cast<int>(p.x_lines.size()) - 1) * (static_cast<int>(p.y_lines.size()) - 1);
  if (mats.size() != 1 && static_cast<int>(mats.size()) != regions)
    schema_error(w + ".materials", "give one material or one per region (" + std::to_string(regions) + ")");
  for (int r = 0; r < regions; ++r) {
    const std::size_t i = mats.size() == 1 ? 0 : static_cast<std::size_t>(r);
    p.materials.push_back(parse_material(mats[i], w + ".materials[" + std::to_string(i) + "]"));
  }
  if (j.contains("boundary")) {
    const json& b = j.at("boundary");
    check_keys(b, {"left", "right", "bottom", "top"}, w + ".boundary");
    if (b.contains("left")) p.left = parse_edge(b.at("left"), p.quad, w + ".boundary.left");
    if (b.contains("right")) p.right = parse_edge(b.at("right"), p.quad, w + ".boundary.right");
    if (b.contains("bottom")) p.bottom = parse_edge(b.at("bottom"), p.quad, w + ".boundary.bottom");
    if (b.contains("top")) p.top = parse_edge(b.at("top"), p.quad, w + ".boundary.top");
  }
  if (j.contains("phase_path")) p.phase_path = parse_phase_path(j.at("phase_path"), w + ".phase_path");
  if (j.contains("solver")) p.solver = parse_solver(j.at("solver"), w + ".solver");
  p.iterative_tolerance = number_or(j, "iterative_tolerance", p.iterative_tolerance, w);
  validate(p);
  return p;
}

inline void parse_oracle(const json& j, RunConfig& c) {
  const std::string w = "oracle";
  check_keys(j, {"resolution", "tolerance", "max_iterations", "mesh"}, w);
  if (j.contains("resolution")) c.oracle.resolution = integer(j.at("resolution"), w + ".resolution");
  c.oracle.tolerance = number_or(j, "tolerance", c.oracle.tolerance, w);
  if (j.contains("max_iterations")) c.oracle.max_iterations = integer(j.at("max_iterations"), w + ".max_iterations");
  if (j.contains("mesh")) {
    const json& m = j.at("mesh");
    if (!m.is_array() || m.size() != 2) schema_error(w + ".mesh", "expected [nx, ny]");
    c.oracle_nx = integer(m[0], w + ".mesh[0]");
    c.oracle_ny = integer(m[1], w + ".mesh[1]");
    if (c.oracle_nx < 1 || c.oracle_ny < 1) schema_error(w + ".mesh", "cell counts must be positive");
  }
  oracle::check(c.oracle);
}

inline RefinementSeries parse_series(const json& j) {
  const std::string w = "series";
  check_keys(j, {"h", "value"}, w);
  return make_series(numbers(required(j, "h", w), w + ".h"), numbers(required(j, "value", w), w + ".value"));
}

inline BenchmarkSpec parse_benchmark(const json& j) {
  const std::string w = "benchmark";
  check_keys(j, {"name", "sigma_s", "quadrature", "mesh", "phase_path", "solver"}, w);
  BenchmarkSpec b;
  b.name = text(required(j, "name", w), w + ".name");
  if (b.name != "fig7") schema_error(w + ".name", "unknown benchmark '" + b.name + "'");
  b.sigma_s = number(required(j, "sigma_s", w), w + ".sigma_s");
  if (j.contains("quadrature")) b.quad = parse_quad(j.at("quadrature"), w + ".quadrature");
  sphere_scheme(b.quad.scheme, w + ".quadrature.scheme");
  if (j.contains("mesh")) {
    const json& m = j.at("mesh");
    if (!m.is_array() || m.size() != 2) schema_error(w + ".mesh", "expected [H, K]");
    b.h = integer(m[0], w + ".mesh[0]");
    b.k = integer(m[1], w + ".mesh[1]");
  }
  if (b.h < 2 || b.k < 2 || b.h % 2 || b.k % 2) schema_error(w + ".mesh", "H and K must be even and >= 2");
  if (j.contains("phase_path")) b.phase_path = parse_phase_path(j.at("phase_path"), w + ".phase_path");
  if (j.contains("solver")) b.solver = parse_solver(j.at("solver"), w + ".solver");
  return b;
}

inline Mode parse_mode(const json& j) {
  const std::string s = text(j, "mode");
  for (Mode m : {Mode::Solve1d, Mode::Solve2d, Mode::Oracle1d, Mode::Oracle2d, Mode::Quad, Mode::Converge,
                 Mode::Benchmark})
    if (s == to_string(m)) return m;
  schema_error("mode", "unknown mode '" + s + "'");
}

inline const char* default_plot(Mode m) {
  switch (m) {
    case Mode::Solve1d:
    case Mode::Oracle1d: return "density-vs-tau";
    case Mode::Solve2d:
    case Mode::Oracle2d:
    case Mode::Benchmark: return "flux-map";
    case Mode::Converge: return "convergence-curve";
    case Mode::Quad: return "";
  }
  return "";
}

}  // namespace detail

/// Validates a parsed document and builds every problem it describes.
/// Nothing here runs a solver.
inline RunConfig parse_config(const json& j) {
  using namespace detail;
  check_keys(j, {"mode", "verbosity", "output", "slab", "nodal", "oracle", "quadrature", "series", "benchmark",
                 "manifest"},
             "config");
  RunConfig c;
  c.raw = j;
  c.raw.erase("manifest");
  c.mode = parse_mode(required(j, "mode", "config"));
  if (j.contains("verbosity")) c.verbosity = integer(j.at("verbosity"), "verbosity");

  std::set<std::string> needed, allowed = {"mode", "verbosity", "output", "manifest"};
  switch (c.mode) {
    case Mode::Solve1d: needed = {"slab"}; allowed.insert("oracle"); break;
    case Mode::Oracle1d: needed = {"slab"}; allowed.insert("oracle"); break;
    case Mode::Solve2d: needed = {"nodal"}; allowed.insert("oracle"); break;
    case Mode::Oracle2d: needed = {"nodal"}; allowed.insert("oracle"); break;
    case Mode::Quad: needed = {"quadrature"}; break;
    case Mode::Converge: needed = {"series"}; break;
    case Mode::Benchmark: needed = {"benchmark"}; break;
  }
  for (const auto& k : needed) {
    required(j, k, "config");
    allowed.insert(k);
  }
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) schema_error("config", "key '" + key + "' does not apply to mode " + to_string(c.mode));

  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, {"dir", "plots", "tau_points", "tau"}, "output");
    if (o.contains("dir")) c.output_dir = text(o.at("dir"), "output.dir");
    if (o.contains("plots")) {
      if (!o.at("plots").is_array()) schema_error("output.plots", "expected an array of strings");
      for (const auto& k : o.at("plots")) c.plots.push_back(text(k, "output.plots"));
    }
    if (o.contains("tau_points")) c.tau_points = integer(o.at("tau_points"), "output.tau_points");
    if (o.contains("tau")) c.tau = numbers(o.at("tau"), "output.tau");
  }
  if (c.tau_points < 2) schema_error("output.tau_points", "need at least 2 points");
  if (!j.contains("output") || !j.at("output").contains("plots")) {
    const std::string def = default_plot(c.mode);
    if (!def.empty()) c.plots.push_back(def);
  }
  for (const auto& k : c.plots) {
    if (k != "density-vs-tau" && k != "flux-map" && k != "convergence-curve")
      fail(ErrorCategory::InvalidArgument, "usage: unknown plot kind '" + k + "'");
    if (k != default_plot(c.mode))
      fail(ErrorCategory::InvalidArgument, "usage: plot kind '" + k + "' does not apply to mode " + to_string(c.mode));
  }

  if (j.contains("slab")) {
    c.slab = parse_slab(j.at("slab"));
    for (double t : c.tau)
      if (t < c.slab->tau_a || t > c.slab->tau_b) schema_error("output.tau", "sample point outside the slab");
  }
  if (j.contains("nodal")) c.nodal = parse_nodal(j.at("nodal"));
  if (j.contains("oracle")) parse_oracle(j.at("oracle"), c);
  if (j.contains("quadrature")) c.quad = parse_quad(j.at("quadrature"), "quadrature");
  if (j.contains("series")) c.series = parse_series(j.at("series"));
  if (j.contains("benchmark")) c.benchmark = parse_benchmark(j.at("benchmark"));
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCategory::InvalidArgument, std::string("schema: config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace ado::cli
