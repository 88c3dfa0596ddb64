#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ado/benchmarks.hpp"
#include "ado/cli/config.hpp"
#include "ado/cli/csv.hpp"
#include "ado/convergence.hpp"
#include "ado/nodal.hpp"
#include "ado/oracle.hpp"
#include "ado/quadrature.hpp"
#include "ado/slab.hpp"

namespace ado::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "ADO_OUTPUT_DIR";

enum ExitCode { kOk = 0, kUsage = 2, kNumerical = 3, kIo = 4 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOutput {
  std::vector<std::pair<std::string, std::string>> files;  // name, contents; first is the primary table
  json diagnostics = json::object();
};

namespace detail {

inline std::vector<double> sample_points(const RunConfig& c) {
  if (!c.tau.empty()) return c.tau;
  std::vector<double> t(c.tau_points);
  const double a = c.slab->tau_a, b = c.slab->tau_b;
  for (int i = 0; i < c.tau_points; ++i) t[i] = i == c.tau_points - 1 ? b : a + (b - a) * i / (c.tau_points - 1);
  return t;
}

inline std::string num(double v) { return format_number(v); }

inline void slab_tables(const std::vector<double>& tau, const std::vector<double>& mu,
                        const std::vector<std::vector<double>>& plus, const std::vector<std::vector<double>>& minus,
                        const std::vector<double>& dens, RunOutput& out) {
  CsvTable d({"tau", "density"});
  CsvTable in({"tau", "mu", "intensity"});
  const std::size_t n = mu.size();
  for (std::size_t i = 0; i < tau.size(); ++i) {
    d.row({num(tau[i]), num(dens[i])});
    for (std::size_t k = n; k-- > 0;) in.row({num(tau[i]), num(-mu[k]), num(minus[i][k])});
    for (std::size_t k = 0; k < n; ++k) in.row({num(tau[i]), num(mu[k]), num(plus[i][k])});
  }
  out.files.emplace_back("density-vs-tau.csv", d.str());
  out.files.emplace_back("intensity.csv", in.str());
}

inline RunOutput run_solve1d(const RunConfig& c) {
  const auto s = ado::solve(*c.slab);
  const auto tau = sample_points(c);
  std::vector<std::vector<double>> plus, minus;
  std::vector<double> dens;
  for (double t : tau) {
    Eigen::VectorXd ip, im;
    intensities(s, t, ip, im);
    plus.emplace_back(ip.data(), ip.data() + ip.size());
    minus.emplace_back(im.data(), im.data() + im.size());
    dens.push_back(density(s, t));
  }
  RunOutput out;
  slab_tables(tau, s.problem.quad.mu, plus, minus, dens, out);
  out.diagnostics = {{"eigen_residual", s.basis.max_residual},
                     {"boundary_residual", s.bc_residual},
                     {"rcond", s.rcond},
                     {"degenerate", s.basis.degenerate},
                     {"net_current_a", net_current(s, s.problem.tau_a)},
                     {"net_current_b", net_current(s, s.problem.tau_b)},
                     {"warnings", s.basis.warnings}};
  return out;
}

// Linear interpolation on the oracle mesh.
inline double interpolate(const std::vector<double>& x, const std::vector<double>& y, double t) {
  auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  if (i + 1 >= x.size()) return y.back();
  const double f = (t - x[i]) / (x[i + 1] - x[i]);
  return (1.0 - f) * y[i] + f * y[i + 1];
}

inline RunOutput run_oracle1d(const RunConfig& c) {
  const auto ref = oracle::slab_reference(*c.slab, c.oracle);
  const auto tau = sample_points(c);
  const std::size_t n = c.slab->quad.size();
  std::vector<std::vector<double>> plus(tau.size(), std::vector<double>(n)), minus = plus;
  std::vector<double> dens;
  std::vector<double> column(ref.tau.size());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < ref.tau.size(); ++i) column[i] = ref.plus[i][k];
    for (std::size_t j = 0; j < tau.size(); ++j) plus[j][k] = interpolate(ref.tau, column, tau[j]);
    for (std::size_t i = 0; i < ref.tau.size(); ++i) column[i] = ref.minus[i][k];
    for (std::size_t j = 0; j < tau.size(); ++j) minus[j][k] = interpolate(ref.tau, column, tau[j]);
  }
  for (double t : tau) dens.push_back(interpolate(ref.tau, ref.density, t));
  RunOutput out;
  slab_tables(tau, c.slab->quad.mu, plus, minus, dens, out);
  out.diagnostics = {{"iterations", ref.iterations}, {"resolution", c.oracle.resolution}};
  return out;
}

inline CsvTable flux_map(const NodalProblem& p, const std::vector<double>& flux) {
  CsvTable t({"region", "h", "k", "x0", "x1", "y0", "y1", "flux"});
  for (int r = 0; r < p.regions(); ++r) {
    const int h = r % p.nx(), k = r / p.nx();
    t.row({std::to_string(r), std::to_string(h), std::to_string(k), num(p.x_lines[h]), num(p.x_lines[h + 1]),
           num(p.y_lines[k]), num(p.y_lines[k + 1]), num(flux[r])});
  }
  return t;
}

inline json nodal_diagnostics(const NodalSolution& s) {
  double balance = 0.0;
  for (int r = 0; r < s.problem.regions(); ++r) balance = std::max(balance, balance_residual(s, r));
  return {{"system_size", s.system_size()},
          {"system_residual", s.system_residual},
          {"ode_residual", ode_residual(s)},
          {"balance_residual", balance}};
}

inline RunOutput run_solve2d(const RunConfig& c) {
  const auto s = assemble_and_solve(*c.nodal);
  std::vector<double> flux(c.nodal->regions());
  for (int r = 0; r < c.nodal->regions(); ++r) flux[r] = region_scalar_flux(s, r);
  RunOutput out;
  out.files.emplace_back("flux-map.csv", flux_map(*c.nodal, flux).str());
  out.diagnostics = nodal_diagnostics(s);
  return out;
}

inline RunOutput run_oracle2d(const RunConfig& c) {
  const auto d = oracle::dd2d(*c.nodal, c.oracle, c.oracle_nx, c.oracle_ny);
  RunOutput out;
  out.files.emplace_back("flux-map.csv", flux_map(*c.nodal, d.region_flux).str());
  out.diagnostics = {{"iterations", d.iterations},
                     {"mesh", {d.nx, d.ny}},
                     {"negative_cells", d.negative_cells}};
  return out;
}

inline RunOutput run_quad(const RunConfig& c) {
  RunOutput out;
  if (c.quad.scheme == "gauss") {
    const auto q = half_range_gauss(c.quad.order);
    CsvTable t({"index", "mu", "weight"});
    double wsum = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      t.row({std::to_string(k), num(q.mu[k]), num(q.w[k])});
      wsum += q.w[k];
    }
    out.files.emplace_back("quadrature.csv", t.str());
    out.diagnostics = {{"directions", q.size()}, {"weight_sum", wsum}};
    return out;
  }
  const auto q = make_sphere_quadrature(sphere_scheme(c.quad.scheme, "quadrature.scheme"), c.quad.order);
  CsvTable t({"index", "octant", "level", "mu", "eta", "xi", "weight"});
  double wsum = 0.0;
  for (std::size_t d = 0; d < q.size(); ++d) {
    t.row({std::to_string(d), std::to_string(q.octant[d]), std::to_string(q.level[d]), num(q.mu[d]), num(q.eta[d]),
           num(q.xi[d]), num(q.w[d])});
    wsum += q.w[d];
  }
  // even moments through two degrees past the order, so the first miss shows
  CsvTable audit({"a", "b", "c", "error"});
  for (const auto& m : moment_audit(q, c.quad.order + 2))
    audit.row({std::to_string(m.a), std::to_string(m.b), std::to_string(m.c), num(m.error)});
  out.files.emplace_back("quadrature.csv", t.str());
  out.files.emplace_back("moment-audit.csv", audit.str());
  out.diagnostics = {{"directions", q.size()},
                     {"per_octant", q.m_oct},
                     {"weight_sum", wsum},
                     {"exactness_degree", exactness_degree(q, 1e-12)}};
  return out;
}

inline RunOutput run_converge(const RunConfig& c) {
  const auto& s = c.series;
  const auto rows = analyze(s);
  if (!rows.back().error.empty()) fail(ErrorCategory::Numerical, rows.back().error);
  CsvTable t({"triple", "p", "phi_ref"});
  json errors = json::array();
  for (const auto& r : rows) {
    t.row({std::to_string(r.index), num(r.p), num(r.phi_ref)});
    if (!r.error.empty()) errors.push_back({{"triple", r.index}, {"error", r.error}});
  }
  CsvTable curve({"h", "value", "p"});
  for (std::size_t k = 0; k < s.size(); ++k)
    curve.row({num(s.h[k]), num(s.value[k]), k >= 2 ? num(rows[k - 2].p) : ""});
  RunOutput out;
  out.files.emplace_back("convergence.csv", t.str());
  out.files.emplace_back("convergence-curve.csv", curve.str());
  out.diagnostics = {{"r", s.r}, {"p", rows.back().p}, {"phi_ref", rows.back().phi_ref}, {"triple_errors", errors}};
  return out;
}

inline RunOutput run_benchmark(const RunConfig& c) {
  const auto& b = c.benchmark;
  const auto q = make_sphere_quadrature(sphere_scheme(b.quad.scheme, "benchmark.quadrature.scheme"), b.quad.order);
  auto p = benchmarks::fig7(b.sigma_s, q, b.h, b.k);
  p.phase_path = b.phase_path;
  p.solver = b.solver;
  const auto s = assemble_and_solve(p);
  std::vector<double> flux(p.regions());
  for (int r = 0; r < p.regions(); ++r) flux[r] = region_scalar_flux(s, r);
  const auto quad_flux = benchmarks::quadrant_average(p, flux);
  CsvTable t({"quadrant", "x0", "x1", "y0", "y1", "flux"});
  for (int i = 0; i < 4; ++i) {
    const double x0 = i % 2 ? 0.5 : 0.0, y0 = i / 2 ? 0.5 : 0.0;
    t.row({std::to_string(i), num(x0), num(x0 + 0.5), num(y0), num(y0 + 0.5), num(quad_flux[i])});
  }
  RunOutput out;
  out.files.emplace_back("fluxes.csv", t.str());
  out.files.emplace_back("flux-map.csv", flux_map(p, flux).str());
  out.diagnostics = nodal_diagnostics(s);
  return out;
}

inline void write_atomic(const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<fs::path> staged;
  auto cleanup = [&] {
    for (const auto& t : staged) fs::remove(t, ec);
  };
  for (const auto& [name, text] : files) {
    const fs::path tmp = dir / ("." + name + ".tmp");
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (f) {
      f << text;
      f.close();
    }
    if (!f) {
      cleanup();
      throw IoError("cannot write " + tmp.string());
    }
    staged.push_back(tmp);
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    fs::rename(staged[i], dir / files[i].first, ec);
    if (ec) {
      cleanup();
      throw IoError("cannot rename into " + (dir / files[i].first).string() + ": " + ec.message());
    }
  }
}

inline std::string error_line(const std::string& category, const std::string& message) {
  return json{{"error", category}, {"message", message}}.dump();
}

}  // namespace detail

/// Runs the configured computation entirely in memory.
inline RunOutput execute(const RunConfig& c) {
  switch (c.mode) {
    case Mode::Solve1d: return detail::run_solve1d(c);
    case Mode::Oracle1d: return detail::run_oracle1d(c);
    case Mode::Solve2d: return detail::run_solve2d(c);
    case Mode::Oracle2d: return detail::run_oracle2d(c);
    case Mode::Quad: return detail::run_quad(c);
    case Mode::Converge: return detail::run_converge(c);
    case Mode::Benchmark: return detail::run_benchmark(c);
  }
  fail(ErrorCategory::Internal, "unhandled mode");
}

inline std::string output_dir(const RunConfig& c) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return c.output_dir;
}

/// Solves, then writes the outputs and a manifest. The manifest is the
/// input config plus a "manifest" key, so it can be fed back to `run`.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutput r;
  try {
    r = execute(c);
  } catch (const Error& e) {
    const bool input = e.category() == ErrorCategory::InvalidArgument || e.category() == ErrorCategory::Domain ||
                       e.category() == ErrorCategory::Unsupported;
    err << detail::error_line(input ? "schema" : "numerical", e.what()) << '\n';
    return input ? kUsage : kNumerical;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest = c.raw;
  json outputs = json::array();
  for (const auto& f : r.files) outputs.push_back(f.first);
  manifest["manifest"] = {{"tool", "ado"},
                          {"version", kVersion},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                        "." + std::to_string(EIGEN_MINOR_VERSION)},
                          {"mode", to_string(c.mode)},
                          {"outputs", outputs},
                          {"diagnostics", r.diagnostics},
                          {"wall_time_s", wall}};
  auto files = r.files;
  files.emplace_back("manifest.json", manifest.dump(2) + "\n");
  const std::string dir = output_dir(c);
  try {
    detail::write_atomic(dir, files);
  } catch (const IoError& e) {
    err << detail::error_line("io", e.what()) << '\n';
    return kIo;
  }
  if (c.verbosity > 0) err << r.diagnostics.dump() << '\n';
  out << r.files.front().second;
  return kOk;
}

inline int run_text(const std::string& config_text, std::ostream& out, std::ostream& err) {
  RunConfig c;
  try {
    c = parse_config_text(config_text);
  } catch (const Error& e) {
    err << detail::error_line("schema", e.what()) << '\n';
    return kUsage;
  }
  return run(c, out, err);
}

inline bool read_file(const std::string& path, std::string& text, std::ostream& err) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    err << detail::error_line("io", "cannot read " + path) << '\n';
    return false;
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  text = ss.str();
  return true;
}

/// Command-line entry point.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Analytical discrete ordinates transport solver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run a JSON configuration");
  run_cmd->add_option("config", config_path, "Configuration file")->required();

  std::string oracle_path;
  auto* oracle_cmd = app.add_subcommand("oracle", "Run the reference solver on a solve1d/solve2d configuration");
  oracle_cmd->add_option("config", oracle_path, "Configuration file")->required();

  std::string scheme = "lqn", out_dir;
  int order = 4;
  auto* quad_cmd = app.add_subcommand("quad", "Tabulate a quadrature set");
  quad_cmd->add_option("--scheme", scheme, "gauss, lqn, pntn or pntnsn")->capture_default_str();
  quad_cmd->add_option("--order", order, "Quadrature order N")->capture_default_str();
  quad_cmd->add_option("--out", out_dir, "Output directory");

  std::string series_path;
  auto* conv_cmd = app.add_subcommand("converge", "Observed order and extrapolated value from an h,value CSV");
  conv_cmd->add_option("input", series_path, "CSV of h,value rows, coarsest first")->required();
  conv_cmd->add_option("--out", out_dir, "Output directory");

  std::string bench_name, quad_spec = "lqn:4", mesh_spec = "2x2", phase_path = "exact", solver = "sparse-lu";
  double sigma_s = 0.9;
  auto* bench_cmd = app.add_subcommand("benchmark", "Run a built-in benchmark");
  bench_cmd->add_option("name", bench_name, "Benchmark name (fig7)")->required();
  bench_cmd->add_option("--sigma-s", sigma_s, "Scattering cross section")->capture_default_str();
  bench_cmd->add_option("--quad", quad_spec, "scheme:order")->capture_default_str();
  bench_cmd->add_option("--mesh", mesh_spec, "HxK regions")->capture_default_str();
  bench_cmd->add_option("--phase-path", phase_path, "exact or expanded")->capture_default_str();
  bench_cmd->add_option("--solver", solver, "sparse-lu or bicgstab")->capture_default_str();
  bench_cmd->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << detail::error_line("usage", e.what()) << '\n';
    return kUsage;
  }

  auto with_output = [&](json j) {
    if (!out_dir.empty()) j["output"] = {{"dir", out_dir}};
    return j;
  };

  if (*run_cmd) {
    std::string text;
    if (!read_file(config_path, text, err)) return kIo;
    return run_text(text, out, err);
  }
  if (*oracle_cmd) {
    std::string text;
    if (!read_file(oracle_path, text, err)) return kIo;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      err << detail::error_line("schema", std::string("config is not valid JSON: ") + e.what()) << '\n';
      return kUsage;
    }
    const std::string mode = j.value("mode", "");
    if (mode == "solve1d") j["mode"] = "oracle1d";
    else if (mode == "solve2d") j["mode"] = "oracle2d";
    else if (mode != "oracle1d" && mode != "oracle2d") {
      err << detail::error_line("usage", "oracle needs a solve1d or solve2d configuration") << '\n';
      return kUsage;
    }
    return run_text(j.dump(), out, err);
  }
  if (*quad_cmd)
    return run_text(with_output({{"mode", "quad"}, {"quadrature", {{"scheme", scheme}, {"order", order}}}}).dump(),
                    out, err);
  if (*conv_cmd) {
    std::string text, msg;
    if (!read_file(series_path, text, err)) return kIo;
    std::vector<double> h, v;
    if (!parse_two_column_csv(text, h, v, msg)) {
      err << detail::error_line("schema", series_path + ": " + msg) << '\n';
      return kUsage;
    }
    return run_text(with_output({{"mode", "converge"}, {"series", {{"h", h}, {"value", v}}}}).dump(), out, err);
  }
  // benchmark
  const auto colon = quad_spec.find(':');
  const auto x = mesh_spec.find('x');
  int qorder = 0, mh = 0, mk = 0;
  try {
    if (colon == std::string::npos || x == std::string::npos) throw std::invalid_argument("format");
    std::size_t used = 0;
    qorder = std::stoi(quad_spec.substr(colon + 1), &used);
    if (used != quad_spec.size() - colon - 1) throw std::invalid_argument("format");
    mh = std::stoi(mesh_spec.substr(0, x), &used);
    if (used != x) throw std::invalid_argument("format");
    mk = std::stoi(mesh_spec.substr(x + 1), &used);
    if (used != mesh_spec.size() - x - 1) throw std::invalid_argument("format");
  } catch (const std::exception&) {
    err << detail::error_line("usage", "expected --quad scheme:order and --mesh HxK") << '\n';
    return kUsage;
  }
  json j = {{"mode", "benchmark"},
            {"benchmark",
             {{"name", bench_name},
              {"sigma_s", sigma_s},
              {"quadrature", {{"scheme", quad_spec.substr(0, colon)}, {"order", qorder}}},
              {"mesh", {mh, mk}},
              {"phase_path", phase_path},
              {"solver", solver}}}};
  return run_text(with_output(j).dump(), out, err);
}

}  // namespace ado::cli
