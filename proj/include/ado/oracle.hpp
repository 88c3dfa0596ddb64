#pragma once

// Brute-force reference solvers. They read the shared problem and quadrature
// types but none of the spectral solver code.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ado/error.hpp"
#include "ado/nodal_problem.hpp"
#include "ado/slab_problem.hpp"

namespace ado::oracle {

struct OracleConfig {
  int resolution = 20000;
  double tolerance = 1e-12;
  int max_iterations = 100000;
};

inline void check(const OracleConfig& c) {
  if (!(c.tolerance > 0.0)) fail(ErrorCategory::InvalidArgument, "oracle: tolerance must be positive");
  if (c.resolution < 2) fail(ErrorCategory::InvalidArgument, "oracle: resolution must be >= 2");
  if (c.max_iterations < 1) fail(ErrorCategory::InvalidArgument, "oracle: max_iterations must be >= 1");
}

/// Root nu_0 > 1 of 1 = w nu artanh(1/nu), by bisection.
inline double case_discrete_eigenvalue(double albedo) {
  if (!(albedo > 0.0 && albedo < 1.0))
    fail(ErrorCategory::InvalidArgument, "oracle: albedo must lie in (0, 1)");
  double lo = 1.0 + 1e-12, hi = 1e6;
  auto f = [albedo](double nu) { return albedo * nu * std::atanh(1.0 / nu) - 1.0; };
  // f decreases from +inf-ish near 1 to albedo - 1 < 0 at infinity
  for (int it = 0; it < 400 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

inline double legendre_sum(const std::vector<double>& c, double x) {
  // P_l by recurrence; separate from the library implementation on purpose
  double s = c[0], pm = 1.0, p = x;
  if (c.size() > 1) s += c[1] * x;
  for (std::size_t l = 2; l < c.size(); ++l) {
    const double pn = ((2.0 * l - 1.0) * x * p - (l - 1.0) * pm) / static_cast<double>(l);
    s += c[l] * pn;
    pm = p;
    p = pn;
  }
  return s;
}

inline std::vector<double> legendre_values(int L, double x) {
  std::vector<double> v(L + 1);
  v[0] = 1.0;
  if (L >= 1) v[1] = x;
  for (int l = 2; l <= L; ++l) v[l] = ((2.0 * l - 1.0) * x * v[l - 1] - (l - 1.0) * v[l - 2]) / l;
  return v;
}

// Coefficients of the exact linear-source cell update
//   I_out = E I_in + c0 S_in + c1 S_out.
inline void cell_coefficients(double x, double& e, double& c0, double& c1) {
  e = std::exp(-x);
  double a1;  // 1 - (1 - E)/x
  if (x < 1e-3) a1 = x / 2.0 - x * x / 6.0 + x * x * x / 24.0 - x * x * x * x / 120.0;
  else a1 = 1.0 + std::expm1(-x) / x;
  const double a0 = -std::expm1(-x);
  c0 = a0 - a1;
  c1 = a1;
}

}  // namespace detail

struct SlabReference {
  std::vector<double> tau;                 // resolution + 1 mesh points
  std::vector<std::vector<double>> plus;   // [point][k] = I(tau, +mu_k)
  std::vector<std::vector<double>> minus;  // [point][k] = I(tau, -mu_k)
  std::vector<double> density;
  int iterations = 0;
};

/// Source iteration on a uniform tau mesh. Each sweep integrates
/// +-mu dI/dtau + I = S exactly for a source linear on every cell, so the
/// scheme is second order in the mesh width.
inline SlabReference slab_reference(const SlabProblem& p, const OracleConfig& cfg) {
  check(cfg);
  const int n = static_cast<int>(p.quad.size());
  const int r = cfg.resolution;
  const int L = static_cast<int>(p.phase.coeffs.size()) - 1;
  const double h = (p.tau_b - p.tau_a) / r;
  SlabReference out;
  out.tau.resize(r + 1);
  for (int i = 0; i <= r; ++i) out.tau[i] = p.tau_a + h * i;

  std::vector<std::vector<double>> pl(n);
  for (int k = 0; k < n; ++k) pl[k] = detail::legendre_values(L, p.quad.mu[k]);
  auto qval = [&](const std::vector<std::vector<double>>& side, int k, double t) {
    if (side.empty()) return 0.0;
    double v = 0.0, tp = 1.0;
    for (double c : side[k]) {
      v += c * tp;
      tp *= t;
    }
    return v;
  };
  std::vector<double> e(n), c0(n), c1(n);
  for (int k = 0; k < n; ++k) detail::cell_coefficients(h / p.quad.mu[k], e[k], c0[k], c1[k]);

  std::vector<std::vector<double>> ip(r + 1, std::vector<double>(n, 0.0)), im = ip;
  std::vector<std::vector<double>> sp = ip, sm = ip;
  std::vector<double> mom_even(L + 1), mom_odd(L + 1), prev(r + 1, 0.0), dens(r + 1, 0.0);
  std::vector<double> qp0(n), qm0(n);

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    // scattering source from the current iterate
    for (int i = 0; i <= r; ++i) {
      const double t = out.tau[i] - p.tau_a;
      std::vector<double> mom(L + 1, 0.0);  // sum_k w_k P_l(mu_k) [I(+) + (-1)^l I(-)]
      for (int k = 0; k < n; ++k)
        for (int l = 0; l <= L; ++l)
          mom[l] += p.quad.w[k] * pl[k][l] * (ip[i][k] + (l % 2 ? -1.0 : 1.0) * im[i][k]);
      for (int k = 0; k < n; ++k) {
        double s_plus = 0.0, s_minus = 0.0;
        for (int l = 0; l <= L; ++l) {
          const double a = 0.5 * p.albedo * p.phase.coeffs[l] * pl[k][l] * mom[l];
          s_plus += a;
          s_minus += (l % 2 ? -1.0 : 1.0) * a;
        }
        sp[i][k] = s_plus + qval(p.source.plus, k, t);
        sm[i][k] = s_minus + qval(p.source.minus, k, t);
      }
    }
    // boundary values from the previous iterate's exiting intensities
    double out_a = 0.0, out_b = 0.0;
    for (int k = 0; k < n; ++k) {
      out_a += p.quad.w[k] * p.quad.mu[k] * im[0][k];
      out_b += p.quad.w[k] * p.quad.mu[k] * ip[r][k];
    }
    std::vector<double> in_a(n), in_b(n);
    for (int k = 0; k < n; ++k) {
      in_a[k] = (p.f1.empty() ? 0.0 : p.f1[k]) + p.rho1s * im[0][k] + 2.0 * p.rho1d * out_a;
      in_b[k] = (p.f2.empty() ? 0.0 : p.f2[k]) + p.rho2s * ip[r][k] + 2.0 * p.rho2d * out_b;
    }
    for (int k = 0; k < n; ++k) {
      ip[0][k] = in_a[k];
      for (int i = 0; i < r; ++i) ip[i + 1][k] = e[k] * ip[i][k] + c0[k] * sp[i][k] + c1[k] * sp[i + 1][k];
      im[r][k] = in_b[k];
      for (int i = r; i > 0; --i) im[i - 1][k] = e[k] * im[i][k] + c0[k] * sm[i][k] + c1[k] * sm[i - 1][k];
    }
    double change = 0.0, scale = 0.0;
    for (int i = 0; i <= r; ++i) {
      double d = 0.0;
      for (int k = 0; k < n; ++k) d += p.quad.w[k] * (ip[i][k] + im[i][k]);
      change = std::max(change, std::abs(d - prev[i]));
      scale = std::max(scale, std::abs(d));
      prev[i] = d;
    }
    out.iterations = it;
    if (change <= cfg.tolerance * std::max(scale, 1e-300) || scale == 0.0) {
      out.plus = std::move(ip);
      out.minus = std::move(im);
      out.density = prev;
      return out;
    }
  }
  fail(ErrorCategory::Numerical, "oracle: slab source iteration did not converge in " +
                                     std::to_string(cfg.max_iterations) + " iterations");
}

struct DiamondDifferenceResult {
  int nx = 0, ny = 0;
  std::vector<double> cell_flux;    // mean intensity per cell, row-major in y
  std::vector<double> region_flux;  // per nodal region, r = k H + h
  int iterations = 0;
  int negative_cells = 0;           // cells with a negative angular value in the last sweep
};

/// Diamond-difference S_N with source iteration on a uniform nx x ny mesh
/// whose lines include every region boundary. Scattering uses the same
/// hemisphere kernel as the nodal equations, w_n [p(n.d) + p(n~.d)] / (4 pi).
inline DiamondDifferenceResult dd2d(const NodalProblem& p, const OracleConfig& cfg, int nx, int ny) {
  check(cfg);
  validate(p);
  const double ax = p.x_lines.front(), bx = p.x_lines.back();
  const double ay = p.y_lines.front(), by = p.y_lines.back();
  const double dx = (bx - ax) / nx, dy = (by - ay) / ny;
  auto locate = [](const std::vector<double>& lines, double lo, double step, int cells) {
    std::vector<int> owner(cells);
    for (int i = 0; i < cells; ++i) {
      const double c = lo + (i + 0.5) * step;
      int h = 0;
      while (h + 1 < static_cast<int>(lines.size()) - 1 && c > lines[h + 1]) ++h;
      owner[i] = h;
    }
    for (std::size_t l = 1; l + 1 < lines.size(); ++l) {
      const double pos = (lines[l] - lo) / step;
      if (std::abs(pos - std::round(pos)) > 1e-9)
        fail(ErrorCategory::InvalidArgument, "oracle: fine mesh is not aligned with the region lines");
    }
    return owner;
  };
  const auto ox = locate(p.x_lines, ax, dx, nx);
  const auto oy = locate(p.y_lines, ay, dy, ny);
  const int ncell = nx * ny;
  const int m = static_cast<int>(p.quad.size());
  const auto& q = p.quad;

  std::vector<int> cell_region(ncell);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) cell_region[j * nx + i] = p.region_index(ox[i], oy[j]);

  // kernel per material; isotropic materials use the scalar flux shortcut
  const int nreg = p.regions();
  std::vector<bool> iso(nreg);
  std::vector<std::vector<double>> ker(nreg);
  double wsum = 0.0;
  for (int d = 0; d < m; ++d) wsum += q.w[d];
  for (int r = 0; r < nreg; ++r) {
    const auto& c = p.materials[r].phase.coeffs;
    iso[r] = true;
    for (std::size_t l = 1; l < c.size(); ++l)
      if (c[l] != 0.0) iso[r] = false;
    if (iso[r]) continue;
    ker[r].resize(static_cast<std::size_t>(m) * m);
    for (int d = 0; d < m; ++d)
      for (int n = 0; n < m; ++n) {
        const double cxy = q.mu[n] * q.mu[d] + q.eta[n] * q.eta[d];
        const double v = detail::legendre_sum(c, cxy + q.xi[n] * q.xi[d]) +
                         detail::legendre_sum(c, cxy - q.xi[n] * q.xi[d]);
        ker[r][static_cast<std::size_t>(d) * m + n] = q.w[n] * v / (4.0 * std::numbers::pi);
      }
  }

  std::vector<double> psi(static_cast<std::size_t>(ncell) * m, 0.0);  // cell-average angular values
  std::vector<double> src(static_cast<std::size_t>(ncell) * m, 0.0);
  std::vector<double> flux(ncell, 0.0), prev(ncell, 0.0);
  std::vector<double> edge_x(ny), edge_y(nx);
  DiamondDifferenceResult res;
  res.nx = nx;
  res.ny = ny;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    for (int c = 0; c < ncell; ++c) {
      const auto& mat = p.materials[cell_region[c]];
      const int r = cell_region[c];
      if (iso[r]) {
        // kernel row sum reduces to w_n * 2 / (4 pi)
        double s = 0.0;
        for (int n = 0; n < m; ++n) s += q.w[n] * psi[static_cast<std::size_t>(c) * m + n];
        const double v = mat.sigma_s * s / (2.0 * std::numbers::pi) + mat.source;
        for (int d = 0; d < m; ++d) src[static_cast<std::size_t>(c) * m + d] = v;
      } else {
        for (int d = 0; d < m; ++d) {
          double s = 0.0;
          for (int n = 0; n < m; ++n)
            s += ker[r][static_cast<std::size_t>(d) * m + n] * psi[static_cast<std::size_t>(c) * m + n];
          src[static_cast<std::size_t>(c) * m + d] = mat.sigma_s * s + mat.source;
        }
      }
    }
    int negative = 0;
    for (int d = 0; d < m; ++d) {
      const double amu = std::abs(q.mu[d]), aeta = std::abs(q.eta[d]);
      const double cx = 2.0 * amu / dx, cy = 2.0 * aeta / dy;
      const bool xpos = q.mu[d] > 0.0, ypos = q.eta[d] > 0.0;
      const double in_x = xpos ? (p.left.value.empty() ? 0.0 : p.left.value[d])
                               : (p.right.value.empty() ? 0.0 : p.right.value[d]);
      const double in_y = ypos ? (p.bottom.value.empty() ? 0.0 : p.bottom.value[d])
                               : (p.top.value.empty() ? 0.0 : p.top.value[d]);
      std::fill(edge_y.begin(), edge_y.end(), in_y);
      for (int jj = 0; jj < ny; ++jj) {
        const int j = ypos ? jj : ny - 1 - jj;
        double ex = in_x;
        for (int ii = 0; ii < nx; ++ii) {
          const int i = xpos ? ii : nx - 1 - ii;
          const int c = j * nx + i;
          const double sig = p.materials[cell_region[c]].sigma_t;
          const double v = (src[static_cast<std::size_t>(c) * m + d] + cx * ex + cy * edge_y[i]) / (sig + cx + cy);
          psi[static_cast<std::size_t>(c) * m + d] = v;
          ex = 2.0 * v - ex;
          edge_y[i] = 2.0 * v - edge_y[i];
          if (v < 0.0) ++negative;
        }
      }
    }
    double change = 0.0, scale = 0.0;
    for (int c = 0; c < ncell; ++c) {
      double s = 0.0;
      for (int d = 0; d < m; ++d) s += q.w[d] * psi[static_cast<std::size_t>(c) * m + d];
      flux[c] = s / wsum;
      change = std::max(change, std::abs(flux[c] - prev[c]));
      scale = std::max(scale, std::abs(flux[c]));
      prev[c] = flux[c];
    }
    res.iterations = it;
    res.negative_cells = negative;
    if (change <= cfg.tolerance * scale || scale == 0.0) {
      res.cell_flux = flux;
      res.region_flux.assign(nreg, 0.0);
      std::vector<int> count(nreg, 0);
      for (int c = 0; c < ncell; ++c) {
        res.region_flux[cell_region[c]] += flux[c];
        ++count[cell_region[c]];
      }
      for (int r = 0; r < nreg; ++r) res.region_flux[r] /= count[r];
      return res;
    }
  }
  fail(ErrorCategory::Numerical, "oracle: diamond-difference source iteration did not converge in " +
                                     std::to_string(cfg.max_iterations) + " iterations");
}

}  // namespace ado::oracle
