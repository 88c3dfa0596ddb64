#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "ado/error.hpp"
#include "ado/legendre.hpp"
#include "ado/nodal_problem.hpp"
#include "ado/quadrature.hpp"
#include "ado/scattering.hpp"

namespace ado {

enum class OrderingScheme { XScheme, YScheme };

/// Pairing of the stored directions for one transverse-integrated axis.
/// perm[i], i < half, lists the directions with positive cosine along the
/// axis (mu for XScheme, eta for YScheme) in storage order; perm[i + half] is
/// the mirror of perm[i] with that cosine negated. position is the inverse of
/// perm and mirror maps a stored index to the stored index of its image.
struct DirectionOrdering {
  OrderingScheme scheme = OrderingScheme::XScheme;
  int half = 0;
  std::vector<int> perm, position, mirror;
};

inline DirectionOrdering order_directions(const SphereQuadrature& q, OrderingScheme scheme) {
  const int m = static_cast<int>(q.size());
  const bool xs = scheme == OrderingScheme::XScheme;
  DirectionOrdering o;
  o.scheme = scheme;
  o.mirror.assign(m, -1);
  for (int d = 0; d < m; ++d) {
    const double tm = xs ? -q.mu[d] : q.mu[d];
    const double te = xs ? q.eta[d] : -q.eta[d];
    for (int e = 0; e < m; ++e) {
      if (std::abs(q.mu[e] - tm) < 1e-12 && std::abs(q.eta[e] - te) < 1e-12 &&
          std::abs(q.xi[e] - q.xi[d]) < 1e-12 && std::abs(q.w[e] - q.w[d]) < 1e-12 * q.w[d]) {
        o.mirror[d] = e;
        break;
      }
    }
    if (o.mirror[d] < 0)
      fail(ErrorCategory::InvalidArgument,
           "ordering-impossible: direction " + std::to_string(d) + " has no mirror image");
  }
  for (int d = 0; d < m; ++d) {
    const double c = xs ? q.mu[d] : q.eta[d];
    if (c > 0.0) o.perm.push_back(d);
  }
  o.half = static_cast<int>(o.perm.size());
  if (2 * o.half != m) fail(ErrorCategory::InvalidArgument, "ordering-impossible: unbalanced direction set");
  for (int i = 0; i < o.half; ++i) o.perm.push_back(o.mirror[o.perm[i]]);
  o.position.assign(m, -1);
  for (int i = 0; i < m; ++i) o.position[o.perm[i]] = i;
  return o;
}

/// Scattering kernel of the upper-hemisphere system,
///   K(d, n) = w_n [p(Omega_n . Omega_d) + p(Omega~_n . Omega_d)] / (4 pi),
/// where Omega~ is the xi -> -xi image. The exact path evaluates p at the
/// cosine of the angle; the expanded path goes through the addition theorem.
inline Eigen::MatrixXd scattering_kernel(const SphereQuadrature& q, const PhaseFunction& p,
                                         PhasePath path) {
  const int m = static_cast<int>(q.size());
  Eigen::MatrixXd k(m, m);
  for (int d = 0; d < m; ++d) {
    for (int n = 0; n < m; ++n) {
      double s;
      if (path == PhasePath::Exact) {
        const double c = q.mu[n] * q.mu[d] + q.eta[n] * q.eta[d];
        s = eval_expanded(p, c + q.xi[n] * q.xi[d]) + eval_expanded(p, c - q.xi[n] * q.xi[d]);
      } else {
        const std::array<double, 3> od{q.mu[d], q.eta[d], q.xi[d]};
        s = eval_two_angle(p, {q.mu[n], q.eta[n], q.xi[n]}, od) +
            eval_two_angle(p, {q.mu[n], q.eta[n], -q.xi[n]}, od);
      }
      k(d, n) = q.w[n] * s / (4.0 * std::numbers::pi);
    }
  }
  return k;
}

/// Half-order matrices of one transverse-integrated system.
struct AxisMatrices {
  Eigen::MatrixXd A, B;
};

/// Exact form: four phase-function evaluations per entry, with i' the
/// mirror of i and j~ the xi-image of j:
///   A(i,j) = s/(4 pi c_i) w_j [p(j.i) - p(j.i') + p(j~.i) - p(j~.i')] - beta/c_i delta_ij,
///   B(i,j) = same with plus signs,
/// where c_i is mu_i (x-scheme) or eta_i (y-scheme).
inline AxisMatrices axis_matrices_exact(const SphereQuadrature& q, const DirectionOrdering& o,
                                        const NodalMaterial& mat) {
  const int h = o.half;
  const bool xs = o.scheme == OrderingScheme::XScheme;
  AxisMatrices am{Eigen::MatrixXd(h, h), Eigen::MatrixXd(h, h)};
  auto dot = [&](int a, int b, double sb) {
    return q.mu[a] * q.mu[b] + q.eta[a] * q.eta[b] + sb * q.xi[a] * q.xi[b];
  };
  for (int i = 0; i < h; ++i) {
    const int di = o.perm[i], dim = o.perm[i + h];
    const double ci = xs ? q.mu[di] : q.eta[di];
    for (int j = 0; j < h; ++j) {
      const int dj = o.perm[j];
      const double p1 = eval_expanded(mat.phase, dot(dj, di, 1.0));
      const double p2 = eval_expanded(mat.phase, dot(dj, dim, 1.0));
      const double p3 = eval_expanded(mat.phase, dot(dj, di, -1.0));
      const double p4 = eval_expanded(mat.phase, dot(dj, dim, -1.0));
      const double f = mat.sigma_s / (4.0 * std::numbers::pi * ci) * q.w[dj];
      am.A(i, j) = f * (p1 - p2 + p3 - p4);
      am.B(i, j) = f * (p1 + p2 + p3 + p4);
    }
    am.A(i, i) -= mat.sigma_t / ci;
    am.B(i, i) -= mat.sigma_t / ci;
  }
  return am;
}

/// Expanded form: sum over l and p with l + p even of
///   (2 - delta_0p) C_l (l-p)!/(l+p)! P_l^p(xi_i) P_l^p(xi_j) times an
/// azimuthal selector. With phi the azimuth of (mu, eta):
///   x-scheme  A: sin p phi_j sin p phi_i (p even), cos cos (p odd);
///             B: cos cos (p even), sin sin (p odd);
///   y-scheme  A: sin sin, B: cos cos, for every p.
/// The xi-image and the mirror of i each double the surviving terms, so the
/// prefactor is s/(pi c_i).
inline AxisMatrices axis_matrices_expanded(const SphereQuadrature& q, const DirectionOrdering& o,
                                           const NodalMaterial& mat) {
  const int h = o.half;
  const int L = mat.phase.order();
  const bool xs = o.scheme == OrderingScheme::XScheme;
  std::vector<std::vector<std::vector<double>>> tab(h);
  std::vector<std::vector<double>> cs(h, std::vector<double>(L + 1)), sn(h, std::vector<double>(L + 1));
  for (int i = 0; i < h; ++i) {
    const int d = o.perm[i];
    tab[i] = scaled_assoc_legendre_table(L, q.xi[d]);
    const double s = std::hypot(q.mu[d], q.eta[d]);
    const std::complex<double> e(q.mu[d] / s, q.eta[d] / s);
    std::complex<double> ep(1.0, 0.0);
    for (int p = 0; p <= L; ++p) {
      cs[i][p] = ep.real();
      sn[i][p] = ep.imag();
      ep *= e;
    }
  }
  AxisMatrices am{Eigen::MatrixXd::Zero(h, h), Eigen::MatrixXd::Zero(h, h)};
  for (int i = 0; i < h; ++i) {
    const int di = o.perm[i];
    const double ci = xs ? q.mu[di] : q.eta[di];
    for (int j = 0; j < h; ++j) {
      const int dj = o.perm[j];
      double sa = 0.0, sb = 0.0;
      for (int l = 0; l <= L; ++l) {
        for (int p = l % 2; p <= l; p += 2) {
          const double g = (p == 0 ? 1.0 : 2.0) * mat.phase.coeffs[l] * tab[i][l][p] * tab[j][l][p];
          const double ss = sn[j][p] * sn[i][p], cc = cs[j][p] * cs[i][p];
          if (xs) {
            sa += g * (p % 2 == 0 ? ss : cc);
            sb += g * (p % 2 == 0 ? cc : ss);
          } else {
            sa += g * ss;
            sb += g * cc;
          }
        }
      }
      const double f = mat.sigma_s / (std::numbers::pi * ci) * q.w[dj];
      am.A(i, j) = f * sa;
      am.B(i, j) = f * sb;
    }
    am.A(i, i) -= mat.sigma_t / ci;
    am.B(i, i) -= mat.sigma_t / ci;
  }
  return am;
}

/// Eigen-decomposition of one transverse-integrated system: (A B) U = U / nu^2,
/// Phi_+ = (I - nu B) U / 2 and Phi_- = (I + nu B) U / 2, rows indexed by the
/// pair index of the ordering.
struct AxisBasis {
  AxisMatrices mats;
  std::vector<double> nu;  // descending
  Eigen::MatrixXd phi_plus, phi_minus;
  double residual = 0.0;   // max_j |(AB)U - U/nu^2| / |U|
  bool symmetric_path = false;

  int dimension() const { return static_cast<int>(nu.size()); }
};

namespace detail {

inline std::string region_tag(int region) { return " (region " + std::to_string(region) + ")"; }

inline AxisBasis decompose_axis(const SphereQuadrature& q, const DirectionOrdering& o,
                                AxisMatrices mats, int region) {
  const int h = o.half;
  const bool xs = o.scheme == OrderingScheme::XScheme;
  Eigen::VectorXd c(h), w(h);
  for (int i = 0; i < h; ++i) {
    c(i) = xs ? q.mu[o.perm[i]] : q.eta[o.perm[i]];
    w(i) = q.w[o.perm[i]];
  }
  const Eigen::MatrixXd ab = mats.A * mats.B;
  std::vector<double> lam;
  std::vector<Eigen::VectorXd> vecs;

  // A = C^{-1} Sa W and B = C^{-1} Sb W with Sa, Sb symmetric. With
  // D = W C^{-1} and -Sb = L L^T the problem becomes the symmetric
  // -L^T (D Sa D) L z = lambda z, U = W^{-1} L^{-T} z, which keeps
  // eigenvectors independent inside the exact multiplicities the quadrature
  // symmetry produces.
  Eigen::MatrixXd sa = c.asDiagonal() * mats.A * w.cwiseInverse().asDiagonal();
  Eigen::MatrixXd sb = c.asDiagonal() * mats.B * w.cwiseInverse().asDiagonal();
  const double asym = std::max((sa - sa.transpose()).lpNorm<Eigen::Infinity>() /
                                   std::max(1.0, sa.lpNorm<Eigen::Infinity>()),
                               (sb - sb.transpose()).lpNorm<Eigen::Infinity>() /
                                   std::max(1.0, sb.lpNorm<Eigen::Infinity>()));
  bool done = false;
  if (asym < 1e-10) {
    sa = 0.5 * (sa + sa.transpose()).eval();
    sb = 0.5 * (sb + sb.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> llt(-sb);
    if (llt.info() == Eigen::Success) {
      const Eigen::VectorXd dd = w.cwiseQuotient(c);
      const Eigen::MatrixXd g = dd.asDiagonal() * sa * dd.asDiagonal();
      const Eigen::MatrixXd lm = llt.matrixL();
      Eigen::MatrixXd s = -(lm.transpose() * g * lm);
      s = 0.5 * (s + s.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
      if (es.info() == Eigen::Success) {
        const Eigen::MatrixXd y = lm.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());
        for (int j = 0; j < h; ++j) {
          lam.push_back(es.eigenvalues()(j));
          vecs.push_back(w.cwiseInverse().cwiseProduct(y.col(j)));
        }
        done = true;
      }
    }
  }
  if (!done) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(ab);
    if (es.info() != Eigen::Success) fail(ErrorCategory::Numerical, "nodal: eigensolver failed" + region_tag(region));
    for (int j = 0; j < h; ++j) {
      const std::complex<double> l = es.eigenvalues()(j);
      if (std::abs(l.imag()) > 1e-8 * std::abs(l.real()))
        fail(ErrorCategory::Numerical, "complex-spectrum" + region_tag(region));
      Eigen::VectorXcd xc = es.eigenvectors().col(j);
      Eigen::Index imax = 0;
      xc.cwiseAbs().maxCoeff(&imax);
      xc /= xc(imax);
      lam.push_back(l.real());
      vecs.push_back(xc.real());
    }
  }

  std::vector<int> order(h);
  for (int j = 0; j < h; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return lam[a] < lam[b]; });

  AxisBasis b;
  b.mats = std::move(mats);
  b.symmetric_path = done;
  b.nu.resize(h);
  b.phi_plus.resize(h, h);
  b.phi_minus.resize(h, h);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(h, h);
  for (int jj = 0; jj < h; ++jj) {
    const int j = order[jj];
    if (!(lam[j] > 0.0)) fail(ErrorCategory::Numerical, "supercritical-spectrum" + region_tag(region));
    Eigen::VectorXd u = vecs[j];
    Eigen::Index imax = 0;
    u.cwiseAbs().maxCoeff(&imax);
    u /= u(imax);
    b.residual = std::max(b.residual, (ab * u - lam[j] * u).norm() / u.norm());
    const double nu = 1.0 / std::sqrt(lam[j]);
    b.nu[jj] = nu;
    const Eigen::VectorXd bu = nu * (b.mats.B * u);
    b.phi_plus.col(jj) = 0.5 * (u - bu);
    b.phi_minus.col(jj) = 0.5 * (u + bu);
  }
  return b;
}

}  // namespace detail

/// y-averaged (x-ODE, x-scheme) and x-averaged (y-ODE, y-scheme) bases of a region.
struct RegionBasis {
  AxisBasis y_averaged;  // separation constants nu
  AxisBasis x_averaged;  // separation constants gamma
};

inline AxisMatrices axis_matrices(const SphereQuadrature& q, const DirectionOrdering& o,
                                  const NodalMaterial& mat, PhasePath path) {
  return path == PhasePath::Exact ? axis_matrices_exact(q, o, mat) : axis_matrices_expanded(q, o, mat);
}

inline RegionBasis build_region_basis(const NodalProblem& p, int r) {
  if (r < 0 || r >= p.regions()) fail(ErrorCategory::InvalidArgument, "nodal: region index out of range");
  const auto ox = order_directions(p.quad, OrderingScheme::XScheme);
  const auto oy = order_directions(p.quad, OrderingScheme::YScheme);
  const auto& mat = p.materials[r];
  RegionBasis rb;
  rb.y_averaged = detail::decompose_axis(p.quad, ox, axis_matrices(p.quad, ox, mat, p.phase_path), r);
  rb.x_averaged = detail::decompose_axis(p.quad, oy, axis_matrices(p.quad, oy, mat, p.phase_path), r);
  return rb;
}

enum class AverageAxis { YAveraged, XAveraged };

struct NodalSolution {
  NodalProblem problem;
  DirectionOrdering x_order, y_order;
  std::vector<RegionBasis> bases;
  std::vector<Eigen::MatrixXd> kernels;  // per region, M x M
  Eigen::VectorXd unknowns;              // region-major blocks [A | B | Z | W], 4M each
  // Resolved edge constants per region, one value per stored direction.
  std::vector<Eigen::VectorXd> c_left, c_right, d_bottom, d_top;
  double system_residual = 0.0;

  int directions() const { return static_cast<int>(problem.quad.size()); }
  int system_size() const { return static_cast<int>(unknowns.size()); }
};

namespace detail {

struct LinearTerm {
  int col;
  double coef;
};

// Coefficients of the averaged intensity of region r at a point, as a
// linear form in that region's unknowns. axis YAveraged: I_yr(x), coordinate
// x, unknowns A and Z. XAveraged: I_xr(y), unknowns B and W.
inline void averaged_form(const NodalProblem& p, const DirectionOrdering& o, const AxisBasis& ab,
                          int r, AverageAxis axis, double coord, int d, std::vector<LinearTerm>& out) {
  const int m = static_cast<int>(p.quad.size());
  const int h = o.half;
  const int hx = r % p.nx(), ky = r / p.nx();
  double lo, hi;
  if (axis == AverageAxis::YAveraged) {
    lo = p.x_lines[hx];
    hi = p.x_lines[hx + 1];
  } else {
    lo = p.y_lines[ky];
    hi = p.y_lines[ky + 1];
  }
  const int base = 4 * m * r + (axis == AverageAxis::YAveraged ? 0 : m);
  const int cbase = 4 * m * r + (axis == AverageAxis::YAveraged ? 2 * m : 3 * m);
  const int pos = o.position[d];
  const bool plus = pos < h;
  const int i = plus ? pos : pos - h;
  for (int j = 0; j < h; ++j) {
    const double e1 = std::exp(-(coord - lo) / ab.nu[j]);
    const double e2 = std::exp(-(hi - coord) / ab.nu[j]);
    const double f1 = plus ? ab.phi_plus(i, j) : ab.phi_minus(i, j);
    const double f2 = plus ? ab.phi_minus(i, j) : ab.phi_plus(i, j);
    out.push_back({base + j, f1 * e1});
    out.push_back({base + h + j, f2 * e2});
  }
  out.push_back({cbase + d, 1.0});
}

inline double evaluate_form(const std::vector<LinearTerm>& f, const Eigen::VectorXd& x) {
  double s = 0.0;
  for (const auto& t : f) s += t.coef * x(t.col);
  return s;
}

inline double edge_value(const EdgeCondition& e, int d) { return e.value.empty() ? 0.0 : e.value[d]; }

}  // namespace detail

/// Assembles the 4M H K system (constant edge closure) and solves it.
///
/// Per region and direction d the rows are:
///   x-edge:  I_yr(a_{h-1}, d) equal to the left neighbour's I_y(a_{h-1}, d) or
///            the left boundary value when mu_d > 0; the right edge when mu_d < 0;
///   y-edge:  the same for I_xr at the bottom (eta_d > 0) or top (eta_d < 0) edge;
///   Z:       beta Z_d - s sum_n K(d,n) Z_n + eta_d/dy (D_top - D_bot) = S;
///   W:       beta W_d - s sum_n K(d,n) W_n + mu_d/dx (C_right - C_left) = S;
/// where the edge constants C, D are the prescribed values for directions
/// entering through a domain edge and the region's own averaged solution at
/// the edge otherwise.
inline NodalSolution assemble_and_solve(const NodalProblem& p) {
  validate(p);
  const int m = static_cast<int>(p.quad.size());
  const int nreg = p.regions();
  const long long n_unknowns = 4LL * m * nreg;
  if (n_unknowns > 200000)
    fail(ErrorCategory::Unsupported, "nodal: system of " + std::to_string(n_unknowns) +
                                         " unknowns exceeds the 200000 limit");
  NodalSolution s;
  s.problem = p;
  s.x_order = order_directions(p.quad, OrderingScheme::XScheme);
  s.y_order = order_directions(p.quad, OrderingScheme::YScheme);
  s.bases.resize(nreg);
  s.kernels.resize(nreg);
  for (int r = 0; r < nreg; ++r) {
    s.bases[r] = build_region_basis(p, r);
    s.kernels[r] = scattering_kernel(p.quad, p.materials[r].phase, p.phase_path);
  }

  const int n = static_cast<int>(n_unknowns);
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  std::vector<detail::LinearTerm> form;
  auto add = [&](int row, double f, const std::vector<detail::LinearTerm>& terms) {
    for (const auto& t : terms) trip.emplace_back(row, t.col, f * t.coef);
  };
  auto iy = [&](int r, double x, int d) {
    form.clear();
    detail::averaged_form(p, s.x_order, s.bases[r].y_averaged, r, AverageAxis::YAveraged, x, d, form);
    return form;
  };
  auto ix = [&](int r, double y, int d) {
    form.clear();
    detail::averaged_form(p, s.y_order, s.bases[r].x_averaged, r, AverageAxis::XAveraged, y, d, form);
    return form;
  };

  const int hn = p.nx(), kn = p.ny();
  for (int k = 0; k < kn; ++k) {
    for (int h = 0; h < hn; ++h) {
      const int r = p.region_index(h, k);
      const int base = 4 * m * r;
      const double x0 = p.x_lines[h], x1 = p.x_lines[h + 1];
      const double y0 = p.y_lines[k], y1 = p.y_lines[k + 1];
      const double dx = x1 - x0, dy = y1 - y0;
      const auto& mat = p.materials[r];
      const auto& ker = s.kernels[r];
      for (int d = 0; d < m; ++d) {
        const double mu = p.quad.mu[d], eta = p.quad.eta[d];
        // x-edge row
        const int rx = base + d;
        if (mu > 0.0) {
          add(rx, 1.0, iy(r, x0, d));
          if (h == 0) rhs(rx) = detail::edge_value(p.left, d);
          else add(rx, -1.0, iy(p.region_index(h - 1, k), x0, d));
        } else {
          add(rx, 1.0, iy(r, x1, d));
          if (h == hn - 1) rhs(rx) = detail::edge_value(p.right, d);
          else add(rx, -1.0, iy(p.region_index(h + 1, k), x1, d));
        }
        // y-edge row
        const int ry = base + m + d;
        if (eta > 0.0) {
          add(ry, 1.0, ix(r, y0, d));
          if (k == 0) rhs(ry) = detail::edge_value(p.bottom, d);
          else add(ry, -1.0, ix(p.region_index(h, k - 1), y0, d));
        } else {
          add(ry, 1.0, ix(r, y1, d));
          if (k == kn - 1) rhs(ry) = detail::edge_value(p.top, d);
          else add(ry, -1.0, ix(p.region_index(h, k + 1), y1, d));
        }
        // Z row: particular constant of the x-ODE
        const int rz = base + 2 * m + d;
        rhs(rz) = mat.source;
        for (int nn = 0; nn < m; ++nn) {
          double v = -mat.sigma_s * ker(d, nn);
          if (nn == d) v += mat.sigma_t;
          if (v != 0.0) trip.emplace_back(rz, base + 2 * m + nn, v);
        }
        const double fy = eta / dy;
        if (k == kn - 1 && eta < 0.0) rhs(rz) -= fy * detail::edge_value(p.top, d);
        else add(rz, fy, ix(r, y1, d));
        if (k == 0 && eta > 0.0) rhs(rz) += fy * detail::edge_value(p.bottom, d);
        else add(rz, -fy, ix(r, y0, d));
        // W row: particular constant of the y-ODE
        const int rw = base + 3 * m + d;
        rhs(rw) = mat.source;
        for (int nn = 0; nn < m; ++nn) {
          double v = -mat.sigma_s * ker(d, nn);
          if (nn == d) v += mat.sigma_t;
          if (v != 0.0) trip.emplace_back(rw, base + 3 * m + nn, v);
        }
        const double fx = mu / dx;
        if (h == hn - 1 && mu < 0.0) rhs(rw) -= fx * detail::edge_value(p.right, d);
        else add(rw, fx, iy(r, x1, d));
        if (h == 0 && mu > 0.0) rhs(rw) += fx * detail::edge_value(p.left, d);
        else add(rw, -fx, iy(r, x0, d));
      }
    }
  }

  Eigen::SparseMatrix<double> sys(n, n);
  sys.setFromTriplets(trip.begin(), trip.end());
  sys.makeCompressed();
  if (p.solver == LinearSolver::SparseLU) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(sys);
    lu.factorize(sys);
    if (lu.info() != Eigen::Success)
      fail(ErrorCategory::Numerical, "nodal: singular global system: " + lu.lastErrorMessage());
    s.unknowns = lu.solve(rhs);
  } else {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
    it.setTolerance(p.iterative_tolerance);
    it.setMaxIterations(20 * n);
    it.compute(sys);
    if (it.info() != Eigen::Success)
      fail(ErrorCategory::Numerical, "nodal: preconditioner setup failed");
    s.unknowns = it.solve(rhs);
    if (it.info() != Eigen::Success)
      fail(ErrorCategory::Numerical, "nodal: iterative solver did not converge");
  }
  const Eigen::VectorXd res = sys * s.unknowns - rhs;
  const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  s.system_residual = res.lpNorm<Eigen::Infinity>() / scale;
  if (!(s.system_residual < 1e-8)) {
    Eigen::Index worst = 0;
    res.cwiseAbs().maxCoeff(&worst);
    const int r = static_cast<int>(worst) / (4 * m);
    const int blk = (static_cast<int>(worst) % (4 * m)) / m;
    const int d = static_cast<int>(worst) % m;
    static constexpr const char* names[] = {"x-edge", "y-edge", "Z", "W"};
    fail(ErrorCategory::Numerical, "nodal: ill-conditioned global system, worst row in region " +
                                       std::to_string(r) + ", " + names[blk] + " block, direction " +
                                       std::to_string(d));
  }

  s.c_left.assign(nreg, Eigen::VectorXd(m));
  s.c_right.assign(nreg, Eigen::VectorXd(m));
  s.d_bottom.assign(nreg, Eigen::VectorXd(m));
  s.d_top.assign(nreg, Eigen::VectorXd(m));
  for (int k = 0; k < kn; ++k) {
    for (int h = 0; h < hn; ++h) {
      const int r = p.region_index(h, k);
      for (int d = 0; d < m; ++d) {
        const double mu = p.quad.mu[d], eta = p.quad.eta[d];
        s.c_left[r](d) = (h == 0 && mu > 0.0) ? detail::edge_value(p.left, d)
                                              : detail::evaluate_form(iy(r, p.x_lines[h], d), s.unknowns);
        s.c_right[r](d) = (h == hn - 1 && mu < 0.0)
                              ? detail::edge_value(p.right, d)
                              : detail::evaluate_form(iy(r, p.x_lines[h + 1], d), s.unknowns);
        s.d_bottom[r](d) = (k == 0 && eta > 0.0)
                               ? detail::edge_value(p.bottom, d)
                               : detail::evaluate_form(ix(r, p.y_lines[k], d), s.unknowns);
        s.d_top[r](d) = (k == kn - 1 && eta < 0.0)
                            ? detail::edge_value(p.top, d)
                            : detail::evaluate_form(ix(r, p.y_lines[k + 1], d), s.unknowns);
      }
    }
  }
  return s;
}

/// I_yr(x, Omega_d) (YAveraged, coordinate x) or I_xr(y, Omega_d) (XAveraged, coordinate y).
inline double average_intensity(const NodalSolution& s, int r, AverageAxis axis, double coord, int d) {
  const auto& p = s.problem;
  if (r < 0 || r >= p.regions()) fail(ErrorCategory::InvalidArgument, "nodal: region index out of range");
  if (d < 0 || d >= s.directions()) fail(ErrorCategory::InvalidArgument, "nodal: direction index out of range");
  const int h = r % p.nx(), k = r / p.nx();
  const double lo = axis == AverageAxis::YAveraged ? p.x_lines[h] : p.y_lines[k];
  const double hi = axis == AverageAxis::YAveraged ? p.x_lines[h + 1] : p.y_lines[k + 1];
  const double tol = 1e-12 * std::max(1.0, std::abs(hi));
  if (!(coord >= lo - tol && coord <= hi + tol))
    fail(ErrorCategory::Domain, "domain: coordinate outside region " + std::to_string(r));
  std::vector<detail::LinearTerm> f;
  if (axis == AverageAxis::YAveraged)
    detail::averaged_form(p, s.x_order, s.bases[r].y_averaged, r, axis, coord, d, f);
  else
    detail::averaged_form(p, s.y_order, s.bases[r].x_averaged, r, axis, coord, d, f);
  return detail::evaluate_form(f, s.unknowns);
}

/// Region average of the intensity in direction d, from one representation.
inline double region_average(const NodalSolution& s, int r, AverageAxis axis, int d) {
  const auto& p = s.problem;
  const int m = s.directions();
  const int h = r % p.nx(), k = r / p.nx();
  const bool ya = axis == AverageAxis::YAveraged;
  const auto& o = ya ? s.x_order : s.y_order;
  const auto& ab = ya ? s.bases[r].y_averaged : s.bases[r].x_averaged;
  const double len = ya ? p.x_lines[h + 1] - p.x_lines[h] : p.y_lines[k + 1] - p.y_lines[k];
  const int base = 4 * m * r + (ya ? 0 : m);
  const int half = o.half;
  const int pos = o.position[d];
  const bool plus = pos < half;
  const int i = plus ? pos : pos - half;
  double v = s.unknowns(4 * m * r + (ya ? 2 * m : 3 * m) + d);
  for (int j = 0; j < half; ++j) {
    const double nu = ab.nu[j];
    const double avg = -nu * std::expm1(-len / nu) / len;
    const double f1 = plus ? ab.phi_plus(i, j) : ab.phi_minus(i, j);
    const double f2 = plus ? ab.phi_minus(i, j) : ab.phi_plus(i, j);
    v += (s.unknowns(base + j) * f1 + s.unknowns(base + half + j) * f2) * avg;
  }
  return v;
}

/// Weighted mean intensity sum_d w_d Ibar_d / sum_d w_d over region r. The
/// x- and y-averaged representations must agree to 1e-6 relative.
inline double region_scalar_flux(const NodalSolution& s, int r) {
  if (r < 0 || r >= s.problem.regions()) fail(ErrorCategory::InvalidArgument, "nodal: region index out of range");
  const auto& q = s.problem.quad;
  double fy = 0.0, fx = 0.0, wsum = 0.0;
  for (int d = 0; d < s.directions(); ++d) {
    fy += q.w[d] * region_average(s, r, AverageAxis::YAveraged, d);
    fx += q.w[d] * region_average(s, r, AverageAxis::XAveraged, d);
    wsum += q.w[d];
  }
  fy /= wsum;
  fx /= wsum;
  const double scale = std::max({std::abs(fx), std::abs(fy), 1e-12 * s.unknowns.lpNorm<Eigen::Infinity>()});
  if (std::abs(fx - fy) > 1e-6 * scale)
    fail(ErrorCategory::Internal, "nodal: x- and y-averaged region fluxes disagree in region " +
                                      std::to_string(r));
  return 0.5 * (fx + fy);
}

/// Largest residual of the two transverse-integrated ODE systems at three
/// points per region and direction, relative to max(1, |S_r|).
inline double ode_residual(const NodalSolution& s) {
  const auto& p = s.problem;
  const int m = s.directions();
  double worst = 0.0;
  for (int r = 0; r < p.regions(); ++r) {
    const int h = r % p.nx(), k = r / p.nx();
    const auto& mat = p.materials[r];
    const double dx = p.x_lines[h + 1] - p.x_lines[h], dy = p.y_lines[k + 1] - p.y_lines[k];
    for (int axis = 0; axis < 2; ++axis) {
      const bool ya = axis == 0;
      const auto& o = ya ? s.x_order : s.y_order;
      const auto& ab = ya ? s.bases[r].y_averaged : s.bases[r].x_averaged;
      const double lo = ya ? p.x_lines[h] : p.y_lines[k];
      const double len = ya ? dx : dy;
      const int base = 4 * m * r + (ya ? 0 : m);
      for (double frac : {0.1, 0.5, 0.9}) {
        const double t = lo + frac * len;
        Eigen::VectorXd val(m), der(m);
        for (int d = 0; d < m; ++d) {
          const int pos = o.position[d];
          const bool plus = pos < o.half;
          const int i = plus ? pos : pos - o.half;
          double v = s.unknowns(4 * m * r + (ya ? 2 * m : 3 * m) + d), g = 0.0;
          for (int j = 0; j < o.half; ++j) {
            const double nu = ab.nu[j];
            const double e1 = std::exp(-(t - lo) / nu), e2 = std::exp(-(lo + len - t) / nu);
            const double f1 = plus ? ab.phi_plus(i, j) : ab.phi_minus(i, j);
            const double f2 = plus ? ab.phi_minus(i, j) : ab.phi_plus(i, j);
            const double a1 = s.unknowns(base + j), a2 = s.unknowns(base + o.half + j);
            v += a1 * f1 * e1 + a2 * f2 * e2;
            g += -a1 * f1 * e1 / nu + a2 * f2 * e2 / nu;
          }
          val(d) = v;
          der(d) = g;
        }
        const Eigen::VectorXd scat = mat.sigma_s * (s.kernels[r] * val);
        for (int d = 0; d < m; ++d) {
          const double c = ya ? p.quad.mu[d] : p.quad.eta[d];
          const double leak = ya ? p.quad.eta[d] / dy * (s.d_top[r](d) - s.d_bottom[r](d))
                                 : p.quad.mu[d] / dx * (s.c_right[r](d) - s.c_left[r](d));
          const double res = c * der(d) + mat.sigma_t * val(d) - scat(d) - mat.source + leak;
          worst = std::max(worst, std::abs(res) / std::max(1.0, std::abs(mat.source)));
        }
      }
    }
  }
  return worst;
}

/// Per-region particle balance of the discrete system,
///   sum_d w_d [mu_d (C_r - C_l)/dx + eta_d (D_t - D_b)/dy + beta Ibar_d - s (K Ibar)_d - S],
/// relative to sum_d w_d (|S| + beta |Ibar_d|).
inline double balance_residual(const NodalSolution& s, int r) {
  const auto& p = s.problem;
  const auto& q = p.quad;
  const int m = s.directions();
  const int h = r % p.nx(), k = r / p.nx();
  const double dx = p.x_lines[h + 1] - p.x_lines[h], dy = p.y_lines[k + 1] - p.y_lines[k];
  const auto& mat = p.materials[r];
  Eigen::VectorXd avg(m);
  for (int d = 0; d < m; ++d) avg(d) = region_average(s, r, AverageAxis::YAveraged, d);
  const Eigen::VectorXd scat = mat.sigma_s * (s.kernels[r] * avg);
  double net = 0.0, scale = 0.0;
  for (int d = 0; d < m; ++d) {
    const double leak = q.mu[d] * (s.c_right[r](d) - s.c_left[r](d)) / dx +
                        q.eta[d] * (s.d_top[r](d) - s.d_bottom[r](d)) / dy;
    net += q.w[d] * (leak + mat.sigma_t * avg(d) - scat(d) - mat.source);
    scale += q.w[d] * (std::abs(mat.source) + mat.sigma_t * std::abs(avg(d)));
  }
  return scale > 0.0 ? std::abs(net) / scale : std::abs(net);
}

}  // namespace ado
