#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ado/error.hpp"
#include "ado/legendre.hpp"
#include "ado/quadrature.hpp"
#include "ado/scattering.hpp"
#include "ado/slab_problem.hpp"

namespace ado {

struct SpectralBasis {
  int n = 0;                        // half-range order, also the eigenproblem dimension
  Eigen::MatrixXd A, B;             // the two half-order matrices
  std::vector<double> nu;           // finite separation constants, descending
  Eigen::MatrixXd phi_plus;         // column j = Phi_+(nu_j)
  Eigen::MatrixXd phi_minus;        // column j = Phi_-(nu_j)
  std::vector<double> norm;         // N(nu_j)
  std::vector<double> phi0;         // Phi_0(nu_j)
  double max_residual = 0.0;        // max_j |(BA)X - X/nu^2| / (|X| max(1, |BA|))
  // Conservative completion: replaces the nu = infinity pair by
  //   constant mode  I(+-) = u1 / 2,
  //   linear mode    I(+-) = (s u1 +- v / l) / 2,  s = (tau - tau_a) / l.
  bool degenerate = false;
  Eigen::VectorXd u1, v;
  std::vector<std::string> warnings;

  int dimension() const { return n; }
  int regular_count() const { return static_cast<int>(nu.size()); }
  int mode_count() const { return 2 * regular_count() + (degenerate ? 2 : 0); }
};

namespace detail {

inline void validate(const SlabProblem& p) {
  if (p.quad.size() == 0) fail(ErrorCategory::InvalidArgument, "slab: empty quadrature");
  if (!(p.tau_b > p.tau_a)) fail(ErrorCategory::InvalidArgument, "slab: tau_b must exceed tau_a");
  if (!(p.albedo >= 0.0 && p.albedo <= 1.0))
    fail(ErrorCategory::InvalidArgument, "slab: albedo must lie in [0, 1]");
  for (double r : {p.rho1s, p.rho1d, p.rho2s, p.rho2d})
    if (!(r >= 0.0 && r <= 1.0))
      fail(ErrorCategory::InvalidArgument, "slab: reflection coefficients must lie in [0, 1]");
  if (p.rho1s + p.rho1d > 1.0 || p.rho2s + p.rho2d > 1.0)
    fail(ErrorCategory::InvalidArgument, "slab: total reflectivity of a face exceeds 1");
  const std::size_t n = p.quad.size();
  if (!p.f1.empty() && p.f1.size() != n) fail(ErrorCategory::InvalidArgument, "slab: F1 length != N");
  if (!p.f2.empty() && p.f2.size() != n) fail(ErrorCategory::InvalidArgument, "slab: F2 length != N");
  for (const auto* side : {&p.source.plus, &p.source.minus}) {
    if (side->empty()) continue;
    if (side->size() != n) fail(ErrorCategory::InvalidArgument, "slab: source rows != N");
    for (const auto& row : *side)
      if (static_cast<int>(row.size()) > SlabSource::kMaxDegree + 1)
        fail(ErrorCategory::Unsupported, "unsupported-source: polynomial degree above 4");
  }
}

// Scattering operators K(+-) = (w/2) sum_l beta_l (1 +- (-1)^l) Pi(l) Pi(l)^T W.
inline void scattering_operators(const SlabProblem& p, Eigen::MatrixXd& kp, Eigen::MatrixXd& km) {
  const int n = static_cast<int>(p.quad.size());
  const int L = p.phase.order();
  Eigen::MatrixXd pl(n, L + 1);
  for (int k = 0; k < n; ++k) {
    const auto row = legendre_series(L, p.quad.mu[k]);
    for (int l = 0; l <= L; ++l) pl(k, l) = row[l];
  }
  kp = Eigen::MatrixXd::Zero(n, n);
  km = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l <= L; ++l) {
    const double c = 0.5 * p.albedo * p.phase.coeffs[l] * 2.0;
    Eigen::MatrixXd outer = pl.col(l) * pl.col(l).transpose();
    for (int k = 0; k < n; ++k) outer.col(k) *= p.quad.w[k];
    if (l % 2 == 0) kp += c * outer;
    else km += c * outer;
  }
}

}  // namespace detail

inline SpectralBasis build_basis(const SlabProblem& p) {
  detail::validate(p);
  const int n = static_cast<int>(p.quad.size());
  Eigen::VectorXd mu(n), w(n);
  for (int k = 0; k < n; ++k) {
    mu(k) = p.quad.mu[k];
    w(k) = p.quad.w[k];
  }
  Eigen::MatrixXd kp, km;
  detail::scattering_operators(p, kp, km);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd minv = mu.cwiseInverse();

  SpectralBasis b;
  b.n = n;
  b.A = (id - kp) * minv.asDiagonal();
  b.B = (id - km) * minv.asDiagonal();
  const Eigen::MatrixXd ba = b.B * b.A;

  Eigen::EigenSolver<Eigen::MatrixXd> es(ba);
  if (es.info() != Eigen::Success) fail(ErrorCategory::Numerical, "slab: eigensolver failed");
  const auto lam = es.eigenvalues();
  const auto vec = es.eigenvectors();
  const double scale = std::max(1.0, ba.lpNorm<Eigen::Infinity>());

  std::vector<int> order(n);
  for (int j = 0; j < n; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return lam(x).real() < lam(y).real(); });

  // The conservative case has an exact zero eigenvalue; roundoff makes it
  // O(eps |BA|), so it is recognised relative to the matrix scale.
  int skip = -1;
  if (std::abs(lam(order[0])) <= 1e-12 * scale) {
    skip = order[0];
    b.degenerate = true;
  }

  std::vector<std::pair<double, Eigen::VectorXd>> modes;
  for (int idx : order) {
    if (idx == skip) continue;
    const std::complex<double> l = lam(idx);
    if (std::abs(l.imag()) > 1e-8 * std::abs(l.real()))
      fail(ErrorCategory::Numerical, "complex-spectrum: eigenvalue of BA with nonzero imaginary part");
    if (l.real() <= 0.0)
      fail(ErrorCategory::Numerical, "supercritical-spectrum: eigenvalue of BA is not positive");
    Eigen::VectorXcd xc = vec.col(idx);
    Eigen::Index imax = 0;
    xc.cwiseAbs().maxCoeff(&imax);
    xc /= xc(imax);
    Eigen::VectorXd x = xc.real();
    const double res = (ba * x - l.real() * x).norm() / x.norm();
    b.max_residual = std::max(b.max_residual, res / scale);
    modes.emplace_back(1.0 / std::sqrt(l.real()), x);
  }

  const int nr = static_cast<int>(modes.size());
  b.nu.resize(nr);
  b.phi_plus.resize(n, nr);
  b.phi_minus.resize(n, nr);
  b.norm.resize(nr);
  b.phi0.resize(nr);
  for (int j = 0; j < nr; ++j) {
    const double nu = modes[j].first;
    const Eigen::VectorXd& x = modes[j].second;
    const Eigen::VectorXd ax = nu * (b.A * x);
    b.nu[j] = nu;
    b.phi_plus.col(j) = 0.5 * minv.asDiagonal() * (x + ax);
    b.phi_minus.col(j) = 0.5 * minv.asDiagonal() * (x - ax);
    const auto& pp = b.phi_plus.col(j);
    const auto& pm = b.phi_minus.col(j);
    b.norm[j] = (w.cwiseProduct(mu).cwiseProduct(pp.cwiseProduct(pp) - pm.cwiseProduct(pm))).sum();
    b.phi0[j] = w.dot(pp + pm);
    if (!(std::abs(b.norm[j]) > 0.0))
      fail(ErrorCategory::Numerical, "slab: vanishing normalization constant N(nu)");
    if (j > 0 && std::abs(b.nu[j - 1] - nu) < 1e-12 * b.nu[j - 1])
      b.warnings.push_back("clustered separation constants near nu = " + std::to_string(nu));
  }

  if (b.degenerate) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(id - kp, Eigen::ComputeFullV);
    Eigen::VectorXd u = svd.matrixV().col(n - 1);
    Eigen::Index imax = 0;
    u.cwiseAbs().maxCoeff(&imax);
    u /= u(imax);
    b.u1 = u;
    const Eigen::VectorXd x0 = mu.cwiseProduct(u);
    b.v = -minv.cwiseProduct(b.B.partialPivLu().solve(x0));
  }
  return b;
}

namespace detail {

// I_m(t) = int_0^t u^m exp(-(t - u)/nu) du for m = 0..deg.
inline std::vector<double> exp_moments(int deg, double t, double nu) {
  std::vector<double> out(static_cast<std::size_t>(deg) + 1);
  const double x = t / nu;
  if (x <= 4.0) {
    for (int m = 0; m <= deg; ++m) {
      // t^{m+1} m! sum_n (-x)^n / (m+n+1)!
      double term = 1.0;
      for (int k = 1; k <= m + 1; ++k) term /= k;  // 1/(m+1)!
      double s = 0.0;
      for (int nn = 0; nn < 200; ++nn) {
        s += term;
        term *= -x / (m + nn + 2);
        if (std::abs(term) < 1e-18 * std::abs(s)) break;
      }
      double fact = 1.0;
      for (int k = 2; k <= m; ++k) fact *= k;
      out[m] = std::pow(t, m + 1) * fact * s;
    }
  } else {
    out[0] = -nu * std::expm1(-x);
    for (int m = 1; m <= deg; ++m) out[m] = nu * std::pow(t, m) - m * nu * out[m - 1];
  }
  return out;
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

/// Closed-form Green's-function particular solution for polynomial sources.
struct ParticularSolution {
  int degree = -1;  // -1 when Q = 0
  // Per regular mode j: coefficients of the A_j(tau) and B_j(tau) integrands
  // (already divided by N(nu_j)); A in powers of (tau' - tau_a), B in powers of
  // (tau_b - tau').
  std::vector<std::vector<double>> a_coef, b_coef;

  bool zero() const { return degree < 0; }
};

inline ParticularSolution particular_solution(const SlabProblem& p, const SpectralBasis& b) {
  ParticularSolution ps;
  if (p.source.empty()) return ps;
  if (b.degenerate)
    fail(ErrorCategory::Unsupported,
         "unsupported-source: internal sources are not supported for a conservative (albedo 1) medium");
  const int n = b.n;
  int deg = 0;
  for (const auto* side : {&p.source.plus, &p.source.minus})
    for (const auto& row : *side) deg = std::max(deg, static_cast<int>(row.size()) - 1);
  ps.degree = deg;
  auto coef = [](const std::vector<std::vector<double>>& side, int k, int m) {
    if (side.empty() || m >= static_cast<int>(side[k].size())) return 0.0;
    return side[k][m];
  };
  const double len = p.tau_b - p.tau_a;
  const int nr = b.regular_count();
  ps.a_coef.assign(nr, std::vector<double>(deg + 1, 0.0));
  ps.b_coef.assign(nr, std::vector<double>(deg + 1, 0.0));
  for (int j = 0; j < nr; ++j) {
    std::vector<double> bt(deg + 1, 0.0);
    for (int m = 0; m <= deg; ++m) {
      double sa = 0.0, sb = 0.0;
      for (int k = 0; k < n; ++k) {
        const double qp = coef(p.source.plus, k, m), qm = coef(p.source.minus, k, m);
        sa += p.quad.w[k] * (qp * b.phi_plus(k, j) + qm * b.phi_minus(k, j));
        sb += p.quad.w[k] * (qp * b.phi_minus(k, j) + qm * b.phi_plus(k, j));
      }
      ps.a_coef[j][m] = sa / b.norm[j];
      bt[m] = sb / b.norm[j];
    }
    // (tau' - tau_a)^m = (len - u)^m with u = tau_b - tau'
    for (int m = 0; m <= deg; ++m)
      for (int q = 0; q <= m; ++q)
        ps.b_coef[j][q] += bt[m] * detail::binomial(m, q) * std::pow(len, m - q) * (q % 2 ? -1.0 : 1.0);
  }
  return ps;
}

/// A_j(tau) and B_j(tau) of the particular solution.
inline void particular_amplitudes(const SlabProblem& p, const SpectralBasis& b,
                                  const ParticularSolution& ps, double tau,
                                  Eigen::VectorXd& aj, Eigen::VectorXd& bj) {
  const int nr = b.regular_count();
  aj = Eigen::VectorXd::Zero(nr);
  bj = Eigen::VectorXd::Zero(nr);
  if (ps.zero()) return;
  for (int j = 0; j < nr; ++j) {
    const auto ia = detail::exp_moments(ps.degree, tau - p.tau_a, b.nu[j]);
    const auto ib = detail::exp_moments(ps.degree, p.tau_b - tau, b.nu[j]);
    for (int m = 0; m <= ps.degree; ++m) {
      aj(j) += ps.a_coef[j][m] * ia[m];
      bj(j) += ps.b_coef[j][m] * ib[m];
    }
  }
}

struct SlabSolution {
  SlabProblem problem;
  SpectralBasis basis;
  ParticularSolution particular;
  Eigen::VectorXd a, b;          // A_j, B_j of the finite modes
  double c_const = 0.0;          // conservative constant-mode coefficient
  double c_linear = 0.0;         // conservative linear-mode coefficient
  double rcond = 0.0;            // reciprocal condition estimate of the boundary system
  double bc_residual = 0.0;      // max-norm boundary-condition residual
};

namespace detail {

// Intensities (+mu_k and -mu_k) of mode `m` with unit coefficient.
inline void mode_values(const SlabProblem& p, const SpectralBasis& b, int m, double tau,
                        Eigen::VectorXd& ip, Eigen::VectorXd& im) {
  const int nr = b.regular_count();
  if (m < nr) {
    const double e = std::exp(-(tau - p.tau_a) / b.nu[m]);
    ip = b.phi_plus.col(m) * e;
    im = b.phi_minus.col(m) * e;
  } else if (m < 2 * nr) {
    const int j = m - nr;
    const double e = std::exp(-(p.tau_b - tau) / b.nu[j]);
    ip = b.phi_minus.col(j) * e;
    im = b.phi_plus.col(j) * e;
  } else {
    const double len = p.tau_b - p.tau_a;
    if (m == 2 * nr) {
      ip = 0.5 * b.u1;
      im = 0.5 * b.u1;
    } else {
      const double s = (tau - p.tau_a) / len;
      ip = 0.5 * (s * b.u1 + b.v / len);
      im = 0.5 * (s * b.u1 - b.v / len);
    }
  }
}

inline void particular_values(const SlabProblem& p, const SpectralBasis& b,
                              const ParticularSolution& ps, double tau, Eigen::VectorXd& ip,
                              Eigen::VectorXd& im) {
  ip = Eigen::VectorXd::Zero(b.n);
  im = Eigen::VectorXd::Zero(b.n);
  if (ps.zero()) return;
  Eigen::VectorXd aj, bj;
  particular_amplitudes(p, b, ps, tau, aj, bj);
  ip = b.phi_plus * aj + b.phi_minus * bj;
  im = b.phi_minus * aj + b.phi_plus * bj;
}

// Left-hand side of the reflecting boundary condition at one face:
//   out - rho_s * in - 2 rho_d (sum_k w_k mu_k in_k)
inline Eigen::VectorXd boundary_operator(const HalfRangeQuadrature& q, double rs, double rd,
                                         const Eigen::VectorXd& out, const Eigen::VectorXd& in) {
  double flux = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) flux += q.w[k] * q.mu[k] * in(k);
  return out - rs * in - Eigen::VectorXd::Constant(out.size(), 2.0 * rd * flux);
}

inline void check_tau(const SlabProblem& p, double tau) {
  const double tol = 1e-12 * std::max(1.0, std::abs(p.tau_b) + std::abs(p.tau_a));
  if (!(tau >= p.tau_a - tol && tau <= p.tau_b + tol))
    fail(ErrorCategory::Domain, "domain: tau = " + std::to_string(tau) + " outside the slab");
}

}  // namespace detail

/// Intensities at all nodes: ip(k) = I(tau, +mu_k), im(k) = I(tau, -mu_k).
inline void intensities(const SlabSolution& s, double tau, Eigen::VectorXd& ip, Eigen::VectorXd& im) {
  detail::check_tau(s.problem, tau);
  detail::particular_values(s.problem, s.basis, s.particular, tau, ip, im);
  const int nr = s.basis.regular_count();
  Eigen::VectorXd mp, mm;
  for (int m = 0; m < s.basis.mode_count(); ++m) {
    double c = 0.0;
    if (m < nr) c = s.a(m);
    else if (m < 2 * nr) c = s.b(m - nr);
    else c = (m == 2 * nr) ? s.c_const : s.c_linear;
    if (c == 0.0) continue;
    detail::mode_values(s.problem, s.basis, m, tau, mp, mm);
    ip += c * mp;
    im += c * mm;
  }
}

inline SlabSolution solve(const SlabProblem& p) {
  SlabSolution s;
  s.problem = p;
  s.basis = build_basis(p);
  s.particular = particular_solution(p, s.basis);
  const auto& b = s.basis;
  const int n = b.n;
  const int nm = b.mode_count();
  if (nm != 2 * n) fail(ErrorCategory::Internal, "slab: mode count differs from 2N");

  Eigen::MatrixXd sys(2 * n, 2 * n);
  Eigen::VectorXd mp, mm;
  for (int m = 0; m < nm; ++m) {
    detail::mode_values(p, b, m, p.tau_a, mp, mm);
    sys.block(0, m, n, 1) = detail::boundary_operator(p.quad, p.rho1s, p.rho1d, mp, mm);
    detail::mode_values(p, b, m, p.tau_b, mp, mm);
    sys.block(n, m, n, 1) = detail::boundary_operator(p.quad, p.rho2s, p.rho2d, mm, mp);
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n);
  for (int k = 0; k < n; ++k) {
    if (!p.f1.empty()) rhs(k) = p.f1[k];
    if (!p.f2.empty()) rhs(n + k) = p.f2[k];
  }
  detail::particular_values(p, b, s.particular, p.tau_a, mp, mm);
  rhs.head(n) -= detail::boundary_operator(p.quad, p.rho1s, p.rho1d, mp, mm);
  detail::particular_values(p, b, s.particular, p.tau_b, mp, mm);
  rhs.tail(n) -= detail::boundary_operator(p.quad, p.rho2s, p.rho2d, mm, mp);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys);
  s.rcond = lu.rcond();
  if (!(s.rcond >= 1e3 * std::numeric_limits<double>::epsilon())) {
    std::string msg = "near-singular boundary system (rcond " + std::to_string(s.rcond) + ")";
    if (b.degenerate) msg += "; a conservative medium between fully reflecting faces has no unique solution";
    fail(ErrorCategory::Numerical, msg);
  }
  const Eigen::VectorXd c = lu.solve(rhs);
  const int nr = b.regular_count();
  s.a = c.head(nr);
  s.b = c.segment(nr, nr);
  if (b.degenerate) {
    s.c_const = c(2 * nr);
    s.c_linear = c(2 * nr + 1);
  }
  s.bc_residual = (sys * c - rhs).lpNorm<Eigen::Infinity>();
  return s;
}

/// I(tau, mu) for mu = +-mu_k of the quadrature; other directions are rejected.
inline double intensity(const SlabSolution& s, double tau, double mu) {
  const auto& q = s.problem.quad;
  const double am = std::abs(mu);
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (std::abs(q.mu[k] - am) <= 1e-12) {
      Eigen::VectorXd ip, im;
      intensities(s, tau, ip, im);
      return mu > 0.0 ? ip(k) : im(k);
    }
  }
  fail(ErrorCategory::Unsupported, "unsupported-direction: mu = " + std::to_string(mu) +
                                       " is not a quadrature node");
}

/// rho(tau) = sum_j [A_j e^{-(tau-tau_a)/nu_j} + B_j e^{-(tau_b-tau)/nu_j} + A_j(tau) + B_j(tau)] Phi_0(nu_j),
/// plus the contribution of the conservative pair when present.
inline double density(const SlabSolution& s, double tau) {
  detail::check_tau(s.problem, tau);
  const auto& p = s.problem;
  const auto& b = s.basis;
  Eigen::VectorXd aj, bj;
  particular_amplitudes(p, b, s.particular, tau, aj, bj);
  double rho = 0.0;
  for (int j = 0; j < b.regular_count(); ++j) {
    const double amp = s.a(j) * std::exp(-(tau - p.tau_a) / b.nu[j]) +
                       s.b(j) * std::exp(-(p.tau_b - tau) / b.nu[j]) + aj(j) + bj(j);
    rho += amp * b.phi0[j];
  }
  if (b.degenerate) {
    double wu = 0.0;
    for (int k = 0; k < b.n; ++k) wu += p.quad.w[k] * b.u1(k);
    const double sfrac = (tau - p.tau_a) / (p.tau_b - p.tau_a);
    rho += (s.c_const + s.c_linear * sfrac) * wu;
  }
  return rho;
}

/// J(tau) = sum_k w_k mu_k [I(tau, mu_k) - I(tau, -mu_k)].
inline double net_current(const SlabSolution& s, double tau) {
  Eigen::VectorXd ip, im;
  intensities(s, tau, ip, im);
  double j = 0.0;
  for (int k = 0; k < s.basis.n; ++k) j += s.problem.quad.w[k] * s.problem.quad.mu[k] * (ip(k) - im(k));
  return j;
}

}  // namespace ado
