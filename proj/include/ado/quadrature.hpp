#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ado/detail/level_symmetric_tables.hpp"
#include "ado/error.hpp"
#include "ado/legendre.hpp"

namespace ado {

/// Nodes and weights on (0, 1); weights sum to 1.
struct HalfRangeQuadrature {
  int order = 0;
  std::vector<double> mu;
  std::vector<double> w;

  std::size_t size() const { return mu.size(); }
};

/// Gauss-Legendre rule mapped from (-1, 1) onto (0, 1).
inline HalfRangeQuadrature half_range_gauss(int n) {
  if (n < 1) fail(ErrorCategory::InvalidArgument, "invalid-order: half-range Gauss order must be >= 1");
  auto [x, w] = gauss_legendre(n);
  HalfRangeQuadrature q;
  q.order = n;
  q.mu.resize(n);
  q.w.resize(n);
  for (int k = 0; k < n; ++k) {
    q.mu[k] = 0.5 * (1.0 + x[k]);
    q.w[k] = 0.5 * w[k];
  }
  return q;
}

enum class SphereScheme { LevelSymmetric, LegendreChebyshevQuad, LegendreChebyshevTri };

inline const char* to_string(SphereScheme s) {
  switch (s) {
    case SphereScheme::LevelSymmetric: return "lqn";
    case SphereScheme::LegendreChebyshevQuad: return "pntn";
    case SphereScheme::LegendreChebyshevTri: return "pntnsn";
  }
  return "unknown";
}

/// Upper-hemisphere (xi > 0) direction set with total weight 2 pi.
///
/// Storage is octant-major over the sign patterns (mu, eta) = (+,+), (-,+),
/// (-,-), (+,-), then level-major (xi ascending) within an octant, and
/// azimuth ascending within a level of the first octant. The other octants
/// are sign flips of the first, so index o * m_oct + p always refers to the
/// image of point p.
struct SphereQuadrature {
  SphereScheme scheme = SphereScheme::LevelSymmetric;
  int order = 0;
  int m_oct = 0;
  std::vector<double> mu, eta, xi, w;
  std::vector<int> level;   // 1-based polar level of each direction
  std::vector<int> octant;  // 0..3 in the storage order above

  std::size_t size() const { return w.size(); }
};

namespace detail {

struct OctantPoint {
  double mu, eta, xi, w;
  int level;
};

inline SphereQuadrature replicate_octants(SphereScheme scheme, int order,
                                          const std::vector<OctantPoint>& pts) {
  static constexpr std::array<std::array<int, 2>, 4> signs = {{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
  SphereQuadrature q;
  q.scheme = scheme;
  q.order = order;
  q.m_oct = static_cast<int>(pts.size());
  for (int o = 0; o < 4; ++o) {
    for (const auto& p : pts) {
      q.mu.push_back(signs[o][0] * p.mu);
      q.eta.push_back(signs[o][1] * p.eta);
      q.xi.push_back(p.xi);
      q.w.push_back(p.w);
      q.level.push_back(p.level);
      q.octant.push_back(o);
    }
  }
  return q;
}

inline void require_even_order(int n, const char* who) {
  if (n < 2 || n % 2 != 0)
    fail(ErrorCategory::InvalidArgument,
         std::string("invalid-order: ") + who + " requires an even order >= 2, got " +
             std::to_string(n));
}

}  // namespace detail

/// Level-symmetric LQ_N set, N in {2, 4, ..., 20}.
inline SphereQuadrature level_symmetric(int n) {
  detail::require_even_order(n, "level_symmetric");
  if (n > 20)
    fail(ErrorCategory::Unsupported,
         "unsupported-order: level-symmetric sets exist only for N <= 20, got " + std::to_string(n));
  const auto& entries = detail::level_symmetric_entries();
  const auto it = std::find_if(entries.begin(), entries.end(),
                               [n](const auto& e) { return e.order == n; });
  if (it == entries.end()) fail(ErrorCategory::Internal, "level_symmetric: missing table");

  const int nl = n / 2;
  std::vector<double> mu(nl);
  mu[0] = it->mu1;
  const double step = n > 2 ? 2.0 * (1.0 - 3.0 * it->mu1 * it->mu1) / (n - 2) : 0.0;
  for (int i = 1; i < nl; ++i) mu[i] = std::sqrt(it->mu1 * it->mu1 + i * step);

  auto class_weight = [&](int i, int j, int k) {
    std::array<int, 3> key{i, j, k};
    std::sort(key.begin(), key.end());
    for (std::size_t c = 0; c < it->classes.size(); ++c)
      if (it->classes[c] == key) return it->class_weights[c];
    fail(ErrorCategory::Internal, "level_symmetric: point class not tabulated");
  };

  // Level k carries xi = mu_k; within a level, eta grows with j.
  std::vector<detail::OctantPoint> pts;
  const int sum = nl + 2;
  for (int k = 1; k <= nl; ++k) {
    for (int j = 1; j <= nl; ++j) {
      const int i = sum - j - k;
      if (i < 1) continue;
      pts.push_back({mu[i - 1], mu[j - 1], mu[k - 1],
                     0.5 * std::numbers::pi * class_weight(i, j, k), k});
    }
  }
  return detail::replicate_octants(SphereScheme::LevelSymmetric, n, pts);
}

/// Legendre-Chebyshev quadrangular set P_N T_N: N/2 polar levels at the
/// positive roots of P_N, each with the N/2 Chebyshev azimuths of an octant.
inline SphereQuadrature legendre_chebyshev_quad(int n) {
  detail::require_even_order(n, "legendre_chebyshev_quad");
  auto [x, wg] = gauss_legendre(n);
  const int nl = n / 2;
  std::vector<detail::OctantPoint> pts;
  for (int l = 0; l < nl; ++l) {
    const double xi = x[nl + l];
    const double wl = wg[nl + l];
    const double s = std::sqrt(1.0 - xi * xi);
    for (int j = 1; j <= nl; ++j) {
      const double phi = (2.0 * j - 1.0) * std::numbers::pi / (2.0 * n);
      pts.push_back({s * std::cos(phi), s * std::sin(phi), xi, wl * std::numbers::pi / n, l + 1});
    }
  }
  return detail::replicate_octants(SphereScheme::LegendreChebyshevQuad, n, pts);
}

/// Legendre-Chebyshev triangular set P_N T_N S_N. Level i (xi ascending) has
/// N - 2i + 2 azimuths on (0, pi), half of them in each of the two upper
/// quadrants. Weights are the tabulated w_i / (N - 2i + 2) times pi, the
/// uniform factor that brings the hemisphere total to 2 pi.
inline SphereQuadrature legendre_chebyshev_tri(int n) {
  detail::require_even_order(n, "legendre_chebyshev_tri");
  auto [x, wg] = gauss_legendre(n);
  const int nl = n / 2;
  std::vector<detail::OctantPoint> pts;
  for (int i = 1; i <= nl; ++i) {
    const double xi = x[nl + i - 1];
    const double wl = wg[nl + i - 1];
    const double s = std::sqrt(1.0 - xi * xi);
    const int ni = n - 2 * i + 2;
    for (int j = 1; j <= ni / 2; ++j) {
      const double phi =
          0.5 * std::numbers::pi * (1.0 - static_cast<double>(n - 2 * j - 2 * i + 3) / ni);
      pts.push_back({s * std::cos(phi), s * std::sin(phi), xi, std::numbers::pi * wl / ni, i});
    }
  }
  return detail::replicate_octants(SphereScheme::LegendreChebyshevTri, n, pts);
}

inline SphereQuadrature make_sphere_quadrature(SphereScheme scheme, int n) {
  switch (scheme) {
    case SphereScheme::LevelSymmetric: return level_symmetric(n);
    case SphereScheme::LegendreChebyshevQuad: return legendre_chebyshev_quad(n);
    case SphereScheme::LegendreChebyshevTri: return legendre_chebyshev_tri(n);
  }
  fail(ErrorCategory::InvalidArgument, "unknown quadrature scheme");
}

/// Integral of mu^a eta^b xi^c over the hemisphere xi > 0.
inline double analytic_half_sphere_moment(int a, int b, int c) {
  if (a % 2 != 0 || b % 2 != 0) return 0.0;
  auto beta = [](double p, double q) { return std::tgamma(p) * std::tgamma(q) / std::tgamma(p + q); };
  return beta((a + 1) / 2.0, (b + 1) / 2.0) * beta((a + b + 2) / 2.0, (c + 1) / 2.0);
}

inline double moment_error(const SphereQuadrature& q, int a, int b, int c) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    s += q.w[i] * std::pow(q.mu[i], a) * std::pow(q.eta[i], b) * std::pow(q.xi[i], c);
  return std::abs(s - analytic_half_sphere_moment(a, b, c));
}

struct MomentAuditRow {
  int a, b, c;
  double error;
};

/// Every even monomial mu^a eta^b xi^c with a + b + c <= max_degree.
inline std::vector<MomentAuditRow> moment_audit(const SphereQuadrature& q, int max_degree) {
  std::vector<MomentAuditRow> rows;
  for (int d = 0; d <= max_degree; d += 2)
    for (int a = 0; a <= d; a += 2)
      for (int b = 0; a + b <= d; b += 2) {
        const int c = d - a - b;
        rows.push_back({a, b, c, moment_error(q, a, b, c)});
      }
  return rows;
}

/// Largest even degree D such that all even moments of degree <= D are
/// reproduced within tol (relative to the analytic value).
inline int exactness_degree(const SphereQuadrature& q, double tol, int max_degree = 40) {
  int best = -2;
  for (int d = 0; d <= max_degree; d += 2) {
    for (int a = 0; a <= d; a += 2)
      for (int b = 0; a + b <= d; b += 2) {
        const int c = d - a - b;
        if (moment_error(q, a, b, c) > tol * analytic_half_sphere_moment(a, b, c)) return best;
      }
    best = d;
  }
  return best;
}

}  // namespace ado
