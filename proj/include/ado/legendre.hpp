#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "ado/error.hpp"

namespace ado {

/// P_0(x) .. P_L(x) by the three-term recurrence.
inline std::vector<double> legendre_series(int L, double x) {
  std::vector<double> p(static_cast<std::size_t>(L) + 1);
  p[0] = 1.0;
  if (L >= 1) p[1] = x;
  for (int l = 2; l <= L; ++l)
    p[l] = ((2.0 * l - 1.0) * x * p[l - 1] - (l - 1.0) * p[l - 2]) / l;
  return p;
}

inline double legendre_p(int l, double x) { return legendre_series(l, x).back(); }

/// Associated Legendre function P_l^k(x) with the Condon-Shortley phase,
///   P_l^k(x) = (-1)^k (1 - x^2)^{k/2} d^k/dx^k P_l(x),
/// evaluated by upward recurrence in l from the diagonal P_k^k.
inline double assoc_legendre(int l, int k, double x) {
  if (k < 0 || k > l) return 0.0;
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  double pkk = 1.0;
  for (int m = 1; m <= k; ++m) pkk *= -(2.0 * m - 1.0) * s;
  if (l == k) return pkk;
  double prev = pkk;
  double cur = x * (2.0 * k + 1.0) * pkk;
  for (int n = k + 2; n <= l; ++n) {
    const double next = ((2.0 * n - 1.0) * x * cur - (n + k - 1.0) * prev) / (n - k);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Table of sqrt((l-k)!/(l+k)!) P_l^k(x) for 0 <= k <= l <= L, indexed
/// [l][k]. The scaling keeps the factorial ratio of the addition theorem out
/// of floating point range trouble for large L.
inline std::vector<std::vector<double>> scaled_assoc_legendre_table(int L, double x) {
  std::vector<std::vector<double>> q(static_cast<std::size_t>(L) + 1);
  for (int l = 0; l <= L; ++l) q[l].assign(static_cast<std::size_t>(l) + 1, 0.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  double diag = 1.0;
  for (int k = 0; k <= L; ++k) {
    if (k > 0) diag *= -s * std::sqrt((2.0 * k - 1.0) / (2.0 * k));
    q[k][k] = diag;
    if (k + 1 <= L) q[k + 1][k] = x * std::sqrt(2.0 * k + 1.0) * diag;
    for (int l = k + 2; l <= L; ++l) {
      q[l][k] = ((2.0 * l - 1.0) * x * q[l - 1][k] -
                 std::sqrt((l + k - 1.0) * (l - k - 1.0)) * q[l - 2][k]) /
                std::sqrt((l + k) * static_cast<double>(l - k));
    }
  }
  return q;
}

/// Gauss-Legendre rule on (-1, 1), nodes ascending.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) fail(ErrorCategory::InvalidArgument, "gauss_legendre: order must be >= 1");
  std::vector<double> x(n), w(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * z * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute the derivative at the converged root
    double p0 = 1.0, p1 = z;
    for (int l = 2; l <= n; ++l) {
      const double p2 = ((2.0 * l - 1.0) * z * p1 - (l - 1.0) * p0) / l;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  return {x, w};
}

}  // namespace ado
