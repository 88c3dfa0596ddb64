#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ado/error.hpp"
#include "ado/legendre.hpp"

namespace ado {

/// Legendre-expanded phase function p(cos T) = sum_l C_l P_l(cos T), C_0 = 1.
struct PhaseFunction {
  std::vector<double> coeffs{1.0};
  std::optional<double> g;  // set when built from Henyey-Greenstein

  int order() const { return static_cast<int>(coeffs.size()) - 1; }
  bool isotropic() const {
    for (std::size_t l = 1; l < coeffs.size(); ++l)
      if (coeffs[l] != 0.0) return false;
    return true;
  }
};

inline PhaseFunction isotropic_phase() { return PhaseFunction{}; }

/// Phase function from a raw coefficient list; C_0 must be 1.
inline PhaseFunction phase_from_coefficients(std::vector<double> c) {
  if (c.empty() || std::abs(c[0] - 1.0) > 1e-14)
    fail(ErrorCategory::InvalidArgument, "phase function requires C_0 = 1");
  for (double v : c)
    if (!std::isfinite(v)) fail(ErrorCategory::InvalidArgument, "phase function coefficient not finite");
  PhaseFunction p;
  p.coeffs = std::move(c);
  p.coeffs[0] = 1.0;
  return p;
}

inline void check_asymmetry(double g) {
  if (!(std::abs(g) < 1.0))
    fail(ErrorCategory::InvalidArgument, "invalid-asymmetry: |g| must be < 1, got " + std::to_string(g));
}

/// Henyey-Greenstein expansion truncated at order L: C_l = (2l + 1) g^l.
inline PhaseFunction hg_coefficients(double g, int L) {
  check_asymmetry(g);
  if (L < 0) fail(ErrorCategory::InvalidArgument, "anisotropy order must be >= 0");
  PhaseFunction p;
  p.coeffs.resize(static_cast<std::size_t>(L) + 1);
  double gl = 1.0;
  for (int l = 0; l <= L; ++l) {
    p.coeffs[l] = (2.0 * l + 1.0) * gl;
    gl *= g;
  }
  p.g = g;
  return p;
}

inline double eval_expanded(const PhaseFunction& p, double cos_theta) {
  const int L = p.order();
  double s = p.coeffs[0];
  if (L == 0) return s;
  double p0 = 1.0, p1 = cos_theta;
  s += p.coeffs[1] * p1;
  for (int l = 2; l <= L; ++l) {
    const double p2 = ((2.0 * l - 1.0) * cos_theta * p1 - (l - 1.0) * p0) / l;
    s += p.coeffs[l] * p2;
    p0 = p1;
    p1 = p2;
  }
  return s;
}

inline double hg_exact(double cos_theta, double g) {
  check_asymmetry(g);
  const double d = 1.0 + g * g - 2.0 * g * cos_theta;
  return (1.0 - g * g) / (d * std::sqrt(d));
}

/// Phase function of the angle between two unit vectors (mu, eta, xi),
/// summed through the addition theorem with xi as the polar axis:
///   sum_l sum_k (2 - delta_0k) C_l (l-k)!/(l+k)! P_l^k(xi') P_l^k(xi) cos k(phi - phi').
/// The Condon-Shortley sign enters both P_l^k factors and cancels.
/// cos k(phi - phi') comes from the Chebyshev recurrence on cos(phi - phi'),
/// which is read off the stored cosines without forming angles.
inline double eval_two_angle(const PhaseFunction& p, const std::array<double, 3>& from,
                             const std::array<double, 3>& to) {
  const int L = p.order();
  const double xa = from[2], xb = to[2];
  const double sa = std::hypot(from[0], from[1]);
  const double sb = std::hypot(to[0], to[1]);
  double c1 = 1.0;
  if (sa > 0.0 && sb > 0.0) c1 = (from[0] * to[0] + from[1] * to[1]) / (sa * sb);
  const auto qa = scaled_assoc_legendre_table(L, xa);
  const auto qb = scaled_assoc_legendre_table(L, xb);
  double s = 0.0;
  double ckm1 = 1.0, ck = 1.0;  // cos((k-1) d), cos(k d)
  for (int k = 0; k <= L; ++k) {
    if (k == 1) ck = c1;
    if (k >= 2) {
      const double next = 2.0 * c1 * ck - ckm1;
      ckm1 = ck;
      ck = next;
    }
    double inner = 0.0;
    for (int l = k; l <= L; ++l) inner += p.coeffs[l] * qa[l][k] * qb[l][k];
    s += (k == 0 ? 1.0 : 2.0) * inner * ck;
  }
  return s;
}

}  // namespace ado
