#pragma once

#include <cmath>
#include <vector>

#include "ado/quadrature.hpp"
#include "ado/scattering.hpp"

namespace ado {

/// Internal source Q(tau, +-mu_k) as a polynomial in t = tau - tau_a per node:
///   Q(tau, +mu_k) = sum_m plus[k][m] t^m,   Q(tau, -mu_k) = sum_m minus[k][m] t^m.
/// Degree at most 4. An empty source means Q = 0.
struct SlabSource {
  static constexpr int kMaxDegree = 4;
  std::vector<std::vector<double>> plus, minus;

  bool empty() const {
    for (const auto* side : {&plus, &minus})
      for (const auto& row : *side)
        for (double c : row)
          if (c != 0.0) return false;
    return true;
  }

  static SlabSource isotropic_constant(int n, double q) {
    SlabSource s;
    s.plus.assign(n, {q});
    s.minus.assign(n, {q});
    return s;
  }
};

struct SlabProblem {
  double tau_a = 0.0;
  double tau_b = 1.0;
  double albedo = 0.0;
  PhaseFunction phase;
  double rho1s = 0.0, rho1d = 0.0, rho2s = 0.0, rho2d = 0.0;
  std::vector<double> f1, f2;  // incident data at the nodes; empty means zero
  SlabSource source;
  HalfRangeQuadrature quad;
};

/// Boundary data helpers for the named presets.
inline std::vector<double> constant_incidence(const HalfRangeQuadrature& q, double c) {
  return std::vector<double>(q.size(), c);
}

inline std::vector<double> cosine_power_incidence(const HalfRangeQuadrature& q, double c, double p) {
  std::vector<double> f(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) f[k] = c * std::pow(q.mu[k], p);
  return f;
}

}  // namespace ado
