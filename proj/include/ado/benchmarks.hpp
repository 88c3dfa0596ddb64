#pragma once

#include <array>
#include <string>
#include <vector>

#include "ado/error.hpp"
#include "ado/nodal.hpp"
#include "ado/nodal_problem.hpp"
#include "ado/oracle.hpp"

namespace ado::benchmarks {

/// Unit square, sigma_t = 1, isotropic scattering, unit source on
/// [0, 0.5]^2, vacuum on every edge. H x K regions with H, K even so the
/// source quadrant is a union of regions.
inline NodalProblem fig7(double sigma_s, const SphereQuadrature& q, int h_regions = 2, int k_regions = 2) {
  if (h_regions < 2 || k_regions < 2 || h_regions % 2 || k_regions % 2)
    fail(ErrorCategory::InvalidArgument, "fig7: mesh must have even H, K >= 2");
  if (!(sigma_s >= 0.0 && sigma_s <= 1.0))
    fail(ErrorCategory::InvalidArgument, "fig7: sigma_s must lie in [0, 1]");
  NodalProblem p;
  p.x_lines = uniform_lines(1.0, h_regions);
  p.y_lines = uniform_lines(1.0, k_regions);
  p.quad = q;
  for (int k = 0; k < k_regions; ++k)
    for (int h = 0; h < h_regions; ++h) {
      NodalMaterial m;
      m.sigma_t = 1.0;
      m.sigma_s = sigma_s;
      m.source = (2 * h < h_regions && 2 * k < k_regions) ? 1.0 : 0.0;
      p.materials.push_back(m);
    }
  return p;
}

/// Quadrant of a region: 0 source, 1 right of it, 2 above it, 3 diagonal.
inline int quadrant(const NodalProblem& p, int r) {
  const int h = r % p.nx(), k = r / p.nx();
  return (2 * h >= p.nx() ? 1 : 0) + (2 * k >= p.ny() ? 2 : 0);
}

/// Area-weighted quadrant averages of per-region values.
inline std::array<double, 4> quadrant_average(const NodalProblem& p, const std::vector<double>& region_values) {
  std::array<double, 4> sum{}, area{};
  for (int r = 0; r < p.regions(); ++r) {
    const int h = r % p.nx(), k = r / p.nx();
    const double a = (p.x_lines[h + 1] - p.x_lines[h]) * (p.y_lines[k + 1] - p.y_lines[k]);
    sum[quadrant(p, r)] += a * region_values[r];
    area[quadrant(p, r)] += a;
  }
  for (int i = 0; i < 4; ++i) sum[i] /= area[i];
  return sum;
}

inline std::array<double, 4> nodal_quadrant_fluxes(const NodalSolution& s) {
  std::vector<double> v(s.problem.regions());
  for (int r = 0; r < s.problem.regions(); ++r) v[r] = region_scalar_flux(s, r);
  return quadrant_average(s.problem, v);
}

inline std::array<double, 4> oracle_quadrant_fluxes(const NodalProblem& p, const oracle::DiamondDifferenceResult& d) {
  return quadrant_average(p, d.region_flux);
}

}  // namespace ado::benchmarks
