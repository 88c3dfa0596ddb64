#pragma once

#include <string>
#include <vector>

#include "ado/error.hpp"
#include "ado/quadrature.hpp"
#include "ado/scattering.hpp"

namespace ado {

struct NodalMaterial {
  double sigma_t = 1.0;  // extinction beta_r
  double sigma_s = 0.0;
  PhaseFunction phase;
  double source = 0.0;   // isotropic constant S_r
};

/// Incoming intensity on one domain edge, one value per stored direction.
/// Only the entries of directions entering through that edge are read.
/// An empty vector is a vacuum edge.
struct EdgeCondition {
  std::vector<double> value;
};

enum class PhasePath { Exact, Expanded };
enum class LinearSolver { SparseLU, BiCGSTAB };

/// Domain [x_0, x_H] x [y_0, y_K] split by the grid lines into R = H K
/// rectangular regions, numbered r = k H + h (h along x, k along y).
struct NodalProblem {
  std::vector<double> x_lines, y_lines;
  std::vector<NodalMaterial> materials;  // one per region
  EdgeCondition left, right, bottom, top;
  SphereQuadrature quad;
  PhasePath phase_path = PhasePath::Exact;
  LinearSolver solver = LinearSolver::SparseLU;
  double iterative_tolerance = 1e-13;

  int nx() const { return static_cast<int>(x_lines.size()) - 1; }
  int ny() const { return static_cast<int>(y_lines.size()) - 1; }
  int regions() const { return nx() * ny(); }
  int region_index(int h, int k) const { return k * nx() + h; }
};

inline std::vector<double> uniform_lines(double length, int cells) {
  std::vector<double> v(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i) v[i] = length * i / cells;
  return v;
}

inline void validate(const NodalProblem& p) {
  auto increasing = [](const std::vector<double>& v) {
    if (v.size() < 2) return false;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] > v[i - 1])) return false;
    return true;
  };
  if (!increasing(p.x_lines) || !increasing(p.y_lines))
    fail(ErrorCategory::InvalidArgument, "nodal: grid lines must be strictly increasing");
  if (static_cast<int>(p.materials.size()) != p.regions())
    fail(ErrorCategory::InvalidArgument, "nodal: need one material per region");
  for (std::size_t r = 0; r < p.materials.size(); ++r) {
    const auto& m = p.materials[r];
    if (!(m.sigma_t > 0.0) || !(m.sigma_s >= 0.0) || m.sigma_s > m.sigma_t)
      fail(ErrorCategory::InvalidArgument,
           "nodal: region " + std::to_string(r) + " needs sigma_t > 0 and 0 <= sigma_s <= sigma_t");
  }
  if (p.quad.size() == 0) fail(ErrorCategory::InvalidArgument, "nodal: empty quadrature");
  for (const auto* e : {&p.left, &p.right, &p.bottom, &p.top})
    if (!e->value.empty() && e->value.size() != p.quad.size())
      fail(ErrorCategory::InvalidArgument, "nodal: edge data must have one value per direction");
}

}  // namespace ado
