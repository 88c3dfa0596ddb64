#include <gtest/gtest.h>

#include <cmath>

#include "ado/benchmarks.hpp"
#include "ado/nodal.hpp"

using namespace ado;

namespace {

NodalProblem single_region(double lx, double ly, double sigma_t, double sigma_s, double source,
                           const SphereQuadrature& q) {
  NodalProblem p;
  p.x_lines = {0.0, lx};
  p.y_lines = {0.0, ly};
  p.quad = q;
  NodalMaterial m;
  m.sigma_t = sigma_t;
  m.sigma_s = sigma_s;
  m.source = source;
  p.materials = {m};
  return p;
}

// Closed-form solution of the constant-leakage equations for one purely
// absorbing region with vacuum edges. Per direction, with edge constants C
// (x-exit) and D (y-exit):
//   C = (S - eta D / ly) ex / beta,  D = (S - mu C / lx) ey / beta,
//   ex = 1 - exp(-beta lx / mu),     ey = 1 - exp(-beta ly / eta),
// and the region average is (S - eta D / ly)(1 - mu ex / (beta lx)) / beta.
double closure_flux(const SphereQuadrature& q, double lx, double ly, double beta, double s) {
  double num = 0.0, wsum = 0.0;
  for (std::size_t d = 0; d < q.size(); ++d) {
    const double mu = std::abs(q.mu[d]), eta = std::abs(q.eta[d]);
    const double ex = -std::expm1(-beta * lx / mu), ey = -std::expm1(-beta * ly / eta);
    const double c = s * (1.0 - eta * ey / (ly * beta)) * ex / beta /
                     (1.0 - eta * mu * ex * ey / (lx * ly * beta * beta));
    const double dd = (s - mu * c / lx) * ey / beta;
    num += q.w[d] * (s - eta * dd / ly) * (1.0 - mu * ex / (beta * lx)) / beta;
    wsum += q.w[d];
  }
  return num / wsum;
}

// Quadrant averages of the diamond-difference oracle at 256 x 256 (LQ_4,
// tolerance 1e-12); quadrants 1 and 2 coincide.
constexpr double kDd09[3] = {0.3630156304, 0.1175440086, 0.0882990667};
constexpr double kDd03[3] = {0.2823394538, 0.0732345615, 0.0513357406};

}  // namespace

TEST(Ordering, LevelSymmetricFourXScheme) {
  const auto q = level_symmetric(4);
  const auto o = order_directions(q, OrderingScheme::XScheme);
  ASSERT_EQ(q.size(), 12u);
  ASSERT_EQ(o.half, 6);
  for (int i = 0; i < 6; ++i) {
    EXPECT_GT(q.mu[o.perm[i]], 0.0);
    EXPECT_DOUBLE_EQ(q.mu[o.perm[i + 6]], -q.mu[o.perm[i]]);
    EXPECT_DOUBLE_EQ(q.eta[o.perm[i + 6]], q.eta[o.perm[i]]);
  }
  for (int d = 0; d < 12; ++d) {
    EXPECT_EQ(o.mirror[o.mirror[d]], d);
    EXPECT_EQ(o.perm[o.position[d]], d);
  }
}

TEST(Ordering, YSchemeOnSmallestSet) {
  const auto q = legendre_chebyshev_quad(2);
  const auto o = order_directions(q, OrderingScheme::YScheme);
  ASSERT_EQ(o.half, 2);
  for (int i = 0; i < 2; ++i) {
    EXPECT_GT(q.eta[o.perm[i]], 0.0);
    EXPECT_DOUBLE_EQ(q.mu[o.perm[i + 2]], q.mu[o.perm[i]]);
    EXPECT_DOUBLE_EQ(q.eta[o.perm[i + 2]], -q.eta[o.perm[i]]);
  }
}

TEST(Ordering, AsymmetricSetRejected) {
  auto q = level_symmetric(4);
  q.mu[0] *= 0.9;
  EXPECT_THROW(order_directions(q, OrderingScheme::XScheme), Error);
}

TEST(AxisMatrices, StreamingLimit) {
  const auto q = legendre_chebyshev_tri(6);
  NodalMaterial m;
  m.sigma_t = 1.7;
  auto p = single_region(1.0, 1.0, 1.7, 0.0, 0.0, q);
  const auto rb = build_region_basis(p, 0);
  for (auto scheme : {OrderingScheme::XScheme, OrderingScheme::YScheme}) {
    const auto o = order_directions(q, scheme);
    const auto am = axis_matrices_exact(q, o, m);
    for (int i = 0; i < o.half; ++i) {
      const double c = scheme == OrderingScheme::XScheme ? q.mu[o.perm[i]] : q.eta[o.perm[i]];
      for (int j = 0; j < o.half; ++j) {
        EXPECT_NEAR(am.A(i, j), i == j ? -1.7 / c : 0.0, 1e-14);
        EXPECT_NEAR(am.B(i, j), i == j ? -1.7 / c : 0.0, 1e-14);
      }
    }
    const auto& ab = scheme == OrderingScheme::XScheme ? rb.y_averaged : rb.x_averaged;
    std::vector<double> want;
    for (int i = 0; i < o.half; ++i)
      want.push_back((scheme == OrderingScheme::XScheme ? q.mu[o.perm[i]] : q.eta[o.perm[i]]) / 1.7);
    std::sort(want.rbegin(), want.rend());
    for (int j = 0; j < o.half; ++j) EXPECT_NEAR(ab.nu[j], want[j], 1e-13);
  }
}

TEST(AxisMatrices, ExactAndExpandedAgree) {
  struct Case {
    SphereQuadrature q;
    PhaseFunction phase;
    double tol;
  };
  const std::vector<Case> cases = {{level_symmetric(8), isotropic_phase(), 1e-13},
                                   {legendre_chebyshev_quad(8), hg_coefficients(0.5, 8), 1e-9},
                                   {legendre_chebyshev_tri(10), phase_from_coefficients({1.0, 0.9, 0.4, -0.2}), 1e-9}};
  for (const auto& c : cases) {
    NodalMaterial m;
    m.sigma_t = 1.0;
    m.sigma_s = 0.8;
    m.phase = c.phase;
    for (auto scheme : {OrderingScheme::XScheme, OrderingScheme::YScheme}) {
      const auto o = order_directions(c.q, scheme);
      const auto a = axis_matrices_exact(c.q, o, m);
      const auto b = axis_matrices_expanded(c.q, o, m);
      EXPECT_LE((a.A - b.A).cwiseAbs().maxCoeff(), c.tol);
      EXPECT_LE((a.B - b.B).cwiseAbs().maxCoeff(), c.tol);
    }
  }
}

TEST(AxisMatrices, SpectraOfBothPathsAgree) {
  auto p = single_region(1.0, 1.0, 1.0, 0.9, 1.0, legendre_chebyshev_quad(8));
  p.materials[0].phase = hg_coefficients(0.5, 8);
  const auto exact = build_region_basis(p, 0);
  p.phase_path = PhasePath::Expanded;
  const auto expanded = build_region_basis(p, 0);
  ASSERT_EQ(exact.y_averaged.dimension(), 32);
  for (int j = 0; j < 32; ++j) {
    EXPECT_NEAR(exact.y_averaged.nu[j], expanded.y_averaged.nu[j], 1e-9 * exact.y_averaged.nu[j]);
    EXPECT_NEAR(exact.x_averaged.nu[j], expanded.x_averaged.nu[j], 1e-9 * exact.x_averaged.nu[j]);
  }
  EXPECT_LE(exact.y_averaged.residual, 1e-9);
  EXPECT_LE(exact.x_averaged.residual, 1e-9);
}

TEST(AxisMatrices, HalfOrderForEveryScheme) {
  for (auto scheme : {SphereScheme::LevelSymmetric, SphereScheme::LegendreChebyshevQuad,
                      SphereScheme::LegendreChebyshevTri})
    for (int n : {2, 4, 8, 12}) {
      const auto q = make_sphere_quadrature(scheme, n);
      auto p = single_region(1.0, 2.0, 1.0, 0.5, 0.0, q);
      p.materials[0].phase = hg_coefficients(0.4, 6);
      const auto rb = build_region_basis(p, 0);
      EXPECT_EQ(rb.y_averaged.dimension(), static_cast<int>(q.size()) / 2);
      EXPECT_EQ(rb.x_averaged.dimension(), static_cast<int>(q.size()) / 2);
    }
}

TEST(NodalSolve, BenchmarkSystemSize) {
  const auto s = assemble_and_solve(benchmarks::fig7(0.9, level_symmetric(4)));
  EXPECT_EQ(s.system_size(), 192);
  EXPECT_EQ(s.system_size(), 4 * 12 * 2 * 2);
}

TEST(NodalSolve, ZeroDataGivesZero) {
  auto p = benchmarks::fig7(0.5, level_symmetric(6));
  for (auto& m : p.materials) m.source = 0.0;
  const auto s = assemble_and_solve(p);
  EXPECT_EQ(s.unknowns.lpNorm<Eigen::Infinity>(), 0.0);
  for (int r = 0; r < 4; ++r) EXPECT_EQ(region_scalar_flux(s, r), 0.0);
  EXPECT_EQ(average_intensity(s, 3, AverageAxis::YAveraged, 0.75, 5), 0.0);
}

TEST(NodalSolve, SingleRegionMatchesClosureClosedForm) {
  for (auto scheme : {SphereScheme::LevelSymmetric, SphereScheme::LegendreChebyshevQuad})
    for (double lx : {0.1, 1.0, 3.0}) {
      const auto q = make_sphere_quadrature(scheme, 6);
      const auto s = assemble_and_solve(single_region(lx, 0.7, 1.3, 0.0, 2.0, q));
      EXPECT_NEAR(region_scalar_flux(s, 0), closure_flux(q, lx, 0.7, 1.3, 2.0), 1e-12);
    }
}

TEST(NodalSolve, LargeRegionApproachesInfiniteMedium) {
  const auto q = level_symmetric(4);
  double prev = 0.0;
  for (double len : {1.0, 10.0, 100.0, 1000.0}) {
    const double f = region_scalar_flux(assemble_and_solve(single_region(len, len, 2.0, 0.0, 3.0, q)), 0);
    EXPECT_GT(f, prev);
    EXPECT_LT(f, 1.5);
    prev = f;
  }
  EXPECT_NEAR(prev, 1.5, 2e-3);
}

TEST(NodalSolve, UniformMediumIsReproducedExactly) {
  // incoming data equal to the infinite-medium value leaves the solution flat
  const auto q = legendre_chebyshev_tri(6);
  NodalProblem p = benchmarks::fig7(0.6, q, 2, 4);
  for (auto& m : p.materials) m.source = 0.8;
  const double value = 0.8 / (1.0 - 0.6);
  for (auto* e : {&p.left, &p.right, &p.bottom, &p.top}) e->value.assign(q.size(), value);
  const auto s = assemble_and_solve(p);
  for (int r = 0; r < p.regions(); ++r) {
    EXPECT_NEAR(region_scalar_flux(s, r), value, 1e-11);
    EXPECT_NEAR(average_intensity(s, r, AverageAxis::XAveraged, p.y_lines[r / 2], 7), value, 1e-11);
  }
}

TEST(NodalSolve, BenchmarkSymmetryAndResiduals) {
  for (double ss : {0.9, 0.3}) {
    const auto s = assemble_and_solve(benchmarks::fig7(ss, level_symmetric(4)));
    const double f0 = region_scalar_flux(s, 0), f1 = region_scalar_flux(s, 1), f2 = region_scalar_flux(s, 2),
                 f3 = region_scalar_flux(s, 3);
    EXPECT_NEAR(f1, f2, 1e-10);
    EXPECT_GT(f0, f1);
    EXPECT_GT(f1, f3);
    EXPECT_GT(f3, 0.0);
    EXPECT_LE(ode_residual(s), 1e-8);
    for (int r = 0; r < 4; ++r) EXPECT_LE(balance_residual(s, r), 1e-6);
  }
}

TEST(NodalSolve, PathsAndSolversAgree) {
  auto p = benchmarks::fig7(0.8, legendre_chebyshev_quad(4));
  for (auto& m : p.materials) m.phase = hg_coefficients(0.5, 4);
  const auto base = assemble_and_solve(p);
  auto pe = p;
  pe.phase_path = PhasePath::Expanded;
  auto pi = p;
  pi.solver = LinearSolver::BiCGSTAB;
  const auto se = assemble_and_solve(pe), si = assemble_and_solve(pi);
  for (int r = 0; r < 4; ++r) {
    EXPECT_NEAR(region_scalar_flux(se, r), region_scalar_flux(base, r), 1e-10);
    EXPECT_NEAR(region_scalar_flux(si, r), region_scalar_flux(base, r), 1e-9);
  }
}

TEST(NodalSolve, IncomingEdgeDataIsHonoured) {
  const auto q = level_symmetric(4);
  auto p = single_region(1.0, 1.0, 1.0, 0.5, 0.0, q);
  p.left.value.assign(q.size(), 2.0);
  const auto s = assemble_and_solve(p);
  for (int d = 0; d < static_cast<int>(q.size()); ++d)
    if (q.mu[d] > 0.0) EXPECT_NEAR(average_intensity(s, 0, AverageAxis::YAveraged, 0.0, d), 2.0, 1e-12);
    else EXPECT_GT(average_intensity(s, 0, AverageAxis::YAveraged, 0.0, d), 0.0);
}

TEST(NodalSolve, RefinementApproachesOracle) {
  const auto q = level_symmetric(4);
  for (const auto* ref : {kDd09, kDd03}) {
    const double ss = ref == kDd09 ? 0.9 : 0.3;
    const double want[4] = {ref[0], ref[1], ref[1], ref[2]};
    double prev0 = 1e300;
    std::array<double, 4> first{};
    for (int h : {2, 4, 8, 16}) {
      const auto f = benchmarks::nodal_quadrant_fluxes(assemble_and_solve(benchmarks::fig7(ss, q, h, h)));
      const double e0 = std::abs(f[0] - want[0]);
      EXPECT_LT(e0, prev0) << "source region, H=" << h;
      prev0 = e0;
      if (h == 2)
        for (int i = 0; i < 4; ++i) first[i] = std::abs(f[i] - want[i]);
      if (h == 16)
        for (int i = 0; i < 4; ++i) {
          EXPECT_LT(std::abs(f[i] - want[i]), first[i]) << "quadrant " << i;
          EXPECT_LT(std::abs(f[i] / want[i] - 1.0), 2e-3) << "quadrant " << i;
        }
    }
  }
}

TEST(NodalErrors, Validation) {
  const auto q = level_symmetric(4);
  auto p = single_region(1.0, 1.0, 1.0, 1.5, 0.0, q);
  EXPECT_THROW(assemble_and_solve(p), Error);
  p = single_region(1.0, 1.0, 1.0, 0.5, 0.0, q);
  p.x_lines = {0.0, 0.0};
  EXPECT_THROW(assemble_and_solve(p), Error);
  p = single_region(1.0, 1.0, 1.0, 0.5, 0.0, q);
  p.left.value = {1.0, 2.0};
  EXPECT_THROW(assemble_and_solve(p), Error);
  EXPECT_THROW(benchmarks::fig7(0.9, q, 3, 2), Error);
}

TEST(NodalErrors, SizeGuardAndDomain) {
  const auto q = level_symmetric(4);
  try {
    assemble_and_solve(benchmarks::fig7(0.5, q, 66, 66));
    ADD_FAILURE() << "expected a size refusal";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Unsupported);
  }
  const auto s = assemble_and_solve(benchmarks::fig7(0.5, q));
  try {
    average_intensity(s, 0, AverageAxis::YAveraged, 0.75, 0);
    ADD_FAILURE() << "expected a domain error";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Domain);
  }
}
