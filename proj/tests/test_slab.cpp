#include <gtest/gtest.h>

#include <cmath>

#include "ado/oracle.hpp"
#include "ado/slab.hpp"

using namespace ado;

namespace {

SlabProblem base_problem(int n, double albedo, double thickness = 1.0) {
  SlabProblem p;
  p.tau_b = thickness;
  p.albedo = albedo;
  p.quad = half_range_gauss(n);
  return p;
}

ErrorCategory category_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCategory::Internal;
}

}  // namespace

TEST(SlabBasis, OnePointHandEvaluated) {
  SlabProblem p;
  p.albedo = 0.75;
  p.quad.order = 1;
  p.quad.mu = {0.5};
  p.quad.w = {1.0};
  const auto b = build_basis(p);
  EXPECT_NEAR(b.A(0, 0), 2.0 * (1.0 - 0.75), 1e-15);
  EXPECT_NEAR(b.B(0, 0), 2.0, 1e-15);
  ASSERT_EQ(b.regular_count(), 1);
  EXPECT_NEAR(b.nu[0], 1.0, 1e-14);
}

TEST(SlabBasis, PureAbsorberDecouples) {
  const auto p = base_problem(6, 0.0);
  const auto b = build_basis(p);
  for (int j = 0; j < 6; ++j) {
    EXPECT_NEAR(b.nu[j], p.quad.mu[5 - j], 1e-14);
    // Phi_+ is along a single node, Phi_- vanishes
    int nonzero = 0;
    for (int k = 0; k < 6; ++k) {
      if (std::abs(b.phi_plus(k, j)) > 1e-13) ++nonzero;
      EXPECT_NEAR(b.phi_minus(k, j), 0.0, 1e-13);
    }
    EXPECT_EQ(nonzero, 1);
  }
}

TEST(SlabBasis, SpectralInvariants) {
  for (double w : {0.3, 0.9, 0.999}) {
    auto p = base_problem(16, w);
    p.phase = hg_coefficients(0.6, 10);
    const auto b = build_basis(p);
    ASSERT_EQ(b.dimension(), 16);
    ASSERT_EQ(b.regular_count(), 16);
    EXPECT_LE(b.max_residual, 1e-10);
    const Eigen::MatrixXd ba = b.B * b.A;
    for (int j = 0; j < 16; ++j) {
      EXPECT_GT(b.nu[j], 0.0);
      if (j) EXPECT_GE(b.nu[j - 1], b.nu[j]);
      EXPECT_NE(b.norm[j], 0.0);
      // Phi_+ + Phi_- = M^{-1} X recovers the eigenvector of BA
      Eigen::VectorXd x(16);
      for (int k = 0; k < 16; ++k) x(k) = p.quad.mu[k] * (b.phi_plus(k, j) + b.phi_minus(k, j));
      const Eigen::VectorXd r = ba * x - x / (b.nu[j] * b.nu[j]);
      EXPECT_LE(r.norm(), 1e-10 * x.norm() * std::max(1.0, ba.norm()));
      // N(nu_j) definition
      double nj = 0.0;
      for (int k = 0; k < 16; ++k)
        nj += p.quad.w[k] * p.quad.mu[k] *
              (b.phi_plus(k, j) * b.phi_plus(k, j) - b.phi_minus(k, j) * b.phi_minus(k, j));
      EXPECT_NEAR(nj, b.norm[j], 1e-12 * std::abs(b.norm[j]));
    }
  }
}

TEST(SlabBasis, DiscreteEigenvalueMatchesDispersionRoot) {
  // roots of 1 = w nu artanh(1/nu) from the bisection oracle
  EXPECT_NEAR(oracle::case_discrete_eigenvalue(0.5), 1.044382033760, 1e-11);
  EXPECT_NEAR(oracle::case_discrete_eigenvalue(0.9), 1.903204856044, 1e-11);
  for (double w : {0.5, 0.9, 0.99}) {
    const auto b = build_basis(base_problem(40, w));
    EXPECT_NEAR(b.nu[0] / oracle::case_discrete_eigenvalue(w), 1.0, 1e-6);
  }
}

TEST(SlabSolve, PureAbsorberAttenuation) {
  auto p = base_problem(8, 0.0, 2.0);
  p.f1 = constant_incidence(p.quad, 1.0);
  const auto s = solve(p);
  for (double tau : {0.0, 0.4, 1.3, 2.0}) {
    double rho = 0.0;
    for (int k = 0; k < 8; ++k) {
      const double mu = p.quad.mu[k];
      EXPECT_NEAR(intensity(s, tau, mu), std::exp(-tau / mu), 1e-13);
      EXPECT_NEAR(intensity(s, tau, -mu), 0.0, 1e-13);
      rho += p.quad.w[k] * std::exp(-tau / mu);
    }
    EXPECT_NEAR(density(s, tau), rho, 1e-13);
  }
}

TEST(SlabSolve, ZeroDataGivesZero) {
  auto p = base_problem(10, 0.8);
  p.phase = hg_coefficients(0.4, 6);
  p.rho1d = 0.3;
  const auto s = solve(p);
  for (int j = 0; j < s.basis.regular_count(); ++j) {
    EXPECT_EQ(s.a(j), 0.0);
    EXPECT_EQ(s.b(j), 0.0);
  }
  EXPECT_EQ(density(s, 0.5), 0.0);
}

TEST(SlabSolve, ConstantSourceInPureAbsorber) {
  auto p = base_problem(6, 0.0, 3.0);
  p.source = SlabSource::isotropic_constant(6, 2.5);
  const auto s = solve(p);
  for (double tau : {0.0, 0.7, 1.5, 3.0})
    for (int k = 0; k < 6; ++k) {
      const double mu = p.quad.mu[k];
      EXPECT_NEAR(intensity(s, tau, mu), 2.5 * (1.0 - std::exp(-tau / mu)), 1e-12);
      EXPECT_NEAR(intensity(s, tau, -mu), 2.5 * (1.0 - std::exp(-(3.0 - tau) / mu)), 1e-12);
    }
}

TEST(SlabSolve, ReflectingFacesGiveInfiniteMedium) {
  auto p = base_problem(8, 0.6, 1.7);
  p.phase = hg_coefficients(0.5, 4);
  p.rho1s = p.rho2s = 1.0;
  p.source = SlabSource::isotropic_constant(8, 1.0);
  const auto s = solve(p);
  for (double tau : {0.0, 0.85, 1.7}) EXPECT_NEAR(density(s, tau), 2.0 / (1.0 - 0.6), 1e-11);
}

TEST(SlabSolve, BoundaryResidual) {
  auto p = base_problem(12, 0.95, 4.0);
  p.phase = hg_coefficients(0.7, 12);
  p.f1 = cosine_power_incidence(p.quad, 1.0, 2.0);
  p.rho2d = 0.4;
  p.rho1s = 0.2;
  const auto s = solve(p);
  EXPECT_LE(s.bc_residual, 1e-9);
  Eigen::VectorXd ip, im;
  intensities(s, p.tau_a, ip, im);
  for (int k = 0; k < 12; ++k) EXPECT_NEAR(ip(k), p.f1[k] + 0.2 * im(k), 1e-10);
}

TEST(SlabSolve, SymmetricConfigurationReciprocity) {
  auto p = base_problem(10, 0.9, 2.0);
  p.phase = hg_coefficients(0.5, 8);
  p.f1 = cosine_power_incidence(p.quad, 1.0, 1.0);
  p.f2 = p.f1;
  p.rho1s = p.rho2s = 0.3;
  p.rho1d = p.rho2d = 0.2;
  const auto s = solve(p);
  for (double d : {0.0, 0.3, 1.0})
    for (int k = 0; k < 10; ++k) {
      const double mu = p.quad.mu[k];
      EXPECT_NEAR(intensity(s, d, -mu), intensity(s, 2.0 - d, mu), 1e-9);
    }
}

TEST(SlabSolve, TransmissionGrowsWithAlbedo) {
  double prev = -1.0;
  for (double w : {0.0, 0.3, 0.6, 0.9}) {
    auto p = base_problem(16, w);
    p.f1 = constant_incidence(p.quad, 1.0);
    const double rho = density(solve(p), p.tau_b);
    EXPECT_GE(rho, prev);
    prev = rho;
  }
}

TEST(SlabSolve, Linearity) {
  auto p = base_problem(8, 0.7, 1.5);
  p.phase = hg_coefficients(0.3, 5);
  auto pa = p, pb = p, pc = p;
  pa.f1 = constant_incidence(p.quad, 1.0);
  pb.source = SlabSource::isotropic_constant(8, 0.5);
  pc.f1 = pa.f1;
  pc.source = pb.source;
  const auto sa = solve(pa), sb = solve(pb), sc = solve(pc);
  for (double t : {0.0, 0.5, 1.5}) EXPECT_NEAR(density(sc, t), density(sa, t) + density(sb, t), 1e-12);
}

TEST(SlabConservative, NetCurrentConstant) {
  for (double g : {0.0, 0.6}) {
    auto p = base_problem(20, 1.0, 3.0);
    p.phase = hg_coefficients(g, 6);
    p.f1 = constant_incidence(p.quad, 1.0);
    p.rho2d = 0.25;
    const auto s = solve(p);
    ASSERT_TRUE(s.basis.degenerate);
    EXPECT_EQ(s.basis.regular_count(), 19);
    const double j0 = net_current(s, 0.0);
    for (int i = 1; i < 50; ++i) EXPECT_NEAR(net_current(s, 3.0 * i / 49.0), j0, 1e-10);
  }
}

TEST(SlabErrors, Categories) {
  auto p = base_problem(4, 1.0);
  p.source = SlabSource::isotropic_constant(4, 1.0);
  EXPECT_EQ(category_of([&] { solve(p); }), ErrorCategory::Unsupported);

  auto q = base_problem(4, 1.0);
  q.rho1s = q.rho2s = 1.0;
  EXPECT_EQ(category_of([&] { solve(q); }), ErrorCategory::Numerical);

  EXPECT_EQ(category_of([] { build_basis(base_problem(4, 1.2)); }), ErrorCategory::InvalidArgument);
  EXPECT_EQ(category_of([] { build_basis(base_problem(4, 0.5, -1.0)); }), ErrorCategory::InvalidArgument);

  auto r = base_problem(4, 0.5);
  r.f1 = constant_incidence(r.quad, 1.0);
  const auto s = solve(r);
  EXPECT_EQ(category_of([&] { density(s, 1.5); }), ErrorCategory::Domain);
  EXPECT_EQ(category_of([&] { intensity(s, 0.5, 0.123456); }), ErrorCategory::Unsupported);
}

TEST(SlabOracle, AnisotropicSourceAndReflection) {
  auto p = base_problem(8, 0.8, 1.5);
  p.phase = hg_coefficients(0.5, 6);
  p.f2 = cosine_power_incidence(p.quad, 0.7, 1.0);
  p.rho1d = 0.3;
  p.rho2s = 0.2;
  p.source.plus.assign(8, {1.0, -0.4, 0.1});
  p.source.minus.assign(8, {0.5, 0.2});
  const auto s = solve(p);
  oracle::OracleConfig cfg;
  cfg.resolution = 3000;
  cfg.tolerance = 1e-13;
  const auto ref = oracle::slab_reference(p, cfg);
  for (int i = 0; i <= cfg.resolution; i += 300) {
    EXPECT_NEAR(density(s, ref.tau[i]) / ref.density[i], 1.0, 1e-6);
    Eigen::VectorXd ip, im;
    intensities(s, ref.tau[i], ip, im);
    for (int k = 0; k < 8; ++k) {
      EXPECT_NEAR(ip(k), ref.plus[i][k], 1e-6 * std::max(1.0, std::abs(ip(k))));
      EXPECT_NEAR(im(k), ref.minus[i][k], 1e-6 * std::max(1.0, std::abs(im(k))));
    }
  }
}

TEST(SlabOracle, HighAlbedoDensity) {
  auto p = base_problem(16, 0.95, 2.0);
  p.f1 = constant_incidence(p.quad, 1.0);
  const auto s = solve(p);
  oracle::OracleConfig cfg;
  cfg.resolution = 4000;
  const auto ref = oracle::slab_reference(p, cfg);
  for (int i = 0; i <= cfg.resolution; i += 400) EXPECT_NEAR(density(s, ref.tau[i]) / ref.density[i], 1.0, 1e-4);
}
