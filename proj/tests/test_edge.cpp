#include <gtest/gtest.h>

#include "ptchain/edge.hpp"
#include "ptchain/topology.hpp"

using namespace ptchain;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ConfigError;
}

// dense eigenvalue nearest `e` among modes localized above 4 / n in IPR
cd dense_localized(const InterfaceSpec& s, cd e) {
  const auto sys = biorthogonal_diagonalize(build_interface(s));
  const int n = int(sys.energies.size());
  int best = -1;
  for (int k = 0; k < n; ++k) {
    if (inverse_participation(sys.right.col(k)) <= 4.0 / n) continue;
    if (best < 0 || std::abs(sys.energies[k] - e) < std::abs(sys.energies[best] - e)) best = k;
  }
  return sys.energies[best];
}

}  // namespace

TEST(EdgeRoots, Examples) {
  const auto a = continuum_edge_roots(1, 1, 2);
  ASSERT_EQ(a.roots.size(), 1u);
  EXPECT_NEAR(a.roots[0].real(), -0.5, 1e-15);
  EXPECT_EQ(a.normalizable_count, 1);

  const auto b = continuum_edge_roots(2, 2, 1);
  EXPECT_EQ(b.degree(), 2);
  EXPECT_EQ(b.normalizable_count, 1);

  const auto c = continuum_edge_roots(3, 1, 2);
  EXPECT_EQ(c.degree(), 3);
  EXPECT_EQ(c.normalizable_count, 3);
}

TEST(EdgeRoots, CountMatchesWinding) {
  for (int alpha = 1; alpha <= 5; ++alpha)
    for (auto vw : {std::pair{2.0, 1.0}, std::pair{1.0, 2.0}, std::pair{1.0, 1.6}}) {
      ChainSpec s;
      s.alpha = alpha;
      s.v = vw.first;
      s.w = vw.second;
      s.u = 0.2;
      s.cells = 8;
      EXPECT_EQ(continuum_edge_roots(alpha, s.v, s.w).normalizable_count, winding_number(s)) << alpha;
    }
}

TEST(EdgeRoots, DegenerateW) {
  EXPECT_EQ(code_of([] { continuum_edge_roots(1, 1, 0); }), ErrorCode::DegenerateW);
}

TEST(Continuum, Examples) {
  const double u = 0.7;
  EXPECT_LT(std::abs(interface_continuum(-u, u).E - kI * u / std::sqrt(3.0)), 1e-12);
  EXPECT_LT(std::abs(interface_continuum(-1e8 * u, u).E - kI * u), 1e-6 * u);
  EXPECT_EQ(code_of([&] { interface_continuum(3 * u, u); }), ErrorCode::ExtraneousRoot);
  EXPECT_EQ(code_of([&] { interface_continuum(0.0, u); }), ErrorCode::NoBoundState);
}

TEST(Continuum, DispersionClosure) {
  const double u = 0.5;
  for (double m1 : {-0.01, -0.3, -1.0, -7.0}) {
    const auto b = interface_continuum(m1, u);
    // Hermitian side: E^2 = m1^2 - kappa1^2, nH side at its QCP: E^2 = u^2 - kappa2^2 - u^2 ... with m2 = u
    EXPECT_LT(std::abs(b.E * b.E - (m1 * m1 - b.kappa1 * b.kappa1)), 1e-12);
    EXPECT_LT(std::abs(b.E * b.E - (u * u - b.kappa2 * b.kappa2 - u * u)), 1e-12);
    EXPECT_LT(b.kappa1.real(), 0);
    EXPECT_LT(b.kappa2.real(), 0);
    EXPECT_LT(std::abs(b.ratio_L - b.ratio_R), 1e-12);
  }
}

TEST(Continuum, AmplitudeMonotone) {
  double prev = 0;
  for (double m1 = -0.001; m1 > -1e4; m1 *= 1.5) {
    const double a = interface_continuum(m1, 1.0).a;
    EXPECT_GT(a, prev);
    EXPECT_LT(a, 1.0);
    prev = a;
  }
}

TEST(Lattice, MassInversionMatchesDense) {
  InterfaceSpec s{1.5, 0.5, 1, 0.5, 40, 40};
  const auto b = interface_lattice_solve(s);
  EXPECT_LT(std::abs(b.E.real()), 1e-10);
  EXPECT_GT(std::abs(b.E.imag()), 0.0);
  EXPECT_LT(std::abs(b.E.imag()), s.u);
  EXPECT_LT(std::abs(b.E - dense_localized(s, b.E)), 1e-8);
  EXPECT_LE(b.residual, 1e-10);
  EXPECT_TRUE(b.warning.empty());
}

TEST(Lattice, BetaRootsSatisfyQuadratics) {
  InterfaceSpec s{1.5, 0.5, 1, 0.5, 40, 40};
  const auto b = interface_lattice_solve(s);
  const cd cL = s.v1 * s.v1 + s.w * s.w - b.E * b.E;
  const cd cR = s.v2 * s.v2 + s.w * s.w - b.E * b.E - s.u * s.u;
  EXPECT_LT(std::abs(s.v1 * s.w * b.beta_L * b.beta_L - cL * b.beta_L + s.v1 * s.w), 1e-12);
  EXPECT_LT(std::abs(s.v2 * s.w * b.beta_R * b.beta_R - cR * b.beta_R + s.v2 * s.w), 1e-12);
  EXPECT_LT(std::abs(b.beta_L), 1.0);
  EXPECT_LT(std::abs(b.beta_R), 1.0);
}

TEST(Lattice, InfiniteMassLimit) {
  InterfaceSpec s{100, 0.5, 1, 0.5, 20, 20};
  const auto b = interface_lattice_solve(s);
  EXPECT_LT(std::abs(std::abs(b.E.imag()) - s.u), 1e-3);
}

TEST(Lattice, OffCriticalWarns) {
  InterfaceSpec s{1.5, 0.45, 1, 0.5, 40, 40};
  EXPECT_FALSE(interface_lattice_solve(s).warning.empty());
}

TEST(Density, NegativeSublatticeNearInterface) {
  InterfaceSpec s{1.5, 0.5, 1, 0.5, 20, 20};
  const auto d = interface_density(s);
  // the sublattice carrying the negative weight is A in this labelling, see README
  double minA = 0, minB = 0;
  for (int i = 30; i < 50; ++i) (i % 2 ? minB : minA) = std::min(i % 2 ? minB : minA, d.density.site[i].real());
  EXPECT_LT(minA, -1e-3);
  EXPECT_GE(minB, -1e-12);
  // cell sum single-peaked at the interface
  int peak = 0;
  for (int i = 0; i < d.density.cell.size(); ++i)
    if (d.density.cell[i].real() > d.density.cell[peak].real()) peak = i;
  EXPECT_NEAR(peak, 20, 2);
  EXPECT_LT(std::abs(d.density.cell.sum() - 1.0), 1e-10);
}

TEST(Density, LocalizationGrowsNearGapClosing) {
  const auto a = interface_lattice_solve({1.5, 0.5, 1, 0.5, 40, 40});
  const auto b = interface_lattice_solve({1.1, 0.5, 1, 0.5, 40, 40});
  EXPECT_GT(std::abs(b.beta_L), std::abs(a.beta_L));
  EXPECT_GT(std::abs(b.beta_R), std::abs(a.beta_R));
}
