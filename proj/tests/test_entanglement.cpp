#include <gtest/gtest.h>

#include "fock_oracle.hpp"
#include "ptchain/entanglement.hpp"
#include "ptchain/topology.hpp"

using namespace ptchain;

namespace {

ChainSpec chain(int alpha, double v, double w, double u, int cells, Boundary b, double det = 0.0) {
  ChainSpec s;
  s.alpha = alpha;
  s.v = v;
  s.w = w;
  s.u = u;
  s.cells = cells;
  s.boundary = b;
  s.detuning = det;
  return s;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ConfigError;
}

std::vector<cd> eig(const MatrixXcd& C, bool try_real = false) {
  const VectorXcd e = correlation_eigenvalues(C, try_real);
  return {e.data(), e.data() + e.size()};
}

// every element of a has a distinct partner in b within tol
bool same_multiset(std::vector<cd> a, std::vector<cd> b, double tol) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (cd z : a) {
    int best = -1;
    for (size_t j = 0; j < b.size(); ++j)
      if (!used[j] && (best < 0 || std::abs(b[j] - z) < std::abs(b[best] - z))) best = int(j);
    if (std::abs(b[best] - z) > tol) return false;
    used[best] = true;
  }
  return true;
}

}  // namespace

// ---- brute-force Fock-space oracle, L = 3 cells ----

class FockOracle : public ::testing::TestWithParam<std::tuple<double, Boundary>> {};

TEST_P(FockOracle, CorrelationAndEntropyMatch) {
  const auto [u, bc] = GetParam();
  const auto s = chain(1, 2, 1, u, 3, bc);
  const MatrixXcd H = build_real_space(s);
  const auto sys = biorthogonal_diagonalize(H);
  const auto occ = select_half_filling(sys);
  const MatrixXcd C = full_correlation(sys, occ);

  int compared = 0;
  for (unsigned mask = 1; mask < 63; ++mask) {
    std::vector<int> sub;
    for (int i = 0; i < 6; ++i)
      if (mask >> i & 1u) sub.push_back(i);
    const auto ref = fock::reference(H, 3, sub);
    if (mask == 1) EXPECT_LT((ref.C - C).cwiseAbs().maxCoeff(), 1e-10);

    MatrixXcd CA(sub.size(), sub.size());
    for (size_t a = 0; a < sub.size(); ++a)
      for (size_t b = 0; b < sub.size(); ++b) CA(a, b) = C(sub[a], sub[b]);
    const auto nus = eig(CA);
    bool real = true;
    for (cd z : nus) real = real && std::abs(z.imag()) < 1e-10;
    if (!real) continue;
    const auto es = classify_spectrum(nus);
    const cd S = entropy(es, Prescription::Principal).value;
    const cd Sref = fock::von_neumann(ref.rho_ev);
    EXPECT_LT(std::abs(S - Sref), 1e-10) << "mask " << mask;
    ++compared;
  }
  // with gain/loss only a few bipartitions of the 6-site chain have a real spectrum
  EXPECT_GT(compared, u == 0 ? 60 : 0);
}

INSTANTIATE_TEST_SUITE_P(SmallChains, FockOracle,
                         ::testing::Values(std::tuple{0.0, Boundary::OBC}, std::tuple{0.0, Boundary::PBC},
                                           std::tuple{0.5, Boundary::OBC}, std::tuple{0.5, Boundary::PBC}));

TEST(Correlation, HermitianDimer) {
  MatrixXcd H(2, 2);
  H << 0.0, 1.0, 1.0, 0.0;
  const auto sys = biorthogonal_diagonalize(H);
  const MatrixXcd C = full_correlation(sys, select_half_filling(sys));
  MatrixXcd want(2, 2);
  want << 0.5, -0.5, -0.5, 0.5;
  EXPECT_LT((C - want).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Correlation, WholeSystemGivesWeights) {
  const auto s = chain(1, 2, 1, 0.5, 8, Boundary::PBC);
  const auto sys = biorthogonal_diagonalize(build_real_space(s));
  const auto occ = select_half_filling(sys);
  const auto nus = eig(correlation_matrix(sys, occ, 8).c);
  std::vector<cd> w(occ.weights.begin(), occ.weights.end());
  EXPECT_TRUE(same_multiset(nus, w, 1e-10));
}

TEST(Correlation, KSpaceMatchesRealSpace) {
  // the dual path is checked away from the exceptional point, where the dense
  // eigenvectors are well conditioned
  const auto s = chain(1, 2, 1, 1, 64, Boundary::PBC, 1e-4);
  const auto ck = correlation_k_space(s, 8);
  const auto sys = biorthogonal_diagonalize(build_real_space(s));
  const auto cr = correlation_matrix(sys, select_half_filling(sys), 8);
  EXPECT_LT((ck.c - cr.c).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Correlation, DenseDriftsNearExceptionalPoint) {
  // the dense eigenvectors of the k = 0 mode lose accuracy like 1/detuning, the
  // k-space correlation does not
  auto rel_err = [](double det) {
    const auto s = chain(1, 2, 1, 1, 64, Boundary::PBC, det);
    const auto ck = correlation_k_space(s, 8);
    const auto sys = biorthogonal_diagonalize(build_real_space(s));
    const auto cr = correlation_matrix(sys, select_half_filling(sys), 8);
    EXPECT_TRUE(ck.c.allFinite());
    return (ck.c - cr.c).cwiseAbs().maxCoeff() / ck.c.cwiseAbs().maxCoeff();
  };
  const double far = rel_err(1e-8), near = rel_err(1e-12);
  EXPECT_LT(far, 1e-7);
  EXPECT_GT(near, 100 * far);
}

TEST(Correlation, HermitianKSpaceIsHermitian) {
  const auto C = correlation_k_space(chain(1, 2, 1, 0, 50, Boundary::PBC), 12).c;
  EXPECT_LT((C - C.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Correlation, WholeChainProjector) {
  const int L = 20;
  const auto nus = eig(correlation_k_space(chain(2, 1, 2, 0.5, L, Boundary::PBC), L).c, true);
  int zeros = 0, ones = 0;
  for (cd z : nus) {
    zeros += std::abs(z) < 1e-10;
    ones += std::abs(z - 1.0) < 1e-10;
  }
  EXPECT_EQ(zeros, L);
  EXPECT_EQ(ones, L);
}

// ---- classification ----

TEST(Classify, RealInRange) {
  const auto es = classify_spectrum({0.3, 0.7});
  EXPECT_EQ(es.count(ModeLabel::RealInRange), 2);
}

TEST(Classify, PairStraddlingTheToleranceBand) {
  // seen in a disordered chain: -1.0e-8 is inside the band, its partner 1 + 1.00004e-8 is not
  const auto es = classify_spectrum({cd(-9.9995667685e-9, 0), cd(1.00000001000039, 0), cd(0.3, 0)});
  EXPECT_EQ(es.unpaired(), 0);
  EXPECT_EQ(es.count(ModeLabel::RealPair), 1);
  EXPECT_EQ(es.count(ModeLabel::RealInRange), 1);
}

TEST(Classify, EdgePair) {
  const auto es = classify_spectrum({cd(0.5, 5), cd(0.5, -5)});
  ASSERT_EQ(es.edge_pairs(), 1);
  EXPECT_NEAR(es.groups[0].edge_I, 5.0, 1e-15);
}

TEST(Classify, Quartet) {
  const auto es = classify_spectrum({cd(0.6, 0.3), cd(0.6, -0.3), cd(0.4, 0.3), cd(0.4, -0.3)});
  EXPECT_EQ(es.quartets(), 1);
  EXPECT_EQ(es.groups.size(), 1u);
}

TEST(Classify, RealPairAndResidual) {
  const auto es = classify_spectrum({-0.2, 1.2, cd(0.3, 0.1), cd(0.7, 0.1)});
  EXPECT_EQ(es.count(ModeLabel::RealPair), 1);
  EXPECT_EQ(es.residual_pairs(), 1);
}

// ---- entropy ----

TEST(Entropy, HalfHalfAllPrescriptions) {
  const auto es = classify_spectrum({0.5, 0.5});
  for (auto p : {Prescription::Principal, Prescription::BranchCut, Prescription::AbsoluteValue,
                 Prescription::Regularized})
    EXPECT_LT(std::abs(entropy(es, p).value - 2 * std::log(2.0)), 1e-14);
}

TEST(Entropy, EdgePairBranchCut) {
  const auto es = classify_spectrum({cd(0.5, 1), cd(0.5, -1)});
  const cd S = entropy(es, Prescription::BranchCut).value;
  EXPECT_NEAR(S.real(), -2 * std::log(std::sqrt(1.25)) + 4 * std::atan(2.0) - 2 * kPi, 1e-12);
  EXPECT_NEAR(S.imag(), -kPi, 1e-14);
}

TEST(Entropy, EdgePairAbsoluteValue) {
  const auto es = classify_spectrum({cd(0.5, 1), cd(0.5, -1)});
  const cd S = entropy(es, Prescription::AbsoluteValue).value;
  EXPECT_NEAR(S.real(), -2 * std::log(std::sqrt(1.25)), 1e-14);
  EXPECT_LT(std::abs(S.imag()), 1e-14);
}

TEST(Entropy, AbsoluteMinusBranchPerEdge) {
  for (double I : {0.05, 0.7, 3.0}) {
    const auto es = classify_spectrum({cd(0.5, I), cd(0.5, -I)});
    const double d = entropy(es, Prescription::BranchCut).value.real() -
                     entropy(es, Prescription::AbsoluteValue).value.real();
    EXPECT_NEAR(d, (4 * std::atan(2 * I) - 2 * kPi) * I, 1e-12);
  }
}

TEST(Entropy, LedgerConservation) {
  const auto es = classify_spectrum({0.2, 0.8, -0.1, 1.1, cd(0.5, 2), cd(0.5, -2), cd(0.6, 0.3), cd(0.6, -0.3),
                                     cd(0.4, 0.3), cd(0.4, -0.3)});
  for (auto p : {Prescription::Principal, Prescription::BranchCut, Prescription::AbsoluteValue,
                 Prescription::Regularized}) {
    const auto S = entropy(es, p);
    cd sum = 0;
    for (const auto& e : S.ledger) sum += e.contribution;
    EXPECT_EQ(sum, S.value);
  }
}

TEST(Entropy, QuartetIsReal) {
  for (double R : {0.1, 0.3, 0.45})
    for (double I : {0.01, 0.4, 2.0}) {
      const auto es = classify_spectrum({cd(R, I), cd(R, -I), cd(1 - R, I), cd(1 - R, -I)});
      ASSERT_EQ(es.quartets(), 1);
      EXPECT_LT(std::abs(entropy(es, Prescription::BranchCut).ledger[0].contribution.imag()), 1e-12);
    }
}

TEST(Entropy, ResidualBeforeUnpaired) {
  const auto es = classify_spectrum({cd(0.3, 0.1), cd(0.7, 0.1), cd(0.2, 0.9)});
  EXPECT_EQ(code_of([&] { entropy(es, Prescription::BranchCut); }), ErrorCode::ResidualNeedsRegularized);
  const auto es2 = classify_spectrum({cd(0.2, 0.9)});
  EXPECT_EQ(code_of([&] { entropy(es2, Prescription::BranchCut); }), ErrorCode::UnpairedMode);
}

TEST(Entropy, HermitianLimitPrescriptionsAgree) {
  const auto s = chain(1, 2, 1, 0, 60, Boundary::PBC);
  for (int l : {3, 10, 25}) {
    const auto es = subsystem_spectrum(correlation_k_space(s, l), {});
    const cd ref = entropy(es, Prescription::Principal).value;
    EXPECT_LT(std::abs(ref.imag()), 1e-10);
    for (auto p : {Prescription::BranchCut, Prescription::AbsoluteValue, Prescription::Regularized})
      EXPECT_LT(std::abs(entropy(es, p).value - ref), 1e-10);
  }
}

TEST(Entropy, BranchCutQuantization) {
  const auto s = chain(1, 1, 2, 0.6, 80, Boundary::PBC);
  for (int l : {5, 20, 40}) {
    const auto es = subsystem_spectrum(correlation_k_space(s, l), {});
    ASSERT_EQ(es.residual_pairs() + es.unpaired(), 0);
    EXPECT_NEAR(entropy(es, Prescription::BranchCut).value.imag(), -kPi * es.edge_pairs(), 1e-12);
  }
}

TEST(Spectrum, PbcClosure) {
  const auto s = chain(2, 1, 2, 0.7, 60, Boundary::PBC);
  const auto nus = eig(correlation_k_space(s, 15).c, true);
  std::vector<cd> c, p;
  for (cd z : nus) c.push_back(std::conj(z)), p.push_back(1.0 - std::conj(z));
  EXPECT_TRUE(same_multiset(nus, c, 1e-8));
  EXPECT_TRUE(same_multiset(nus, p, 1e-8));
}

TEST(Spectrum, LiHaldaneCountingAtQcps) {
  struct Case {
    int alpha;
    double v, w;
  };
  for (auto c : {Case{1, 2, 1}, Case{1, 1, 2}, Case{2, 2, 1}, Case{2, 1, 2}}) {
    const auto s = chain(c.alpha, c.v, c.w, 1, 200, Boundary::PBC, 1e-12);
    const auto es = subsystem_spectrum(correlation_k_space(s, 50), {});
    EXPECT_EQ(es.edge_pairs(), winding_number(s)) << c.alpha << " " << c.v;
    for (const auto& g : es.groups) {
      if (g.label != ModeLabel::EdgePair) continue;
      for (int m : g.members) {
        const cd nu = es.nu[m];
        const cd eps = std::log((1.0 - nu) / nu);
        EXPECT_LT(std::abs(eps.real()), 1e-6);
        EXPECT_NEAR(std::abs(eps.imag()), 2 * std::atan(2 * g.edge_I), 1e-9);
      }
    }
  }
}

TEST(EntanglementEnergies, Examples) {
  EXPECT_LT(std::abs(entanglement_energies(classify_spectrum({0.5})).eps[0]), 1e-15);
  const auto e = entanglement_energies(classify_spectrum({cd(0.5, 0.5), cd(0.5, -0.5)}));
  // sorted (Re, Im): the -I member comes first
  EXPECT_LT(std::abs(e.eps[1] - cd(0, -kPi / 2)), 1e-14);
  EXPECT_LT(std::abs(e.eps[0] - cd(0, kPi / 2)), 1e-14);
  EXPECT_LT(std::abs(entanglement_energies(classify_spectrum({0.3})).eps[0].imag()), 1e-15);
  EXPECT_EQ(code_of([] { entanglement_energies(classify_spectrum({0.0})); }), ErrorCode::DegenerateEigenvalue);
}

// ---- profiles ----

TEST(Profile, ImaginaryPlateaus) {
  const std::vector<int> ells = {1, 2, 5, 10, 40, 100};
  const auto r1 = entropy_profile(chain(1, 1, 2, 1, 400, Boundary::PBC, 1e-12), ells, Prescription::BranchCut);
  for (const auto& r : r1)
    if (r.ell >= 2) EXPECT_NEAR(r.S.value.imag(), -kPi, 1e-6) << r.ell;
  const auto r2 = entropy_profile(chain(2, 1, 2, 1, 400, Boundary::PBC, 1e-12), ells, Prescription::BranchCut);
  for (const auto& r : r2)
    if (r.ell >= 5) EXPECT_NEAR(r.S.value.imag(), -2 * kPi, 1e-6) << r.ell;
}

TEST(Profile, ObcNeedsRegularized) {
  const auto s = chain(1, 1, 2, 1, 60, Boundary::OBC);
  EXPECT_EQ(code_of([&] { entropy_profile(s, {10}, Prescription::BranchCut); }),
            ErrorCode::ResidualNeedsRegularized);
  const auto r = entropy_profile(s, {10}, Prescription::Regularized);
  EXPECT_TRUE(std::isfinite(r[0].S.value.real()));
}

TEST(Profile, JobsDoNotChangeResults) {
  const auto s = chain(1, 1, 2, 1, 300, Boundary::PBC, 1e-12);
  ProfileOptions one, four;
  four.jobs = 4;
  const std::vector<int> ells = {3, 7, 20, 33, 80, 150};
  const auto a = entropy_profile(s, ells, Prescription::BranchCut, one);
  const auto b = entropy_profile(s, ells, Prescription::BranchCut, four);
  for (size_t i = 0; i < ells.size(); ++i) EXPECT_EQ(a[i].S.value, b[i].S.value);
}
