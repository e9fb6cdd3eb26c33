#include <gtest/gtest.h>

#include <algorithm>

#include "ptchain/lattice.hpp"

using namespace ptchain;

namespace {

ChainSpec chain(int alpha, double v, double w, double u, int cells = 4, Boundary b = Boundary::PBC,
                double det = 0.0) {
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

void expect_mat(const Mat2& a, const Mat2& b, double tol = 1e-14) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_LT(std::abs(a(i, j) - b(i, j)), tol) << i << "," << j;
}

}  // namespace

TEST(Bloch, TrivialQcpAtZero) {
  Mat2 want;
  want << kI, 1.0, 1.0, -kI;
  expect_mat(bloch_hamiltonian(chain(1, 2, 1, 1), 0.0), want);
}

TEST(Bloch, HermitianAtPi) {
  Mat2 want;
  want << 0.0, 3.0, 3.0, 0.0;
  expect_mat(bloch_hamiltonian(chain(1, 1, 2, 0), kPi), want);
}

TEST(Bloch, AlphaTwoQuarterTurn) {
  Mat2 want;
  want << kI, cd(2, -1), cd(2, 1), -kI;
  expect_mat(bloch_hamiltonian(chain(2, 1, 2, 1), kPi / 2), want);
}

TEST(Bloch, SigmaXConjugationIdentity) {
  Mat2 sx;
  sx << 0.0, 1.0, 1.0, 0.0;
  for (int alpha : {1, 2, 3})
    for (double k = -3.0; k < 3.2; k += 0.37) {
      const Mat2 H = bloch_hamiltonian(chain(alpha, 1.3, 0.7, 0.4), k);
      expect_mat(sx * H.conjugate() * sx, H, 1e-15);
    }
}

TEST(Dispersion, Examples) {
  auto [a, b] = dispersion(chain(1, 2, 1, 1), 0.0);
  EXPECT_LT(std::abs(a), 1e-14);
  EXPECT_LT(std::abs(b), 1e-14);
  auto [c, d] = dispersion(chain(1, 1, 2, 1), kPi);
  EXPECT_NEAR(c.real(), std::sqrt(8.0), 1e-12);
  EXPECT_NEAR(d.real(), -std::sqrt(8.0), 1e-12);
  auto [e, f] = dispersion(chain(1, 1, 1.2, 1), 0.0);
  EXPECT_NEAR(std::abs(e.imag()), std::sqrt(0.96), 1e-12);
  EXPECT_LT(std::abs(e.real()), 1e-14);
  EXPECT_LT(std::abs(e + f), 1e-14);
}

TEST(PtClass, Examples) {
  EXPECT_EQ(classify_pt(chain(1, 2, 1, 0.5)).pt_class, PtClass::Symmetric);
  EXPECT_EQ(classify_pt(chain(1, 1, 2, 1)).pt_class, PtClass::Critical);
  EXPECT_EQ(classify_pt(chain(1, 1, 1.2, 1)).pt_class, PtClass::Broken);
}

TEST(PtClass, SymmetricUnderVWSwap) {
  for (int alpha : {1, 2, 3})
    for (double v : {0.3, 1.0, 1.7})
      for (double w : {0.5, 1.0, 2.2})
        for (double u : {0.0, 0.4, 1.2})
          EXPECT_EQ(classify_pt(chain(alpha, v, w, u)).pt_class, classify_pt(chain(alpha, w, v, u)).pt_class);
}

TEST(RealSpace, DecoupledDimers) {
  const MatrixXcd H = build_real_space(chain(1, 1, 0, 0, 2, Boundary::OBC));
  MatrixXcd want = MatrixXcd::Zero(4, 4);
  want(0, 1) = want(1, 0) = want(2, 3) = want(3, 2) = 1.0;
  EXPECT_LT((H - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RealSpace, FullyDimerizedHasOneBond) {
  const MatrixXcd H = build_real_space(chain(1, 0, 1, 0, 2, Boundary::OBC));
  int bonds = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (std::abs(H(i, j)) > 0) {
        ++bonds;
        EXPECT_DOUBLE_EQ(H(i, j).real(), -1.0);
      }
  EXPECT_EQ(bonds, 1);
  // two dangling sites
  int dangling = 0;
  for (int i = 0; i < 4; ++i) dangling += H.row(i).cwiseAbs().sum() == 0.0;
  EXPECT_EQ(dangling, 2);
}

// At the exceptional point k = 0 a dense solver splits the double zero by ~sqrt(eps),
// so the critical examples compare E^2, which is analytic there.
TEST(RealSpace, PbcMatchesDispersion) {
  for (const auto& s : {chain(1, 2, 1, 1, 3), chain(2, 1, 2, 1, 5), chain(3, 1.5, 1, 0.2, 6)}) {
    Eigen::ComplexEigenSolver<MatrixXcd> es(build_real_space(s), false);
    std::vector<cd> dense;
    for (int i = 0; i < es.eigenvalues().size(); ++i) dense.push_back(es.eigenvalues()[i] * es.eigenvalues()[i]);
    std::vector<cd> k;
    for (int n = 0; n < s.cells; ++n) {
      auto [a, b] = dispersion(s, 2 * kPi * n / s.cells);
      k.push_back(a * a), k.push_back(b * b);
    }
    std::vector<bool> used(dense.size(), false);
    for (cd z : k) {
      int best = -1;
      for (size_t i = 0; i < dense.size(); ++i)
        if (!used[i] && (best < 0 || std::abs(dense[i] - z) < std::abs(dense[best] - z))) best = int(i);
      used[best] = true;
      EXPECT_LT(std::abs(dense[best] - z), 1e-10);
    }
  }
}

TEST(RealSpace, PbcMatchesDispersionGapped) {
  const auto s = chain(2, 1, 2, 0.5, 7);
  Eigen::ComplexEigenSolver<MatrixXcd> es(build_real_space(s), false);
  const VectorXcd e = es.eigenvalues();
  for (int n = 0; n < s.cells; ++n) {
    auto [a, b] = dispersion(s, 2 * kPi * n / s.cells);
    for (cd z : {a, b}) {
      double best = 1e9;
      for (int i = 0; i < e.size(); ++i) best = std::min(best, std::abs(e[i] - z));
      EXPECT_LT(best, 1e-10);
    }
  }
}

TEST(RealSpace, PseudoHermiticity) {
  std::vector<ChainSpec> specs = {chain(1, 2, 1, 0.5, 6, Boundary::OBC), chain(2, 1, 2, 1, 7, Boundary::PBC),
                                  chain(3, 1, 1.2, 1, 8, Boundary::OBC)};
  ChainSpec dis = chain(1, 1, 2, 1, 12, Boundary::PBC);
  dis.disorder = make_disorder(12, 7, 0.9);
  specs.push_back(dis);
  for (const auto& s : specs) {
    const MatrixXcd H = build_real_space(s);
    const int n = int(H.rows());
    MatrixXcd sz = MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) sz(i, i) = (i % 2 == 0) ? 1.0 : -1.0;
    EXPECT_LT((sz * H.adjoint() * sz + H).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Interface, Matrices) {
  for (double v1 : {100.0, 1.5}) {
    const MatrixXcd H = build_interface({v1, 0.5, 1, 0.5, 20, 20});
    EXPECT_EQ(H.rows(), 80);
    EXPECT_TRUE(H.allFinite());
  }
  const MatrixXcd H = build_interface({0.7, 0.7, 1, 0.0, 5, 5});
  EXPECT_LT((H - H.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::ComplexEigenSolver<MatrixXcd> es(H, false);
  EXPECT_LT(es.eigenvalues().imag().cwiseAbs().maxCoeff(), 1e-12);
  // uniform interface is the plain Hermitian chain
  EXPECT_LT((H - build_real_space(chain(1, 0.7, 1, 0, 10, Boundary::OBC))).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Disorder, BoundAndDeterminism) {
  const auto a = make_disorder(50, 11, 0.999);
  const auto b = make_disorder(50, 11, 0.999);
  const auto c = make_disorder(50, 12, 0.999);
  EXPECT_EQ(a.delta, b.delta);
  EXPECT_NE(a.delta, c.delta);
  for (double d : a.delta) EXPECT_LE(std::abs(d), 0.999);
}

TEST(Validate, RejectsBadSpecs) {
  EXPECT_THROW(validate(chain(0, 1, 1, 0)), Error);
  EXPECT_THROW(validate(chain(1, 1, 1, 0, 0)), Error);
  auto s = chain(1, 1, 2, 1, 4);
  s.disorder = DisorderProfile{{0.0, 0.5, 1.5, 0.0}};
  EXPECT_THROW(validate(s), Error);
}
