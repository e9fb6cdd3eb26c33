#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "ptchain/lattice.hpp"

namespace ptchain {

struct BiorthogonalSystem {
  VectorXcd energies;
  MatrixXcd right;  // columns R_n
  MatrixXcd left;   // columns L_n, <L_m|R_n> = delta_mn
  double biorth_residual = 0.0;
  double max_condition = 0.0;  // max_n |L_n| |R_n|
};

// Sort key (Re, Im, index).
inline std::vector<int> spectral_order(const VectorXcd& e) {
  std::vector<int> idx(e.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (e[a].real() != e[b].real()) return e[a].real() < e[b].real();
    return e[a].imag() < e[b].imag();
  });
  return idx;
}

// Groups of (numerically) equal eigenvalues, by transitive closure.
inline std::vector<std::vector<int>> degenerate_clusters(const VectorXcd& e, double tol) {
  const int n = int(e.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double scale = std::max({1.0, std::abs(e[i]), std::abs(e[j])});
      if (std::abs(e[i] - e[j]) <= tol * scale) parent[find(i)] = find(j);
    }
  std::vector<std::vector<int>> groups(n);
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& g : groups)
    if (g.size() > 1) out.push_back(std::move(g));
  return out;
}

inline BiorthogonalSystem biorthogonal_diagonalize(const MatrixXcd& H, double tol_biorth = 1e-9,
                                                   double tol_degenerate = 1e-10) {
  if (H.rows() != H.cols()) throw Error(ErrorCode::InvalidSpec, "matrix must be square");
  if (!H.allFinite()) throw Error(ErrorCode::InvalidSpec, "non-finite matrix entries");
  const int n = int(H.rows());
  Eigen::ComplexEigenSolver<MatrixXcd> es(H, true);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::DefectiveMatrix, "eigensolver failed");

  const auto order = spectral_order(es.eigenvalues());
  BiorthogonalSystem sys;
  sys.energies.resize(n);
  sys.right.resize(n, n);
  for (int k = 0; k < n; ++k) {
    sys.energies[k] = es.eigenvalues()[order[k]];
    VectorXcd r = es.eigenvectors().col(order[k]);
    const double nr = r.norm();
    if (!(nr > 0) || !std::isfinite(nr))
      throw Error(ErrorCode::DefectiveMatrix, "vanishing right eigenvector");
    sys.right.col(k) = r / nr;
  }

  // re-orthonormalize right vectors inside degenerate blocks
  for (const auto& g : degenerate_clusters(sys.energies, tol_degenerate)) {
    MatrixXcd B(n, g.size());
    for (size_t t = 0; t < g.size(); ++t) B.col(t) = sys.right.col(g[t]);
    Eigen::ColPivHouseholderQR<MatrixXcd> qr(B);
    if (qr.rank() < int(g.size()))
      throw Error(ErrorCode::DefectiveMatrix, "eigenvectors of a degenerate block are dependent");
    MatrixXcd Q = qr.householderQ() * MatrixXcd::Identity(n, g.size());
    for (size_t t = 0; t < g.size(); ++t) sys.right.col(g[t]) = Q.col(t);
  }

  Eigen::PartialPivLU<MatrixXcd> lu(sys.right);
  const MatrixXcd Rinv = lu.inverse();
  if (!Rinv.allFinite()) throw Error(ErrorCode::DefectiveMatrix, "right eigenvectors are singular");
  sys.left = Rinv.adjoint();

  const MatrixXcd G = sys.left.adjoint() * sys.right - MatrixXcd::Identity(n, n);
  sys.biorth_residual = G.cwiseAbs().maxCoeff();
  sys.max_condition = 0.0;
  for (int k = 0; k < n; ++k) sys.max_condition = std::max(sys.max_condition, sys.left.col(k).norm());

  const double eps = std::numeric_limits<double>::epsilon();
  if (!std::isfinite(sys.max_condition) || sys.max_condition * eps > tol_biorth ||
      sys.biorth_residual > tol_biorth)
    throw Error(ErrorCode::DefectiveMatrix,
                "eigenvector condition " + std::to_string(sys.max_condition) +
                    " near an exceptional point; increase detuning");
  return sys;
}

struct OccupationSet {
  std::vector<double> weights;  // s_n per mode, in system order: 0, 1/2 or 1
  double total = 0.0;
  int half_weight_modes = 0;
};

// Weight of one mode at half filling; throws on a real zero mode.
inline double filling_weight(cd e, double tol_zero) {
  if (e.real() < -tol_zero) return 1.0;
  if (e.real() > tol_zero) return 0.0;
  if (std::abs(e.imag()) > tol_zero) return 0.5;
  throw Error(ErrorCode::AmbiguousFilling, "real zero mode at half filling");
}

inline OccupationSet select_half_filling(const VectorXcd& energies, double tol_zero = 1e-8) {
  OccupationSet occ;
  const int n = int(energies.size());
  occ.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    occ.weights[k] = filling_weight(energies[k], tol_zero);
    occ.total += occ.weights[k];
    if (occ.weights[k] == 0.5) ++occ.half_weight_modes;
  }
  if (2 * occ.total != n)
    throw Error(ErrorCode::AmbiguousFilling,
                "weighted count " + std::to_string(occ.total) + " differs from half filling");
  return occ;
}

inline OccupationSet select_half_filling(const BiorthogonalSystem& sys, double tol_zero = 1e-8) {
  return select_half_filling(sys.energies, tol_zero);
}

// Contribution of a +-E pair at half filling.
inline cd pair_energy(cd e, double tol_zero) {
  if (e.real() < 0) e = -e;
  if (e.real() > tol_zero) return -e;
  if (std::abs(e.imag()) > tol_zero) return 0.0;
  throw Error(ErrorCode::AmbiguousFilling, "real zero mode at half filling");
}

// Clean chains: E = +-sqrt(sigma^2 - u^2) from the singular values of the hopping block.
inline VectorXd chiral_gaps(const ChainSpec& s) {
  const MatrixXd V = hopping_block(s);
  Eigen::BDCSVD<MatrixXd> svd(V);
  VectorXd sig = svd.singularValues();
  VectorXd g(sig.size());
  for (int i = 0; i < sig.size(); ++i) g[i] = ((sig[i] - s.u) + s.detuning) * (sig[i] + s.u_eff());
  return g;
}

inline cd ground_state_energy_dense(const ChainSpec& s, double tol_zero = 1e-8) {
  const MatrixXcd H = build_real_space(s);
  Eigen::ComplexEigenSolver<MatrixXcd> es(H, false);
  const VectorXcd e = es.eigenvalues();
  const auto occ = select_half_filling(e, tol_zero);
  cd tot = 0.0;
  for (int k = 0; k < e.size(); ++k) tot += occ.weights[k] * e[k];
  return tot;
}

inline cd ground_state_energy(const ChainSpec& s, double tol_zero = 1e-8) {
  validate(s);
  if (!s.clean()) return ground_state_energy_dense(s, tol_zero);
  cd tot = 0.0;
  if (s.boundary == Boundary::PBC) {
    for (int n = 0; n < s.cells; ++n)
      tot += pair_energy(std::sqrt(cd(gap_sq(s, 2 * kPi * n / s.cells), 0.0)), tol_zero);
  } else {
    const VectorXd g = chiral_gaps(s);
    for (int i = 0; i < g.size(); ++i) tot += pair_energy(std::sqrt(cd(g[i], 0.0)), tol_zero);
  }
  return tot;
}

struct DensityProfile {
  VectorXcd site;  // n_{i,a}
  VectorXcd cell;  // n_{i,A} + n_{i,B}
};

// n_i = sum_n s_n conj(L_{i n}) R_{i n}
inline DensityProfile density_profile(const BiorthogonalSystem& sys, const OccupationSet& occ) {
  const int n = int(sys.energies.size());
  DensityProfile d;
  d.site = VectorXcd::Zero(n);
  for (int m = 0; m < n; ++m) {
    if (occ.weights[m] == 0.0) continue;
    d.site += occ.weights[m] * sys.left.col(m).conjugate().cwiseProduct(sys.right.col(m));
  }
  d.cell.resize(n / 2);
  for (int i = 0; i < n / 2; ++i) d.cell[i] = d.site[2 * i] + d.site[2 * i + 1];
  return d;
}

}  // namespace ptchain
