#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ptchain/parallel.hpp"
#include "ptchain/spectral.hpp"

namespace ptchain {

enum class Provenance { RealSpace, KSpace };

struct CorrelationMatrix {
  MatrixXcd c;  // C_ij = <G_L| c_i^dagger c_j |G_R>, first 2*cells sites
  int cells = 0;
  Provenance provenance = Provenance::RealSpace;
};

// C_ij = sum_n s_n conj(L_{i n}) R_{j n}
inline CorrelationMatrix correlation_matrix(const BiorthogonalSystem& sys, const OccupationSet& occ,
                                            int cells) {
  const int n = int(sys.energies.size());
  if (cells < 0 || 2 * cells > n) throw Error(ErrorCode::InvalidSpec, "subsystem larger than chain");
  const int m = 2 * cells;
  MatrixXcd Lc = sys.left.topRows(m).conjugate();
  for (int k = 0; k < n; ++k) Lc.col(k) *= occ.weights[k];
  CorrelationMatrix C;
  C.c = Lc * sys.right.topRows(m).transpose();
  C.cells = cells;
  C.provenance = Provenance::RealSpace;
  return C;
}

// Sites restricted to an arbitrary index set (used by the Fock-space oracle tests).
inline MatrixXcd full_correlation(const BiorthogonalSystem& sys, const OccupationSet& occ) {
  const int n = int(sys.energies.size());
  MatrixXcd Lc = sys.left.conjugate();
  for (int k = 0; k < n; ++k) Lc.col(k) *= occ.weights[k];
  return Lc * sys.right.transpose();
}

// Clean PBC: C_{(x,a),(y,b)} = (1/L) sum_k e^{ik(y-x)} P(k)_{ba}, P the lower-band projector.
inline CorrelationMatrix correlation_k_space(const ChainSpec& s, int cells, double tol_zero = 1e-8) {
  require_clean(s);
  validate(s);
  if (s.boundary != Boundary::PBC) throw Error(ErrorCode::InvalidSpec, "k-space path needs PBC");
  const int L = s.cells;
  if (cells < 0 || cells > L) throw Error(ErrorCode::InvalidSpec, "subsystem larger than chain");
  const double ue = s.u_eff();
  std::vector<cd> P00(L), P01(L), P10(L), P11(L), root(L);
  for (int n = 0; n < L; ++n) {
    const double k = 2 * kPi * n / L;
    root[n] = std::exp(kI * k);
    const cd z = vk(s, k);
    const cd E = std::sqrt(cd(gap_sq(s, k), 0.0));
    const double wgt = filling_weight(-E, tol_zero);
    if (wgt == 1.0) {
      // h = [[i u, conj z], [z, -i u]] in the real-space Fourier gauge
      P00[n] = 0.5 * (1.0 - kI * ue / E);
      P11[n] = 0.5 * (1.0 + kI * ue / E);
      P01[n] = -0.5 * std::conj(z) / E;
      P10[n] = -0.5 * z / E;
    } else {
      P00[n] = P11[n] = 0.5;
      P01[n] = P10[n] = 0.0;
    }
  }
  const int nd = 2 * cells - 1;
  std::vector<Mat2> G(std::max(nd, 0));
  for (int d = -(cells - 1); d <= cells - 1; ++d) {
    cd g00 = 0, g01 = 0, g10 = 0, g11 = 0;
    const long dd = ((long(d) % L) + L) % L;
    for (int n = 0; n < L; ++n) {
      const cd ph = root[(long(n) * dd) % L];
      g00 += ph * P00[n];
      g01 += ph * P10[n];
      g10 += ph * P01[n];
      g11 += ph * P11[n];
    }
    Mat2 g;
    g << g00, g01, g10, g11;
    G[d + cells - 1] = g / double(L);
  }
  CorrelationMatrix C;
  C.c.resize(2 * cells, 2 * cells);
  for (int x = 0; x < cells; ++x)
    for (int y = 0; y < cells; ++y) C.c.block<2, 2>(2 * x, 2 * y) = G[y - x + cells - 1];
  C.cells = cells;
  C.provenance = Provenance::KSpace;
  return C;
}

// Eigenvalues of C. When U_T C* U_T = C holds (clean PBC), Q^dagger C Q is real for the
// pair basis (e_p + e_pbar)/sqrt2, i(e_p - e_pbar)/sqrt2 with pbar = n-1-p.
inline VectorXcd correlation_eigenvalues(const MatrixXcd& C, bool try_real = true) {
  const int n = int(C.rows());
  if (n == 0) return VectorXcd();
  if (try_real && n % 2 == 0) {
    const int h = n / 2;
    const double r2 = 0.5;
    MatrixXcd M(n, n);
    // column t < h: (e_t + e_tb)/sqrt2, column h+t: i (e_t - e_tb)/sqrt2
    for (int a = 0; a < h; ++a) {
      const int ab = n - 1 - a;
      for (int b = 0; b < h; ++b) {
        const int bb = n - 1 - b;
        const cd pp = C(a, b), pm = C(a, bb), mp = C(ab, b), mm = C(ab, bb);
        M(a, b) = r2 * (pp + pm + mp + mm);
        M(a, h + b) = r2 * kI * (pp - pm + mp - mm);
        M(h + a, b) = -r2 * kI * (pp + pm - mp - mm);
        M(h + a, h + b) = r2 * (pp - pm - mp + mm);
      }
    }
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if (M.imag().cwiseAbs().maxCoeff() <= 1e-10 * scale) {
      Eigen::EigenSolver<MatrixXd> es(M.real(), false);
      if (es.info() == Eigen::Success) return es.eigenvalues();
    }
  }
  Eigen::ComplexEigenSolver<MatrixXcd> es(C, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "correlation eigensolver failed");
  return es.eigenvalues();
}

enum class ModeLabel { RealInRange, RealPair, EdgePair, Quartet, ResidualPHPair, Unpaired };

inline const char* mode_label_name(ModeLabel l) {
  switch (l) {
    case ModeLabel::RealInRange: return "RealInRange";
    case ModeLabel::RealPair: return "RealPair";
    case ModeLabel::EdgePair: return "EdgePair";
    case ModeLabel::Quartet: return "Quartet";
    case ModeLabel::ResidualPHPair: return "ResidualPHPair";
    case ModeLabel::Unpaired: return "Unpaired";
  }
  return "?";
}

// Tolerances are scaled by max(1, |nu|).
struct SpectrumTolerances {
  double tol_real = 1e-8;
  double tol_edge = 1e-6;
  double tol_pair = 1e-8;
};

struct ModeGroup {
  ModeLabel label;
  std::vector<int> members;  // indices into EntanglementSpectrum::nu
  double edge_I = 0.0;       // EdgePair
  // Quartet representative (Im > 0, Re < 1/2)
  double R = 0, I = 0, r = 0, rho = 0, phi = 0, varphi = 0;
};

struct EntanglementSpectrum {
  std::vector<cd> nu;  // sorted by (Re, Im)
  std::vector<ModeLabel> labels;
  std::vector<ModeGroup> groups;
  SpectrumTolerances tol;

  int count(ModeLabel l) const {
    int c = 0;
    for (const auto& g : groups) c += g.label == l;
    return c;
  }
  int edge_pairs() const { return count(ModeLabel::EdgePair); }
  int quartets() const { return count(ModeLabel::Quartet); }
  int residual_pairs() const { return count(ModeLabel::ResidualPHPair); }
  int unpaired() const { return count(ModeLabel::Unpaired); }
};

namespace detail {

inline double tscale(cd z) { return std::max(1.0, std::abs(z)); }

// Nearest unassigned candidate to `target` within tolerance; -1 if none or ambiguous.
// Candidates that coincide with each other are duplicates, not an ambiguity.
template <class Pred>
int match(const std::vector<cd>& nu, const std::vector<char>& used, cd target, double tol, int self,
          Pred ok, bool* ambiguous) {
  std::vector<int> cand;
  for (int j = 0; j < int(nu.size()); ++j) {
    if (j == self || used[j] || !ok(j)) continue;
    if (std::abs(nu[j] - target) <= tol * tscale(target)) cand.push_back(j);
  }
  if (cand.empty()) return -1;
  int best = cand[0];
  for (int j : cand)
    if (std::abs(nu[j] - target) < std::abs(nu[best] - target)) best = j;
  for (int j : cand)
    if (std::abs(nu[j] - nu[best]) > tol * tscale(target)) {
      if (ambiguous) *ambiguous = true;
      return -1;
    }
  return best;
}

}  // namespace detail

inline EntanglementSpectrum classify_spectrum(std::vector<cd> nus, const SpectrumTolerances& tol = {}) {
  std::stable_sort(nus.begin(), nus.end(), [](cd a, cd b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  EntanglementSpectrum es;
  es.nu = nus;
  es.tol = tol;
  const int n = int(nus.size());
  es.labels.assign(n, ModeLabel::Unpaired);
  std::vector<char> used(n, 0);
  auto is_real = [&](int j) { return std::abs(nus[j].imag()) < tol.tol_real * detail::tscale(nus[j]); };
  auto assign = [&](ModeGroup g) {
    for (int j : g.members) {
      used[j] = 1;
      es.labels[j] = g.label;
    }
    es.groups.push_back(std::move(g));
  };

  // strictly in range first, then pairs, then the tolerance band: a mode just below 0
  // must not be taken as in range when its partner just above 1 is not
  for (int i = 0; i < n; ++i)
    if (is_real(i) && nus[i].real() >= 0 && nus[i].real() <= 1) assign({ModeLabel::RealInRange, {i}});
  for (int i = 0; i < n; ++i) {
    if (used[i] || !is_real(i)) continue;
    bool amb = false;
    const int j = detail::match(nus, used, 1.0 - nus[i], tol.tol_pair, i, is_real, &amb);
    if (j >= 0) assign({ModeLabel::RealPair, {i, j}});
  }
  for (int i = 0; i < n; ++i) {
    if (used[i] || !is_real(i)) continue;
    const double x = nus[i].real();
    const double t = tol.tol_pair * detail::tscale(nus[i]);
    if (x >= -t && x <= 1 + t) assign({ModeLabel::RealInRange, {i}});
  }
  for (int i = 0; i < n; ++i) {
    if (used[i] || is_real(i)) continue;
    const cd z = nus[i];
    auto any = [](int) { return true; };
    bool amb = false;
    if (std::abs(z.real() - 0.5) < tol.tol_edge * detail::tscale(z)) {
      const int j = detail::match(nus, used, std::conj(z), tol.tol_pair, i, any, &amb);
      if (j >= 0) {
        ModeGroup g{ModeLabel::EdgePair, {i, j}};
        g.edge_I = 0.5 * (std::abs(z.imag()) + std::abs(nus[j].imag()));
        assign(g);
      } else if (!amb) {
        assign({ModeLabel::ResidualPHPair, {i}});
      }
      continue;
    }
    std::vector<char> trial = used;
    trial[i] = 1;
    const int jc = detail::match(nus, trial, std::conj(z), tol.tol_pair, i, any, &amb);
    if (jc >= 0) trial[jc] = 1;
    const int jp = detail::match(nus, trial, 1.0 - std::conj(z), tol.tol_pair, i, any, &amb);
    if (jp >= 0) trial[jp] = 1;
    const int jq = detail::match(nus, trial, 1.0 - z, tol.tol_pair, i, any, &amb);
    if (amb) continue;
    if (jc >= 0 && jp >= 0 && jq >= 0) {
      ModeGroup g{ModeLabel::Quartet, {i, jc, jp, jq}};
      cd rep = z;
      for (int j : g.members)
        if (nus[j].imag() > 0 && nus[j].real() <= 0.5) rep = nus[j];
      g.R = rep.real();
      g.I = rep.imag();
      g.r = std::abs(rep);
      g.rho = std::abs(1.0 - rep);
      g.phi = std::arg(rep);
      g.varphi = std::arg(1.0 - std::conj(rep));
      assign(g);
    } else if (jp >= 0 && jc < 0) {
      assign({ModeLabel::ResidualPHPair, {i, jp}});
    }
  }
  for (int i = 0; i < n; ++i)
    if (!used[i]) es.groups.push_back({ModeLabel::Unpaired, {i}});
  return es;
}

enum class Prescription { Principal, BranchCut, AbsoluteValue, Regularized };

inline const char* prescription_name(Prescription p) {
  switch (p) {
    case Prescription::Principal: return "Principal";
    case Prescription::BranchCut: return "BranchCut";
    case Prescription::AbsoluteValue: return "AbsoluteValue";
    case Prescription::Regularized: return "Regularized";
  }
  return "?";
}

struct LedgerEntry {
  ModeLabel label;
  cd contribution;
  int branch_shifts = 0;  // 2 pi reassignments relative to principal logs
  int modes = 1;
};

struct ComplexEntropy {
  cd value;
  std::vector<LedgerEntry> ledger;
  Prescription prescription = Prescription::BranchCut;
  int n_edge_pairs = 0;
  int n_quartets = 0;
  int n_residual = 0;
};

namespace detail {

inline cd xlogx(cd x) { return x == 0.0 ? cd(0.0) : x * std::log(x); }
inline double xlogabs(double x) { return x == 0.0 ? 0.0 : x * std::log(std::abs(x)); }
inline cd xlogabs(cd x) { return x == 0.0 ? cd(0.0) : x * std::log(std::abs(x)); }

inline cd principal_mode(cd z) { return -xlogx(z) - xlogx(1.0 - z); }
inline cd absolute_mode(cd z) { return -xlogabs(z) - xlogabs(1.0 - z); }

inline cd branch_cut_group(const EntanglementSpectrum& es, const ModeGroup& g, int* shifts) {
  switch (g.label) {
    case ModeLabel::RealInRange: {
      *shifts = 0;
      const double x = es.nu[g.members[0]].real();
      return -xlogabs(x) - xlogabs(1.0 - x);
    }
    case ModeLabel::RealPair: {
      *shifts = 1;
      const double x = es.nu[g.members[0]].real();
      return -2.0 * (xlogabs(x) + xlogabs(1.0 - x));
    }
    case ModeLabel::EdgePair: {
      *shifts = 1;
      const double I = g.edge_I;
      const double r = std::sqrt(0.25 + I * I), phi = std::atan(2 * I);
      return cd(-2.0 * std::log(r) + (4 * phi - 2 * kPi) * I, -kPi);
    }
    case ModeLabel::Quartet:
      *shifts = 2;
      return -4 * g.R * std::log(g.r) - 4 * (1 - g.R) * std::log(g.rho) +
             4 * g.I * (g.phi + g.varphi - kPi);
    default:
      throw Error(ErrorCode::UnpairedMode, "no branch-cut rule for this mode");
  }
}

inline ComplexEntropy branch_cut(const EntanglementSpectrum& es) {
  if (es.residual_pairs() > 0)
    throw Error(ErrorCode::ResidualNeedsRegularized,
                "residual PH pairs present; use the Regularized prescription");
  if (es.unpaired() > 0) throw Error(ErrorCode::UnpairedMode, "unpaired correlation eigenvalues");
  ComplexEntropy S;
  S.prescription = Prescription::BranchCut;
  for (const auto& g : es.groups) {
    int sh = 0;
    const cd c = branch_cut_group(es, g, &sh);
    S.ledger.push_back({g.label, c, sh, int(g.members.size())});
  }
  return S;
}

}  // namespace detail

inline ComplexEntropy entropy(const EntanglementSpectrum& es, Prescription p) {
  ComplexEntropy S;
  switch (p) {
    case Prescription::Principal:
    case Prescription::AbsoluteValue:
      S.prescription = p;
      for (size_t i = 0; i < es.nu.size(); ++i) {
        const cd c = p == Prescription::Principal ? detail::principal_mode(es.nu[i])
                                                  : detail::absolute_mode(es.nu[i]);
        S.ledger.push_back({es.labels[i], c, 0, 1});
      }
      break;
    case Prescription::BranchCut:
      S = detail::branch_cut(es);
      break;
    case Prescription::Regularized: {
      std::vector<cd> all = es.nu;
      for (cd z : es.nu) all.push_back(std::conj(z));
      const auto doubled = classify_spectrum(all, es.tol);
      S = detail::branch_cut(doubled);
      S.prescription = Prescription::Regularized;
      for (auto& e : S.ledger) e.contribution *= 0.5;
      S.value = 0.0;
      for (const auto& e : S.ledger) S.value += e.contribution;
      S.n_edge_pairs = doubled.edge_pairs();
      S.n_quartets = doubled.quartets();
      S.n_residual = es.residual_pairs();
      return S;
    }
  }
  S.value = 0.0;
  for (const auto& e : S.ledger) S.value += e.contribution;
  S.n_edge_pairs = es.edge_pairs();
  S.n_quartets = es.quartets();
  S.n_residual = es.residual_pairs();
  return S;
}

struct EntanglementEnergies {
  std::vector<cd> eps;
};

inline EntanglementEnergies entanglement_energies(const EntanglementSpectrum& es, double tol = 1e-14) {
  EntanglementEnergies out;
  for (cd z : es.nu) {
    if (std::abs(z) <= tol || std::abs(1.0 - z) <= tol)
      throw Error(ErrorCode::DegenerateEigenvalue, "correlation eigenvalue at 0 or 1");
    out.eps.push_back(std::log((1.0 - z) / z));
  }
  return out;
}

struct ProfileRow {
  int ell = 0;
  ComplexEntropy S;
  int n_edge_pairs = 0;
  int n_quartets = 0;
  int n_residual = 0;
};

struct ProfileOptions {
  SpectrumTolerances tol;
  double tol_zero = 1e-8;
  double tol_biorth = 1e-9;
  int jobs = 1;
};

inline EntanglementSpectrum subsystem_spectrum(const CorrelationMatrix& C, const SpectrumTolerances& tol) {
  const VectorXcd ev = correlation_eigenvalues(C.c, C.provenance == Provenance::KSpace);
  return classify_spectrum(std::vector<cd>(ev.data(), ev.data() + ev.size()), tol);
}

inline std::vector<ProfileRow> entropy_profile(const ChainSpec& s, const std::vector<int>& ells,
                                               Prescription p, const ProfileOptions& opt = {}) {
  validate(s);
  for (int l : ells)
    if (l < 1 || l > s.cells) throw Error(ErrorCode::InvalidSpec, "subsystem size out of range");
  std::vector<ProfileRow> rows(ells.size());
  const bool kspace = s.clean() && s.boundary == Boundary::PBC;
  BiorthogonalSystem sys;
  OccupationSet occ;
  if (!kspace) {
    sys = biorthogonal_diagonalize(build_real_space(s), opt.tol_biorth);
    occ = select_half_filling(sys, opt.tol_zero);
  }
  parallel_for(int(ells.size()), opt.jobs, [&](int i) {
    const int l = ells[i];
    const CorrelationMatrix C =
        kspace ? correlation_k_space(s, l, opt.tol_zero) : correlation_matrix(sys, occ, l);
    const auto es = subsystem_spectrum(C, opt.tol);
    ProfileRow r;
    r.ell = l;
    r.S = entropy(es, p);
    r.n_edge_pairs = r.S.n_edge_pairs;
    r.n_quartets = r.S.n_quartets;
    r.n_residual = r.S.n_residual;
    rows[i] = std::move(r);
  });
  return rows;
}

}  // namespace ptchain
