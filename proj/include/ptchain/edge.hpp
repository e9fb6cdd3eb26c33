#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ptchain/spectral.hpp"

namespace ptchain {

struct EdgeRootSet {
  std::vector<cd> roots;          // distinct roots
  std::vector<int> multiplicity;  // same length as roots
  int normalizable_count = 0;     // multiplicity-weighted count of Re beta < 0

  int degree() const {
    int d = 0;
    for (int m : multiplicity) d += m;
    return d;
  }
};

// (beta + 1)^(alpha-1) [(v - w) - w beta] = 0
inline EdgeRootSet continuum_edge_roots(int alpha, double v, double w) {
  if (w == 0.0) throw Error(ErrorCode::DegenerateW, "w = 0");
  if (alpha < 1) throw Error(ErrorCode::InvalidSpec, "alpha must be >= 1");
  EdgeRootSet r;
  const cd b((v - w) / w, 0.0);
  if (alpha > 1) {
    r.roots.push_back(-1.0);
    r.multiplicity.push_back(alpha - 1);
  }
  if (alpha > 1 && b == cd(-1.0))
    r.multiplicity[0] += 1;
  else
    r.roots.push_back(b), r.multiplicity.push_back(1);
  for (size_t i = 0; i < r.roots.size(); ++i)
    if (r.roots[i].real() < 0) r.normalizable_count += r.multiplicity[i];
  return r;
}

struct BoundState {
  cd E;
  double a = 0.0;  // E = i a u (continuum)
  cd kappa1, kappa2;
  cd beta_L, beta_R;
  cd ratio_L, ratio_R;  // psi_A / psi_B on each side
  VectorXcd profile;    // per-site right amplitudes (lattice)
  double residual = 0.0;
  int iterations = 0;
  std::string warning;
};

inline BoundState interface_continuum(double m1, double u) {
  if (!(u > 0)) throw Error(ErrorCode::InvalidSpec, "u must be positive");
  if (m1 > 0) throw Error(ErrorCode::ExtraneousRoot, "m1 > 0: no mass inversion at the interface");
  if (m1 == 0) throw Error(ErrorCode::NoBoundState, "m1 = 0: mode merges into the bulk");
  BoundState s;
  s.a = std::sqrt(-m1 / (2 * u - m1));
  s.E = kI * s.a * u;
  s.kappa2 = -s.a * u;
  s.kappa1 = -std::sqrt(m1 * m1 + s.a * s.a * u * u);
  const double m2 = u;
  s.ratio_R = (s.E + kI * u) / (s.kappa2 + m2);
  s.ratio_L = s.E / (-s.kappa1 + m1);
  return s;
}

namespace detail {

// Root of v w b^2 - c b + v w = 0 inside the unit disk.
inline cd disk_root(double v, double w, cd c) {
  const cd A = v * w;
  const cd disc = std::sqrt(c * c - 4.0 * A * A);
  const cd b1 = (c + disc) / (2.0 * A), b2 = (c - disc) / (2.0 * A);
  const bool in1 = std::abs(b1) < 1.0, in2 = std::abs(b2) < 1.0;
  if (in1 == in2) throw Error(ErrorCode::NoRootInDisk, "no unique decaying root");
  // polish with the product relation b1 b2 = 1
  return in1 ? 1.0 / b2 : 1.0 / b1;
}

struct InterfaceEval {
  cd F, beta_L, beta_R, r_L, r_R;  // r = psi_B / psi_A
};

inline InterfaceEval interface_residual(const InterfaceSpec& s, cd E) {
  InterfaceEval ev;
  const double v1 = s.v1, v2 = s.v2, w = s.w, u = s.u;
  ev.beta_L = disk_root(v1, w, v1 * v1 + w * w - E * E);
  ev.beta_R = disk_root(v2, w, v2 * v2 + w * w - E * E - u * u);
  ev.r_L = (v1 - w * ev.beta_L) / E;
  ev.r_R = (E - kI * u) / (v2 - w * ev.beta_R);
  // matching condition times (v2 - w beta_R): the bare form has a pole at E = -iu that sits
  // right next to the root when v1 >> w. Clearing it adds a spurious zero at E = +iu.
  const cd D = v2 - w * ev.beta_R;
  ev.F = (v1 * ev.r_L - E) * (v2 * D - (E + kI * u) * (E - kI * u)) - w * w * (E - kI * u);
  return ev;
}

}  // namespace detail

// Damped complex secant on the interface matching condition, seeded by the continuum mode
// with m1 = w - v1.
inline BoundState interface_lattice_solve(const InterfaceSpec& s, double tol = 1e-10, int max_iter = 200) {
  BoundState out;
  if (std::abs(s.u - (s.w - s.v2)) > 1e-9)
    out.warning = "right side is not at its topological critical point";
  const BoundState seed = interface_continuum(s.w - s.v1, s.u);
  std::string last;
  for (const cd E0 : {seed.E, std::conj(seed.E)}) {
    try {
      cd x0 = E0, x1 = E0 * (1.0 + 1e-3) + cd(1e-4, 0.0);
      auto f0 = detail::interface_residual(s, x0).F;
      auto f1 = detail::interface_residual(s, x1).F;
      for (int it = 0; it < max_iter; ++it) {
        if (std::abs(x1 - kI * s.u) < 1e-6 * s.u) break;  // the spurious zero
        if (std::abs(f1) <= tol) {
          const auto ev = detail::interface_residual(s, x1);
          out.E = x1;
          out.a = x1.imag() / s.u;
          out.beta_L = ev.beta_L;
          out.beta_R = ev.beta_R;
          out.ratio_L = 1.0 / ev.r_L;
          out.ratio_R = 1.0 / ev.r_R;
          out.residual = std::abs(f1);
          out.iterations = it;
          // profile: left cells decay with beta_L towards the left, right cells with beta_R
          const int L1 = s.cells_left, L2 = s.cells_right;
          out.profile = VectorXcd::Zero(2 * (L1 + L2));
          const cd a = 1.0;
          const cd Ap = s.w * a / (s.v2 - (x1 + kI * s.u) * ev.r_R);
          for (int n = 0; n < L1; ++n) {
            const cd A = a * std::pow(ev.beta_L, L1 - 1 - n);
            out.profile[2 * n] = A;
            out.profile[2 * n + 1] = ev.r_L * A;
          }
          for (int n = 0; n < L2; ++n) {
            const cd A = Ap * std::pow(ev.beta_R, n);
            out.profile[2 * (L1 + n)] = A;
            out.profile[2 * (L1 + n) + 1] = ev.r_R * A;
          }
          out.profile /= out.profile.norm();
          return out;
        }
        const cd df = f1 - f0;
        if (df == 0.0) break;
        cd step = f1 * (x1 - x0) / df;
        cd x2 = x1 - step;
        cd f2;
        double lam = 1.0;
        for (int k = 0; k < 30; ++k) {
          try {
            f2 = detail::interface_residual(s, x2).F;
            if (std::abs(f2) < std::abs(f1) || k == 29) break;
          } catch (const Error&) {
          }
          lam *= 0.5;
          x2 = x1 - lam * step;
        }
        x0 = x1, f0 = f1;
        x1 = x2, f1 = f2;
      }
      last = "secant iteration did not converge";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoRootInDisk) throw;
      last = e.what();
    }
  }
  if (last.find("NoRootInDisk") != std::string::npos) throw Error(ErrorCode::NoRootInDisk, last);
  throw Error(ErrorCode::NoConvergence, last);
}

inline double inverse_participation(const VectorXcd& r) {
  const double n2 = r.squaredNorm();
  double s = 0.0;
  for (int i = 0; i < r.size(); ++i) s += std::pow(std::norm(r[i]), 2);
  return s / (n2 * n2);
}

struct InterfaceDensity {
  DensityProfile density;  // <L|c_i^dagger c_i|R> of the selected mode
  BoundState state;
  int mode_index = -1;
  double ipr = 0.0;
};

inline InterfaceDensity interface_density(const InterfaceSpec& s, double ipr_factor = 4.0) {
  BoundState target;
  try {
    target = interface_lattice_solve(s);
  } catch (const Error&) {
    target = interface_continuum(s.w - s.v1, s.u);
  }
  const auto sys = biorthogonal_diagonalize(build_interface(s));
  const int n = int(sys.energies.size());
  const double thr = ipr_factor / n;
  int best = -1;
  for (int k = 0; k < n; ++k) {
    if (inverse_participation(sys.right.col(k)) <= thr) continue;
    if (best < 0 || std::abs(sys.energies[k] - target.E) < std::abs(sys.energies[best] - target.E))
      best = k;
  }
  if (best < 0) throw Error(ErrorCode::NoLocalizedMode, "no mode above the IPR threshold");
  InterfaceDensity out;
  out.mode_index = best;
  out.ipr = inverse_participation(sys.right.col(best));
  out.state = target;
  out.state.E = sys.energies[best];
  out.density.site = sys.left.col(best).conjugate().cwiseProduct(sys.right.col(best));
  out.density.cell.resize(n / 2);
  for (int i = 0; i < n / 2; ++i) out.density.cell[i] = out.density.site[2 * i] + out.density.site[2 * i + 1];
  return out;
}

}  // namespace ptchain
