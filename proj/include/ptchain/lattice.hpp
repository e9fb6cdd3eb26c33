#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "ptchain/errors.hpp"

namespace ptchain {

using cd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Mat2 = Eigen::Matrix2cd;

constexpr double kPi = 3.14159265358979323846;
constexpr cd kI{0.0, 1.0};

enum class Boundary { PBC, OBC };

inline const char* boundary_name(Boundary b) { return b == Boundary::PBC ? "PBC" : "OBC"; }

// v(x) = v + delta[x], u(x) = u - delta[x] - detuning
struct DisorderProfile {
  std::vector<double> delta;
};

struct ChainSpec {
  int alpha = 1;
  double v = 1.0;
  double w = 1.0;
  double u = 0.0;
  int cells = 2;
  Boundary boundary = Boundary::PBC;
  std::optional<DisorderProfile> disorder;
  double detuning = 0.0;

  double u_eff() const { return u - detuning; }
  bool clean() const { return !disorder.has_value(); }
  int sites() const { return 2 * cells; }
};

struct InterfaceSpec {
  double v1 = 1.0;
  double v2 = 0.5;
  double w = 1.0;
  double u = 0.5;
  int cells_left = 20;
  int cells_right = 20;
};

inline void validate(const ChainSpec& s) {
  if (s.alpha < 1) throw Error(ErrorCode::InvalidSpec, "alpha must be >= 1");
  if (s.cells < s.alpha + 1)
    throw Error(ErrorCode::SpecTooSmall, "cells must be >= alpha + 1");
  if (s.u < 0 || s.detuning < 0 || s.u_eff() < 0)
    throw Error(ErrorCode::InvalidSpec, "need u >= 0, detuning >= 0 and u - detuning >= 0");
  if (s.disorder) {
    const auto& d = s.disorder->delta;
    if (static_cast<int>(d.size()) != s.cells)
      throw Error(ErrorCode::InvalidSpec, "disorder profile length must equal cells");
    const double bound = std::min(std::abs(s.v), s.u);
    for (double x : d)
      if (!(std::abs(x) < bound))
        throw Error(ErrorCode::InvalidSpec, "disorder offset violates |delta| < min(v, u)");
  }
}

inline void require_clean(const ChainSpec& s) {
  if (s.disorder) throw Error(ErrorCode::DisorderPresent, "translation invariance required");
}

// v_k = v e^{-i(alpha-1)k} - w e^{-i alpha k}
inline cd vk(int alpha, double v, double w, double k) {
  return v * std::exp(-kI * double(alpha - 1) * k) - w * std::exp(-kI * double(alpha) * k);
}

inline cd vk(const ChainSpec& s, double k) { return vk(s.alpha, s.v, s.w, k); }

// dv_k/dk
inline cd vk_prime(int alpha, double v, double w, double k) {
  return -kI * double(alpha - 1) * v * std::exp(-kI * double(alpha - 1) * k) +
         kI * double(alpha) * w * std::exp(-kI * double(alpha) * k);
}

// |v_k|^2 - u_eff^2 evaluated without cancellation near |v_k| = u
inline double gap_sq(const ChainSpec& s, double k) {
  const double a = std::abs(vk(s, k));
  return ((a - s.u) + s.detuning) * (a + s.u_eff());
}

inline Mat2 bloch_hamiltonian(const ChainSpec& s, double k) {
  require_clean(s);
  const cd z = vk(s, k);
  const double ue = s.u_eff();
  Mat2 h;
  h << kI * ue, z, std::conj(z), -kI * ue;
  return h;
}

// (+E, -E) with E the principal root of |v_k|^2 - u_eff^2
inline std::pair<cd, cd> dispersion(const ChainSpec& s, double k) {
  require_clean(s);
  const cd e = std::sqrt(cd(gap_sq(s, k), 0.0));
  return {e, -e};
}

enum class PtClass { Symmetric, Critical, Broken };

inline const char* pt_class_name(PtClass c) {
  switch (c) {
    case PtClass::Symmetric: return "Symmetric";
    case PtClass::Critical: return "Critical";
    case PtClass::Broken: return "Broken";
  }
  return "?";
}

struct PtReport {
  PtClass pt_class = PtClass::Symmetric;
  double min_abs_vk = 0.0;
  // set when v*w <= 0: the minimum was located numerically (UnsupportedCouplings)
  bool unsupported_couplings = false;
};

inline double min_abs_vk_numeric(const ChainSpec& s) {
  const int n = 4096;
  double best = 1e300, kb = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = -kPi + 2 * kPi * i / n;
    const double a = std::abs(vk(s, k));
    if (a < best) best = a, kb = k;
  }
  double lo = kb - 2 * kPi / n, hi = kb + 2 * kPi / n;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    if (std::abs(vk(s, a)) < std::abs(vk(s, b)))
      hi = b;
    else
      lo = a;
  }
  return std::min(best, std::abs(vk(s, 0.5 * (lo + hi))));
}

inline PtReport classify_pt(const ChainSpec& s, double tol_crit = 1e-9) {
  require_clean(s);
  PtReport r;
  if (s.v * s.w > 0) {
    r.min_abs_vk = std::abs(s.v - s.w);
  } else {
    r.unsupported_couplings = true;
    r.min_abs_vk = min_abs_vk_numeric(s);
  }
  const double d = r.min_abs_vk - s.u_eff();
  if (std::abs(d) <= tol_crit)
    r.pt_class = PtClass::Critical;
  else
    r.pt_class = d > 0 ? PtClass::Symmetric : PtClass::Broken;
  return r;
}

inline double cell_v(const ChainSpec& s, int x) {
  return s.disorder ? s.v + s.disorder->delta[x] : s.v;
}

inline double cell_u(const ChainSpec& s, int x) {
  return s.disorder ? s.u - s.disorder->delta[x] - s.detuning : s.u_eff();
}

// A(x) -> B block of the chiral form H = [[iU, V], [V^T, -iU]] (cells x cells, real)
inline MatrixXd hopping_block(const ChainSpec& s) {
  validate(s);
  const int L = s.cells;
  MatrixXd V = MatrixXd::Zero(L, L);
  for (int i = 0; i < L; ++i) {
    const int legs[2] = {i + s.alpha - 1, i + s.alpha};
    const double amp[2] = {cell_v(s, i), -s.w};
    for (int t = 0; t < 2; ++t) {
      int j = legs[t];
      if (j >= L) {
        if (s.boundary == Boundary::OBC) continue;
        j %= L;
      }
      V(i, j) += amp[t];
    }
  }
  return V;
}

// site order (cell0 A, cell0 B, cell1 A, ...)
inline MatrixXcd build_real_space(const ChainSpec& s) {
  validate(s);
  const int L = s.cells;
  const MatrixXd V = hopping_block(s);
  MatrixXcd H = MatrixXcd::Zero(2 * L, 2 * L);
  for (int i = 0; i < L; ++i) {
    const double ui = cell_u(s, i);
    H(2 * i, 2 * i) = kI * ui;
    H(2 * i + 1, 2 * i + 1) = -kI * ui;
  }
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j)
      if (V(i, j) != 0.0) {
        H(2 * i, 2 * j + 1) += V(i, j);
        H(2 * j + 1, 2 * i) += V(i, j);
      }
  return H;
}

// Hermitian SSH (v1, w) on the left, nH SSH (v2, w, +-iu) on the right, OBC at both ends
inline MatrixXcd build_interface(const InterfaceSpec& s) {
  if (s.cells_left < 2 || s.cells_right < 2)
    throw Error(ErrorCode::SpecTooSmall, "interface needs >= 2 cells per side");
  const int L = s.cells_left + s.cells_right;
  MatrixXcd H = MatrixXcd::Zero(2 * L, 2 * L);
  for (int i = 0; i < L; ++i) {
    const bool right = i >= s.cells_left;
    const double v = right ? s.v2 : s.v1;
    if (right) {
      H(2 * i, 2 * i) = kI * s.u;
      H(2 * i + 1, 2 * i + 1) = -kI * s.u;
    }
    H(2 * i, 2 * i + 1) = v;
    H(2 * i + 1, 2 * i) = v;
    if (i + 1 < L) {
      H(2 * i, 2 * (i + 1) + 1) = -s.w;
      H(2 * (i + 1) + 1, 2 * i) = -s.w;
    }
  }
  return H;
}

// uniform in [-bound, bound] from the top 53 bits of mt19937_64, seeded with `seed`
inline DisorderProfile make_disorder(int cells, std::uint64_t seed, double bound) {
  std::mt19937_64 gen(seed);
  DisorderProfile d;
  d.delta.resize(cells);
  for (int x = 0; x < cells; ++x) {
    const double unit = double(gen() >> 11) * 0x1.0p-53;
    d.delta[x] = bound * (2.0 * unit - 1.0);
  }
  return d;
}

}  // namespace ptchain
