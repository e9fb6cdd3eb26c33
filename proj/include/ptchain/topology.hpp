#pragma once

#include <Eigen/SVD>
#include <cmath>
#include <functional>

#include "ptchain/lattice.hpp"

namespace ptchain {

// Winding of v_k around the origin, positive for w > v. Grid k_n = -pi + 2 pi n / n_k.
inline int winding_number(const ChainSpec& s, int n_k = 1024, double tol_gap = 1e-10) {
  require_clean(s);
  if (n_k < 4) throw Error(ErrorCode::InvalidSpec, "n_k too small");
  const double scale = std::max(std::abs(s.v), std::abs(s.w));
  double total = 0.0;
  cd prev = vk(s, -kPi);
  if (std::abs(prev) < tol_gap * scale) throw Error(ErrorCode::GaplessWinding, "v_k vanishes on the grid");
  for (int n = 1; n <= n_k; ++n) {
    const cd cur = vk(s, -kPi + 2 * kPi * n / n_k);
    if (std::abs(cur) < tol_gap * scale)
      throw Error(ErrorCode::GaplessWinding, "v_k vanishes on the grid");
    total += std::arg(cur / prev);
    prev = cur;
  }
  const double w = -total / (2 * kPi);
  const double r = std::round(w);
  if (std::abs(w - r) > 0.01) throw Error(ErrorCode::GaplessWinding, "winding not integer");
  return int(r);
}

// Lower-band biorthogonal connection.
inline cd zak_integrand(const ChainSpec& s, double k) {
  const cd z = vk(s, k);
  const double dphi = std::imag(vk_prime(s.alpha, s.v, s.w, k) / z);
  const cd root = std::sqrt(cd(gap_sq(s, k), 0.0));
  return -0.5 * dphi + 0.5 * dphi * kI * s.u_eff() / root;
}

struct ZakResult {
  cd q;
  int n_k = 0;  // points per piece at convergence
};

namespace detail {

inline cd periodic_trapezoid(const std::function<cd(double)>& f, int n) {
  cd acc = 0.0;
  for (int i = 0; i < n; ++i) acc += f(-kPi + 2 * kPi * i / n);
  return acc * (2 * kPi / n);
}

// k = m + h sin(theta) removes inverse square-root endpoint singularities.
inline cd sine_midpoint(const std::function<cd(double)>& f, double a, double b, int n) {
  const double m = 0.5 * (a + b), h = 0.5 * (b - a);
  cd acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double th = -0.5 * kPi + kPi * (i + 0.5) / n;
    acc += f(m + h * std::sin(th)) * std::cos(th);
  }
  return acc * h * (kPi / n);
}

}  // namespace detail

inline ZakResult zak_phase(const ChainSpec& s, int n_k = 256, double tol_zak = 1e-6,
                           int n_max = 1 << 16) {
  require_clean(s);
  if (min_abs_vk_numeric(s) < 1e-12)
    throw Error(ErrorCode::GaplessWinding, "v_k vanishes; connection undefined");
  auto f = [&](double k) { return zak_integrand(s, k); };

  // points where |v_k| = u_eff, if any
  std::vector<double> cuts;
  const double ue = s.u_eff();
  if (ue > 0 && s.v * s.w != 0) {
    const double c = (s.v * s.v + s.w * s.w - ue * ue) / (2 * s.v * s.w);
    if (c > -1 && c < 1) {
      const double k0 = std::acos(c);
      cuts = {-k0, k0};
    }
  }
  auto eval = [&](int n) -> cd {
    if (cuts.empty()) return detail::periodic_trapezoid(f, n);
    const double pts[4] = {-kPi, cuts[0], cuts[1], kPi};
    cd acc = 0.0;
    for (int p = 0; p < 3; ++p) acc += detail::sine_midpoint(f, pts[p], pts[p + 1], n);
    return acc;
  };

  int n = std::max(n_k, 8);
  cd prev = eval(n);
  while (2 * n <= n_max) {
    n *= 2;
    const cd cur = eval(n);
    if (std::abs(cur - prev) <= tol_zak) return {cur, n};
    prev = cur;
  }
  throw Error(ErrorCode::GridTooCoarse, "Zak phase not converged at n_k = " + std::to_string(n));
}

// Test oracle: Q from a discretized biorthogonal Wilson loop of the lower band, Re Q in (-pi, pi].
inline cd zak_wilson_loop(const ChainSpec& s, int n_k) {
  require_clean(s);
  std::vector<Eigen::Vector2cd> R(n_k), L(n_k);
  for (int j = 0; j < n_k; ++j) {
    const double k = -kPi + 2 * kPi * j / n_k;
    const cd z = vk(s, k);
    const cd E = -std::sqrt(cd(gap_sq(s, k), 0.0));
    const double ue = s.u_eff();
    // (h - E) r = 0 with h = [[i u, z], [z*, -i u]]
    Eigen::Vector2cd r(z, E - kI * ue);
    Eigen::Vector2cd l(z, std::conj(E) + kI * ue);  // h^dagger l = E* l
    r /= l.dot(r);                                  // l^dagger r = 1
    R[j] = r;
    L[j] = l;
  }
  cd prod = 1.0;
  for (int j = 0; j < n_k; ++j) prod *= L[j].dot(R[(j + 1) % n_k]);
  return kI * std::log(prod);
}

struct TopologyResult {
  int winding = 0;
  cd zak;
  double re_zak_deviation = 0.0;
  PtClass pt_class = PtClass::Symmetric;
};

inline TopologyResult topology_report(const ChainSpec& s, int n_k = 4096) {
  TopologyResult t;
  t.pt_class = classify_pt(s).pt_class;
  t.winding = winding_number(s, n_k);
  t.zak = zak_phase(s, n_k).q;
  t.re_zak_deviation = std::abs(t.zak.real() - kPi * t.winding);
  return t;
}

struct SymmetryReport {
  double t_plus_residual = 0.0;
  double ph_residual = 0.0;
  bool t_plus_ok = false;
  bool ph_ok = false;
};

inline double operator_norm(const MatrixXcd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::BDCSVD<MatrixXcd> svd(M);
  return svd.singularValues()(0);
}

// T+: U_T C* U_T = C with U_T = cell reversal x sigma_x; PH-: u C^dagger u + C = 1 with u = sigma_z per cell.
inline SymmetryReport symmetry_closure(const MatrixXcd& C, double tol_sym = 1e-8) {
  const int n = int(C.rows());
  if (n % 2 != 0 || C.cols() != n) throw Error(ErrorCode::OddDimension, "need whole cells");
  auto flip = [n](int p) { return n - 1 - p; };  // (x, a) -> (l-1-x, 1-a)
  MatrixXcd T(n, n), P(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      T(i, j) = std::conj(C(flip(i), flip(j))) - C(i, j);
      const double sgn = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      P(i, j) = sgn * std::conj(C(j, i)) + C(i, j) - (i == j ? 1.0 : 0.0);
    }
  SymmetryReport r;
  r.t_plus_residual = operator_norm(T);
  r.ph_residual = operator_norm(P);
  r.t_plus_ok = r.t_plus_residual <= tol_sym;
  r.ph_ok = r.ph_residual <= tol_sym;
  return r;
}

}  // namespace ptchain
