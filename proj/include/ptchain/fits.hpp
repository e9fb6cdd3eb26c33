#pragma once

#include <Eigen/QR>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "ptchain/entanglement.hpp"

namespace ptchain {

struct LinearFit {
  VectorXd coef;
  VectorXd stderr_;
  double sse = 0.0;
};

inline LinearFit least_squares(const MatrixXd& X, const VectorXd& y) {
  LinearFit f;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
  f.coef = qr.solve(y);
  const VectorXd r = y - X * f.coef;
  f.sse = r.squaredNorm();
  const int n = int(X.rows()), p = int(X.cols());
  f.stderr_ = VectorXd::Zero(p);
  if (n > p) {
    const MatrixXd cov = (X.transpose() * X).inverse() * (f.sse / (n - p));
    for (int i = 0; i < p; ++i) f.stderr_[i] = std::sqrt(std::max(0.0, cov(i, i)));
  }
  return f;
}

struct TrimPolicy {
  enum Kind { None, FixedCount, UntilSSE, UntilRMSE } kind = None;
  int count = 0;
  double threshold = 1e-4;

  static TrimPolicy none() { return {}; }
  static TrimPolicy fixed(int n) { return {FixedCount, n, 0.0}; }
  static TrimPolicy until_sse(double t) { return {UntilSSE, 0, t}; }
  static TrimPolicy until_rmse(double t) { return {UntilRMSE, 0, t}; }
};

struct FitResult {
  // Calabrese-Cardy: slope is c/3 (PBC) or c/6 (OBC)
  double slope = 0.0;
  double s0 = 0.0;
  double delta_ell = 0.0;
  // Casimir
  double eps_bulk = 0.0;
  double b = 0.0;
  double A = 0.0;
  int delta_L = 0;

  std::vector<double> stderrs;
  double sse = 0.0;
  double rmse = 0.0;
  int trim_count = 0;
  int n_points = 0;
  int trimmed_below = 0;  // largest trimmed abscissa (ell), 0 if none
};

namespace detail {

inline void sort_by_x(std::vector<double>& x, std::vector<double>& y) {
  std::vector<size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> xs, ys;
  for (size_t i : idx) xs.push_back(x[i]), ys.push_back(y[i]);
  x = xs;
  y = ys;
}

inline bool trim_satisfied(const TrimPolicy& p, double sse, int n) {
  if (p.kind == TrimPolicy::UntilSSE) return sse <= p.threshold;
  if (p.kind == TrimPolicy::UntilRMSE) return std::sqrt(sse / n) <= p.threshold;
  return true;
}

// Applies the trim policy to fit(first) where `first` is the number of leading points dropped.
template <class Fit>
FitResult trimmed(const TrimPolicy& p, int n, int min_points, Fit fit) {
  if (p.kind == TrimPolicy::None || p.kind == TrimPolicy::FixedCount) {
    const int t = p.kind == TrimPolicy::FixedCount ? p.count : 0;
    if (n - t < min_points) throw Error(ErrorCode::InsufficientPoints, "too few points after trim");
    return fit(t);
  }
  for (int t = 0; n - t >= min_points; ++t) {
    FitResult r;
    try {
      r = fit(t);
    } catch (const Error& e) {
      // an untrimmed UV tail can push the extrapolation length out of range; keep trimming
      if (e.code() != ErrorCode::NoConvergence) throw;
      continue;
    }
    if (trim_satisfied(p, r.sse, r.n_points)) return r;
  }
  throw Error(ErrorCode::InsufficientPoints, "trim rule not met before running out of points");
}

}  // namespace detail

// Re S = slope * ln sin(pi l / L) + s0
inline FitResult cc_fit_pbc(std::vector<double> ell, std::vector<double> reS, int L,
                            TrimPolicy trim = TrimPolicy::none()) {
  if (ell.size() != reS.size()) throw Error(ErrorCode::InvalidSpec, "length mismatch");
  detail::sort_by_x(ell, reS);
  const int n = int(ell.size());
  auto fit = [&](int t) {
    const int m = n - t;
    MatrixXd X(m, 2);
    VectorXd y(m);
    for (int i = 0; i < m; ++i) {
      X(i, 0) = std::log(std::sin(kPi * ell[t + i] / L));
      X(i, 1) = 1.0;
      y[i] = reS[t + i];
    }
    const auto f = least_squares(X, y);
    FitResult r;
    r.slope = f.coef[0];
    r.s0 = f.coef[1];
    r.stderrs = {f.stderr_[0], f.stderr_[1]};
    r.sse = f.sse;
    r.n_points = m;
    r.rmse = std::sqrt(f.sse / m);
    r.trim_count = t;
    r.trimmed_below = t > 0 ? int(ell[t - 1]) : 0;
    return r;
  };
  return detail::trimmed(trim, n, 4, fit);
}

// Re S = slope * ln sin(pi (l + dl) / (L + 2 dl)) + s0 at fixed dl
inline FitResult cc_fit_obc_fixed(const std::vector<double>& ell, const std::vector<double>& reS, int L,
                                  double dl, int first = 0) {
  const int m = int(ell.size()) - first;
  MatrixXd X(m, 2);
  VectorXd y(m);
  FitResult r;
  r.delta_ell = dl;
  r.n_points = m;
  r.trim_count = first;
  for (int i = 0; i < m; ++i) {
    const double arg = kPi * (ell[first + i] + dl) / (L + 2 * dl);
    if (!(arg > 0 && arg < kPi)) {
      r.sse = r.rmse = std::numeric_limits<double>::infinity();
      return r;
    }
    X(i, 0) = std::log(std::sin(arg));
    X(i, 1) = 1.0;
    y[i] = reS[first + i];
  }
  const auto f = least_squares(X, y);
  r.slope = f.coef[0];
  r.s0 = f.coef[1];
  r.stderrs = {f.stderr_[0], f.stderr_[1]};
  r.sse = f.sse;
  r.rmse = std::sqrt(f.sse / m);
  r.trimmed_below = first > 0 ? int(ell[first - 1]) : 0;
  return r;
}

// Outer 1D search over dl in [-L/4, L/4]: grid, then golden-section refinement.
inline FitResult cc_fit_obc_search(const std::vector<double>& ell, const std::vector<double>& reS, int L,
                                   int first = 0) {
  const double lo = -0.25 * L, hi = 0.25 * L;
  const int ng = 2000;
  const double step = (hi - lo) / ng;
  double best = std::numeric_limits<double>::infinity();
  int ib = -1;
  for (int i = 0; i <= ng; ++i) {
    const double s = cc_fit_obc_fixed(ell, reS, L, lo + i * step, first).sse;
    if (s < best) best = s, ib = i;
  }
  if (ib < 0 || ib == 0 || ib == ng)
    throw Error(ErrorCode::NoConvergence, "no interior minimum for the extrapolation length");
  double a = lo + (ib - 1) * step, c = lo + (ib + 1) * step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = c - g * (c - a), x2 = a + g * (c - a);
  double f1 = cc_fit_obc_fixed(ell, reS, L, x1, first).sse;
  double f2 = cc_fit_obc_fixed(ell, reS, L, x2, first).sse;
  for (int it = 0; it < 200 && c - a > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
    if (f1 < f2) {
      c = x2, x2 = x1, f2 = f1;
      x1 = c - g * (c - a);
      f1 = cc_fit_obc_fixed(ell, reS, L, x1, first).sse;
    } else {
      a = x1, x1 = x2, f1 = f2;
      x2 = a + g * (c - a);
      f2 = cc_fit_obc_fixed(ell, reS, L, x2, first).sse;
    }
  }
  return cc_fit_obc_fixed(ell, reS, L, 0.5 * (a + c), first);
}

inline FitResult cc_fit_obc(std::vector<double> ell, std::vector<double> reS, int L,
                            TrimPolicy trim = TrimPolicy::until_rmse(1e-4)) {
  if (ell.size() != reS.size()) throw Error(ErrorCode::InvalidSpec, "length mismatch");
  detail::sort_by_x(ell, reS);
  return detail::trimmed(trim, int(ell.size()), 5,
                         [&](int t) { return cc_fit_obc_search(ell, reS, L, t); });
}

// PBC: E0 = L eps + A / L.  OBC: E0 = L eps + b + A / (L + dL). nullopt dL scans [-4, 4].
inline FitResult casimir_fit(const std::vector<double>& Ls, const std::vector<double>& E0, Boundary bc,
                             std::optional<int> delta_L = std::nullopt) {
  const int n = int(Ls.size());
  if (n != int(E0.size())) throw Error(ErrorCode::InvalidSpec, "length mismatch");
  if (n < 4) throw Error(ErrorCode::InsufficientPoints, "need at least 4 sizes");
  VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = E0[i];
  auto one = [&](int dL) {
    FitResult r;
    r.n_points = n;
    r.delta_L = dL;
    if (bc == Boundary::PBC) {
      MatrixXd X(n, 2);
      for (int i = 0; i < n; ++i) X(i, 0) = Ls[i], X(i, 1) = 1.0 / Ls[i];
      const auto f = least_squares(X, y);
      r.eps_bulk = f.coef[0];
      r.A = f.coef[1];
      r.stderrs = {f.stderr_[0], f.stderr_[1]};
      r.sse = f.sse;
    } else {
      MatrixXd X(n, 3);
      for (int i = 0; i < n; ++i) {
        if (Ls[i] + dL <= 0) {
          r.sse = std::numeric_limits<double>::infinity();
          return r;
        }
        X(i, 0) = Ls[i], X(i, 1) = 1.0, X(i, 2) = 1.0 / (Ls[i] + dL);
      }
      const auto f = least_squares(X, y);
      r.eps_bulk = f.coef[0];
      r.b = f.coef[1];
      r.A = f.coef[2];
      r.stderrs = {f.stderr_[0], f.stderr_[1], f.stderr_[2]};
      r.sse = f.sse;
    }
    r.rmse = std::sqrt(r.sse / n);
    return r;
  };
  if (bc == Boundary::PBC) return one(0);
  if (delta_L) return one(*delta_L);
  FitResult best;
  best.sse = std::numeric_limits<double>::infinity();
  for (int d = -4; d <= 4; ++d) {
    const FitResult r = one(d);
    if (r.sse < best.sse) best = r;
  }
  return best;
}

struct EnsembleStats {
  std::vector<int> ells;
  std::vector<double> mean_re, sem_re, mean_im, sem_im;
  std::vector<std::vector<cd>> per_realization;  // [r][ell index]
  int realizations = 0;
  std::uint64_t base_seed = 0;
};

// Realization r draws delta(x) from mt19937_64 seeded with base_seed + r.
inline EnsembleStats disorder_ensemble(const ChainSpec& tmpl, double bound, int n, std::uint64_t base_seed,
                                       const std::vector<int>& ells, const ProfileOptions& opt = {}) {
  if (n < 1) throw Error(ErrorCode::InvalidSpec, "need at least one realization");
  EnsembleStats st;
  st.ells = ells;
  st.realizations = n;
  st.base_seed = base_seed;
  st.per_realization.assign(n, std::vector<cd>(ells.size()));
  ProfileOptions inner = opt;
  inner.jobs = 1;
  parallel_for(n, opt.jobs, [&](int r) {
    ChainSpec s = tmpl;
    s.disorder = make_disorder(s.cells, base_seed + std::uint64_t(r), bound);
    try {
      const auto rows = entropy_profile(s, ells, Prescription::Regularized, inner);
      for (size_t i = 0; i < ells.size(); ++i) st.per_realization[r][i] = rows[i].S.value;
    } catch (const Error& e) {
      throw Error(e.code(), "realization " + std::to_string(r) + ": " + e.what());
    }
  });
  const size_t m = ells.size();
  st.mean_re.assign(m, 0.0);
  st.mean_im.assign(m, 0.0);
  st.sem_re.assign(m, 0.0);
  st.sem_im.assign(m, 0.0);
  for (size_t i = 0; i < m; ++i) {
    double sr = 0, si = 0;
    for (int r = 0; r < n; ++r) sr += st.per_realization[r][i].real(), si += st.per_realization[r][i].imag();
    st.mean_re[i] = sr / n;
    st.mean_im[i] = si / n;
    if (n > 1) {
      double vr = 0, vi = 0;
      for (int r = 0; r < n; ++r) {
        vr += std::pow(st.per_realization[r][i].real() - st.mean_re[i], 2);
        vi += std::pow(st.per_realization[r][i].imag() - st.mean_im[i], 2);
      }
      st.sem_re[i] = std::sqrt(vr / (n - 1)) / std::sqrt(double(n));
      st.sem_im[i] = std::sqrt(vi / (n - 1)) / std::sqrt(double(n));
    }
  }
  return st;
}

}  // namespace ptchain
