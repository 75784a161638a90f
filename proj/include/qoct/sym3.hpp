#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace qoct {

/// Real symmetric 3x3 matrix, unique entries.
struct Sym3 {
  double a00, a01, a02, a11, a12, a22;
};

/// Eigen decomposition of a Sym3. Eigenvalues ascending; vec[k] is the unit
/// eigenvector belonging to val[k]; the vectors form an orthonormal triple.
struct Sym3Eigen {
  std::array<double, 3> val;
  std::array<std::array<double, 3>, 3> vec;
};

namespace detail {

inline double max_abs_entry(const Sym3& a) {
  double m = std::abs(a.a00);
  m = std::max(m, std::abs(a.a01));
  m = std::max(m, std::abs(a.a02));
  m = std::max(m, std::abs(a.a11));
  m = std::max(m, std::abs(a.a12));
  m = std::max(m, std::abs(a.a22));
  return m;
}

inline void sort_eigen(Sym3Eigen& e) {
  std::array<int, 3> idx{0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return e.val[i] < e.val[j]; });
  Sym3Eigen sorted;
  for (int k = 0; k < 3; ++k) {
    sorted.val[k] = e.val[idx[k]];
    sorted.vec[k] = e.vec[idx[k]];
  }
  e = sorted;
}

/// Cyclic Jacobi sweeps; always converges and gives orthonormal vectors by
/// construction (product of plane rotations).
inline Sym3Eigen jacobi_sym3(const Sym3& in) {
  double a[3][3] = {{in.a00, in.a01, in.a02}, {in.a01, in.a11, in.a12}, {in.a02, in.a12, in.a22}};
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off =
        a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    const double dia =
        a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
    if (off == 0.0 || off <= 1e-30 * dia) break;
    for (const auto& pq : pairs) {
      const int p = pq[0];
      const int q = pq[1];
      const double apq = a[p][q];
      if (apq == 0.0) continue;
      const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
      const double t =
          (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;
      const int r = 3 - p - q;
      a[p][p] -= t * apq;
      a[q][q] += t * apq;
      a[p][q] = a[q][p] = 0.0;
      const double arp = a[r][p];
      const double arq = a[r][q];
      a[r][p] = a[p][r] = c * arp - s * arq;
      a[r][q] = a[q][r] = s * arp + c * arq;
      for (int i = 0; i < 3; ++i) {
        const double vip = v[i][p];
        const double viq = v[i][q];
        v[i][p] = c * vip - s * viq;
        v[i][q] = s * vip + c * viq;
      }
    }
  }
  Sym3Eigen e;
  for (int k = 0; k < 3; ++k) {
    e.val[k] = a[k][k];
    e.vec[k] = {v[0][k], v[1][k], v[2][k]};
  }
  sort_eigen(e);
  return e;
}

inline std::array<double, 3> cross(const std::array<double, 3>& x, const std::array<double, 3>& y) {
  return {x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
}

inline double dot(const std::array<double, 3>& x, const std::array<double, 3>& y) {
  return x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
}

/// Eigenvalues by the trigonometric solution of the characteristic cubic.
inline std::array<double, 3> eigvals_cardano(const Sym3& a) {
  const double m = (a.a00 + a.a11 + a.a22) / 3.0;
  const double k00 = a.a00 - m;
  const double k11 = a.a11 - m;
  const double k22 = a.a22 - m;
  const double p = (k00 * k00 + k11 * k11 + k22 * k22 +
                    2.0 * (a.a01 * a.a01 + a.a02 * a.a02 + a.a12 * a.a12)) /
                   6.0;
  if (p == 0.0) return {m, m, m};
  const double det = k00 * (k11 * k22 - a.a12 * a.a12) - a.a01 * (a.a01 * k22 - a.a12 * a.a02) +
                     a.a02 * (a.a01 * a.a12 - k11 * a.a02);
  const double sp = std::sqrt(p);
  const double r = std::clamp(det / (2.0 * sp * sp * sp), -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double two_pi_3 = 2.0 * std::numbers::pi / 3.0;
  const double hi = m + 2.0 * sp * std::cos(phi);
  const double lo = m + 2.0 * sp * std::cos(phi + two_pi_3);
  return {lo, 3.0 * m - hi - lo, hi};
}

/// Eigenvector for lambda as the largest cross product of two rows of A - lambda I.
inline bool eigvec_by_cross(const Sym3& a, double lambda, std::array<double, 3>& out) {
  const std::array<double, 3> r0{a.a00 - lambda, a.a01, a.a02};
  const std::array<double, 3> r1{a.a01, a.a11 - lambda, a.a12};
  const std::array<double, 3> r2{a.a02, a.a12, a.a22 - lambda};
  std::array<std::array<double, 3>, 3> cand{cross(r0, r1), cross(r0, r2), cross(r1, r2)};
  int best = 0;
  double best_n = dot(cand[0], cand[0]);
  for (int i = 1; i < 3; ++i) {
    const double n = dot(cand[i], cand[i]);
    if (n > best_n) {
      best_n = n;
      best = i;
    }
  }
  if (!(best_n > 0.0) || !std::isfinite(best_n)) return false;
  const double inv = 1.0 / std::sqrt(best_n);
  out = {cand[best][0] * inv, cand[best][1] * inv, cand[best][2] * inv};
  return true;
}

inline double residual_inf(const Sym3& a, double lambda, const std::array<double, 3>& v) {
  const double r0 = a.a00 * v[0] + a.a01 * v[1] + a.a02 * v[2] - lambda * v[0];
  const double r1 = a.a01 * v[0] + a.a11 * v[1] + a.a12 * v[2] - lambda * v[1];
  const double r2 = a.a02 * v[0] + a.a12 * v[1] + a.a22 * v[2] - lambda * v[2];
  return std::max({std::abs(r0), std::abs(r1), std::abs(r2)});
}

/// Rayleigh quotient v^T A v for a unit vector; recovers the digits Cardano
/// loses for clustered eigenvalues.
inline double rayleigh(const Sym3& a, const std::array<double, 3>& v) {
  const double w0 = a.a00 * v[0] + a.a01 * v[1] + a.a02 * v[2];
  const double w1 = a.a01 * v[0] + a.a11 * v[1] + a.a12 * v[2];
  const double w2 = a.a02 * v[0] + a.a12 * v[1] + a.a22 * v[2];
  return v[0] * w0 + v[1] * w1 + v[2] * w2;
}

}  // namespace detail

/// Closed-form decomposition with a cyclic-Jacobi fallback whenever the
/// analytic route fails a residual or orthonormality check. Both routes are
/// pure functions of the input, so results are reproducible.
inline Sym3Eigen eigen_sym3(const Sym3& a) {
  const double scale = detail::max_abs_entry(a);
  if (scale == 0.0) {
    return Sym3Eigen{{0.0, 0.0, 0.0}, {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}};
  }
  const std::array<double, 3> lam = detail::eigvals_cardano(a);
  if (lam[0] == lam[2]) {
    // multiple of the identity up to rounding
    return detail::jacobi_sym3(a);
  }
  Sym3Eigen e;
  e.val = lam;
  std::array<double, 3> v_lo;
  std::array<double, 3> v_hi;
  if (!detail::eigvec_by_cross(a, lam[0], v_lo) || !detail::eigvec_by_cross(a, lam[2], v_hi))
    return detail::jacobi_sym3(a);
  // enforce orthogonality of the extreme pair, middle vector from the cross
  const double proj = detail::dot(v_hi, v_lo);
  for (int i = 0; i < 3; ++i) v_hi[i] -= proj * v_lo[i];
  const double nrm = std::sqrt(detail::dot(v_hi, v_hi));
  if (!(nrm > 1e-6)) return detail::jacobi_sym3(a);
  for (auto& x : v_hi) x /= nrm;
  e.vec[0] = v_lo;
  e.vec[2] = v_hi;
  e.vec[1] = detail::cross(v_hi, v_lo);
  for (int k = 0; k < 3; ++k) e.val[k] = detail::rayleigh(a, e.vec[k]);
  if (e.val[0] > e.val[1]) {
    std::swap(e.val[0], e.val[1]);
    std::swap(e.vec[0], e.vec[1]);
  }
  if (e.val[1] > e.val[2]) {
    std::swap(e.val[1], e.val[2]);
    std::swap(e.vec[1], e.vec[2]);
  }
  if (e.val[0] > e.val[1]) {
    std::swap(e.val[0], e.val[1]);
    std::swap(e.vec[0], e.vec[1]);
  }
  const double tol = 1e-11 * scale;
  for (int k = 0; k < 3; ++k) {
    if (detail::residual_inf(a, e.val[k], e.vec[k]) > tol) return detail::jacobi_sym3(a);
  }
  return e;
}

}  // namespace qoct
