#pragma once

// Dense real least squares by Householder QR, templated on the scalar so the
// same code runs in double, 50 and 100 digits. Problems here are tiny
// (at most a few dozen columns), so no blocking.

#include <algorithm>
#include <cmath>
#include <vector>

namespace helmrec::detail {

template <class T> struct LstsqResult {
  std::vector<T> x;
  T residual_norm = 0;
  T rhs_norm = 0;
  /// max|R_ii| / min|R_ii| of the triangular factor (after column scaling).
  T condition = 0;
  bool rank_deficient = false;
};

/// Minimises ||A x − b||₂ for a row-major rows×cols matrix, rows >= cols.
/// Columns are scaled to unit norm before factorisation.
template <class T>
LstsqResult<T> lstsq(std::vector<T> a, std::vector<T> b, int rows, int cols, T rank_tol = T(0)) {
  using std::abs;
  using std::sqrt;
  auto A = [&](int i, int j) -> T& { return a[std::size_t(i) * cols + j]; };

  LstsqResult<T> out;
  for (const auto& v : b) out.rhs_norm += v * v;
  out.rhs_norm = sqrt(out.rhs_norm);

  std::vector<T> scale(cols, T(1));
  for (int j = 0; j < cols; ++j) {
    T n = 0;
    for (int i = 0; i < rows; ++i) n += A(i, j) * A(i, j);
    n = sqrt(n);
    if (n > 0) {
      scale[j] = n;
      for (int i = 0; i < rows; ++i) A(i, j) /= n;
    }
  }

  std::vector<T> v(rows);
  for (int j = 0; j < cols; ++j) {
    T norm = 0;
    for (int i = j; i < rows; ++i) norm += A(i, j) * A(i, j);
    norm = sqrt(norm);
    if (norm == 0) continue;
    const T alpha = A(j, j) > 0 ? -norm : norm;
    for (int i = j; i < rows; ++i) v[i] = A(i, j);
    v[j] -= alpha;
    T vnorm2 = 0;
    for (int i = j; i < rows; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0) continue;
    for (int c = j; c < cols; ++c) {
      T d = 0;
      for (int i = j; i < rows; ++i) d += v[i] * A(i, c);
      d = 2 * d / vnorm2;
      for (int i = j; i < rows; ++i) A(i, c) -= d * v[i];
    }
    T d = 0;
    for (int i = j; i < rows; ++i) d += v[i] * b[i];
    d = 2 * d / vnorm2;
    for (int i = j; i < rows; ++i) b[i] -= d * v[i];
  }

  T rmax = 0, rmin = -1;
  for (int j = 0; j < cols; ++j) {
    const T r = abs(A(j, j));
    rmax = std::max(rmax, r);
    if (rmin < 0 || r < rmin) rmin = r;
  }
  out.condition = rmin > 0 ? rmax / rmin : T(-1);
  out.rank_deficient = !(rmin > rank_tol * rmax) || rmin == 0;

  out.x.assign(cols, T(0));
  if (!out.rank_deficient) {
    for (int j = cols - 1; j >= 0; --j) {
      T s = b[j];
      for (int c = j + 1; c < cols; ++c) s -= A(j, c) * out.x[c];
      out.x[j] = s / A(j, j);
    }
    for (int j = 0; j < cols; ++j) out.x[j] /= scale[j];
  }
  T res = 0;
  for (int i = cols; i < rows; ++i) res += b[i] * b[i];
  out.residual_norm = sqrt(res);
  return out;
}

}  // namespace helmrec::detail
