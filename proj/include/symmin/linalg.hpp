#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "symmin/errors.hpp"

namespace symmin {

using Vec = std::vector<double>;

/// Kahan compensated accumulator. Summation order is whatever the caller
/// uses; all loops in the library iterate nodes in index order so results
/// are bit-reproducible.
class KahanSum {
public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

private:
  double s_ = 0.0, c_ = 0.0;
};

inline double dot(const Vec& a, const Vec& b) {
  KahanSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec operator+(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline Vec operator-(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

inline Vec operator*(double s, Vec a) {
  for (double& x : a) x *= s;
  return a;
}

inline void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vec normalized(Vec v) {
  double n = norm2(v);
  if (n == 0.0) throw DomainError("cannot normalize zero vector");
  for (double& x : v) x /= n;
  return v;
}

/// Solves A x = b for a small dense symmetric positive (semi)definite system
/// by Gaussian elimination with partial pivoting. Throws DegenerateGram when
/// the estimated condition number exceeds `cond_limit`.
inline Vec solve_dense(std::vector<Vec> A, Vec b, double cond_limit = 1e12) {
  const std::size_t n = b.size();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_diag = std::max(max_diag, std::fabs(A[i][i]));
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
    if (piv != col) {
      std::swap(A[piv], A[col]);
      std::swap(b[piv], b[col]);
    }
    double p = A[col][col];
    if (std::fabs(p) * cond_limit < max_diag || p == 0.0)
      throw DegenerateGram("near-singular system in solve_dense");
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = A[r][col] / p;
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  Vec x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return x;
}

/// Gram-Schmidt completion: extends the orthonormal set `basis` (vectors of
/// length n) to a full orthonormal basis of R^n and returns the added vectors.
inline std::vector<Vec> orthonormal_complement(const std::vector<Vec>& basis,
                                               std::size_t n) {
  std::vector<Vec> all = basis;
  std::vector<Vec> added;
  for (std::size_t axis = 0; axis < n && all.size() < n; ++axis) {
    Vec v(n, 0.0);
    v[axis] = 1.0;
    for (const Vec& b : all) axpy(-dot(v, b), b, v);
    double nv = norm2(v);
    if (nv > 1e-8) {
      for (double& x : v) x /= nv;
      all.push_back(v);
      added.push_back(v);
    }
  }
  return added;
}

}  // namespace symmin
