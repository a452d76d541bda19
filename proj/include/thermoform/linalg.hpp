#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "thermoform/matrix.hpp"

namespace thermoform {

/// Relative pivot threshold for double-precision elimination. Rational
/// elimination is exact and ignores it.
inline constexpr double kRankTolerance = 1e-10;

template <Scalar T>
struct EchelonForm {
  Matrix<T> reduced;
  std::vector<std::size_t> pivot_cols;
  std::size_t rank() const { return pivot_cols.size(); }
};

/// Reduced row echelon form. Exact under rational policy; partial pivoting
/// with a relative threshold under double precision.
template <Scalar T>
EchelonForm<T> rref(Matrix<T> m, double rel_tol = kRankTolerance) {
  const std::size_t rows = m.rows(), cols = m.cols();
  std::vector<std::size_t> pivots;
  [[maybe_unused]] double scale = 0.0;
  if constexpr (!is_exact_v<T>) scale = max_abs(m);
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = rows;
    if constexpr (is_exact_v<T>) {
      for (std::size_t i = r; i < rows; ++i)
        if (m(i, c) != 0) {
          p = i;
          break;
        }
    } else {
      double best = rel_tol * scale;
      for (std::size_t i = r; i < rows; ++i)
        if (std::fabs(m(i, c)) > best) {
          best = std::fabs(m(i, c));
          p = i;
        }
    }
    if (p == rows) {
      if constexpr (!is_exact_v<T>)
        for (std::size_t i = r; i < rows; ++i) m(i, c) = 0.0;
      continue;
    }
    if (p != r)
      for (std::size_t j = 0; j < cols; ++j) std::swap(m(p, j), m(r, j));
    const T inv = T(1) / m(r, c);
    for (std::size_t j = c; j < cols; ++j) m(r, j) *= inv;
    m(r, c) = T(1);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m(i, c) == T(0)) continue;
      const T f = m(i, c);
      for (std::size_t j = c; j < cols; ++j) m(i, j) -= f * m(r, j);
      m(i, c) = T(0);
    }
    pivots.push_back(c);
    ++r;
  }
  return {std::move(m), std::move(pivots)};
}

template <Scalar T>
std::size_t rank(const Matrix<T>& m) {
  return rref(m).rank();
}

/// Basis of {x : m x = 0}.
template <Scalar T>
std::vector<Vector<T>> nullspace(const Matrix<T>& m) {
  const auto ef = rref(m);
  const std::size_t n = m.cols();
  std::vector<bool> is_pivot(n, false);
  for (auto c : ef.pivot_cols) is_pivot[c] = true;
  std::vector<Vector<T>> basis;
  for (std::size_t free = 0; free < n; ++free) {
    if (is_pivot[free]) continue;
    Vector<T> v(n, T(0));
    v[free] = T(1);
    for (std::size_t r = 0; r < ef.pivot_cols.size(); ++r) v[ef.pivot_cols[r]] = -ef.reduced(r, free);
    basis.push_back(std::move(v));
  }
  return basis;
}

template <Scalar T>
Matrix<T> inverse(const Matrix<T>& m) {
  if (!m.square()) throw InvalidInput("inverse of a non-square matrix");
  const std::size_t n = m.rows();
  Matrix<T> aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = T(1);
  }
  auto ef = rref(std::move(aug));
  if (ef.rank() < n || ef.pivot_cols[n - 1] != n - 1) throw SingularMatrix("matrix is singular");
  Matrix<T> inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = ef.reduced(i, n + j);
  return inv;
}

template <Scalar T>
T determinant(Matrix<T> m) {
  if (!m.square()) throw InvalidInput("determinant of a non-square matrix");
  const std::size_t n = m.rows();
  T det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = n;
    if constexpr (is_exact_v<T>) {
      for (std::size_t i = c; i < n; ++i)
        if (m(i, c) != 0) {
          p = i;
          break;
        }
    } else {
      double best = 0.0;
      for (std::size_t i = c; i < n; ++i)
        if (std::fabs(m(i, c)) > best) {
          best = std::fabs(m(i, c));
          p = i;
        }
    }
    if (p == n) return T(0);
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(c, j));
      det = -det;
    }
    det *= m(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (m(i, c) == T(0)) continue;
      const T f = m(i, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
    }
  }
  return det;
}

}  // namespace thermoform
