#pragma once

// One-dimensional nullspaces of rectangular systems, either exactly over the
// rationals (fraction-free elimination) or in working-precision floats.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stacksort/numeric.hpp"

namespace stacksort::da {

class NullspaceError : public std::runtime_error {
 public:
  NullspaceError(const std::string& what, std::size_t dimension)
      : std::runtime_error(what), dimension_(dimension) {}
  std::size_t dimension() const { return dimension_; }

 private:
  std::size_t dimension_;
};

/// Dense row-major matrix.
template <class T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, T(0)) {}
  T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Normalizes so the first non-zero entry is 1.
template <class T>
void normalize_leading(std::vector<T>& v) {
  for (const auto& x : v) {
    if (x != 0) {
      T lead = x;
      for (auto& y : v) y /= lead;
      return;
    }
  }
}

namespace detail {

inline void throw_dimension(std::size_t dim) {
  if (dim == 0) throw NullspaceError("nullspace is trivial (overdetermined system is inconsistent)", 0);
  throw NullspaceError("nullspace has dimension " + std::to_string(dim) + ", expected 1", dim);
}

}  // namespace detail

/// Exact nullspace vector of an integer matrix by Bareiss elimination.
/// Throws NullspaceError unless the nullspace is one-dimensional.
inline std::vector<BigRational> exact_nullspace(Matrix<BigInt> a) {
  const std::size_t m = a.rows;
  const std::size_t n = a.cols;
  std::vector<std::size_t> pivot_cols;
  BigInt prev(1);
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < m; ++c) {
    std::size_t piv = r;
    while (piv < m && a(piv, c) == 0) ++piv;
    if (piv == m) continue;
    if (piv != r) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(r, j), a(piv, j));
    }
    for (std::size_t i = r + 1; i < m; ++i) {
      for (std::size_t j = c + 1; j < n; ++j) {
        a(i, j) = (a(r, c) * a(i, j) - a(i, c) * a(r, j)) / prev;
      }
      a(i, c) = 0;
    }
    prev = a(r, c);
    pivot_cols.push_back(c);
    ++r;
  }
  const std::size_t dim = n - pivot_cols.size();
  if (dim != 1) detail::throw_dimension(dim);

  std::vector<bool> is_pivot(n, false);
  for (auto c : pivot_cols) is_pivot[c] = true;
  std::size_t free_col = 0;
  while (is_pivot[free_col]) ++free_col;

  std::vector<BigRational> x(n, BigRational(0));
  x[free_col] = 1;
  for (std::size_t k = pivot_cols.size(); k-- > 0;) {
    std::size_t c = pivot_cols[k];
    BigRational s(0);
    for (std::size_t j = c + 1; j < n; ++j) {
      if (x[j] != 0 && a(k, j) != 0) s += BigRational(a(k, j)) * x[j];
    }
    x[c] = -s / BigRational(a(k, c));
  }
  normalize_leading(x);
  return x;
}

/// Nullspace vector of a float matrix by Gaussian elimination with partial
/// pivoting after column equilibration. A column whose best remaining pivot
/// is at most `tiny` (relative to the column scale) is treated as free. The
/// default of zero suits the badly conditioned approximant systems, where
/// genuine pivots can be far below the working epsilon.
inline std::vector<Real> float_nullspace(Matrix<Real> a, std::optional<Real> tiny = std::nullopt) {
  const std::size_t m = a.rows;
  const std::size_t n = a.cols;
  const Real eps = tiny ? *tiny : Real(0);

  std::vector<Real> scale(n, Real(1));
  for (std::size_t j = 0; j < n; ++j) {
    Real mx = 0;
    for (std::size_t i = 0; i < m; ++i) mx = std::max<Real>(mx, abs(a(i, j)));
    if (mx != 0) {
      scale[j] = mx;
      for (std::size_t i = 0; i < m; ++i) a(i, j) /= mx;
    }
  }

  std::vector<std::size_t> pivot_cols;
  std::size_t r = 0;
  Real factor;
  Real tmp;
  for (std::size_t c = 0; c < n && r < m; ++c) {
    std::size_t piv = r;
    Real best = abs(a(r, c));
    for (std::size_t i = r + 1; i < m; ++i) {
      Real v = abs(a(i, c));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best <= eps) continue;
    if (piv != r) {
      for (std::size_t j = c; j < n; ++j) std::swap(a(r, j), a(piv, j));
    }
    for (std::size_t i = r + 1; i < m; ++i) {
      if (a(i, c) == 0) continue;
      factor = a(i, c) / a(r, c);
      auto* fi = factor.backend().data();
      for (std::size_t j = c + 1; j < n; ++j) {
        mpfr_mul(tmp.backend().data(), fi, a(r, j).backend().data(), MPFR_RNDN);
        mpfr_sub(a(i, j).backend().data(), a(i, j).backend().data(), tmp.backend().data(), MPFR_RNDN);
      }
      a(i, c) = 0;
    }
    pivot_cols.push_back(c);
    ++r;
  }
  const std::size_t dim = n - pivot_cols.size();
  if (dim != 1) detail::throw_dimension(dim);

  std::vector<bool> is_pivot(n, false);
  for (auto c : pivot_cols) is_pivot[c] = true;
  std::size_t free_col = 0;
  while (is_pivot[free_col]) ++free_col;

  std::vector<Real> y(n, Real(0));
  y[free_col] = 1;
  for (std::size_t k = pivot_cols.size(); k-- > 0;) {
    std::size_t c = pivot_cols[k];
    Real s = 0;
    for (std::size_t j = c + 1; j < n; ++j) {
      if (y[j] != 0) s += a(k, j) * y[j];
    }
    y[c] = -s / a(k, c);
  }
  for (std::size_t j = 0; j < n; ++j) y[j] /= scale[j];

  normalize_leading(y);
  return y;
}

}  // namespace stacksort::da
