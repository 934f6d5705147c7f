#pragma once

// Evaluation-grid engine for the catalytic recurrence
//
//   Q_1(x,a) = (1+x)^2 (1+a)^2
//   Q_n(x,a) = (1+x)(1+a)^2 A_{n-1}(x,a) / a + (1+x) a Q_{n-1}(x,a)
//            + (1+x)/x * sum_{j=1}^{n-2} A_j(x,a) B_{n-1-j}(x,a)
//
// with A_j = Q_j(x,a) - Q_j(x,0) and B_j = Q_j(x,a) - Q_j(0,a). Values are
// kept on the grid [1..N+2]^2; the boundary rows Q_n(x,0), Q_n(0,a) and the
// corner Q_n(0,0) = w_n are recovered from the vanishing (n+2)-th finite
// difference, since Q_n has degree n+1 in each variable.
//
// The published form of the recurrence carries an extra factor t on the
// convolution term; it is an artifact of extracting the t^n coefficient and
// is not applied here (the output matches brute-force enumeration).

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stacksort/modular.hpp"
#include "stacksort/numeric.hpp"

namespace stacksort {

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Residue arithmetic modulo one 32-bit prime.
class ModArith {
 public:
  using value_type = std::uint32_t;

  ModArith(std::uint32_t prime, std::uint32_t table_size) : m_(prime), tables_(m_, table_size) {}

  value_type from_int(std::int64_t v) const { return m_.from_signed(v); }
  /// Grid coordinates are below the prime, so no reduction is needed.
  value_type small(std::uint32_t v) const { return v; }
  value_type add(value_type a, value_type b) const { return m_.add(a, b); }
  value_type sub(value_type a, value_type b) const { return m_.sub(a, b); }
  value_type mul(value_type a, value_type b) const { return m_.mul(a, b); }
  value_type div_small(value_type a, std::uint32_t c) const { return m_.mul(a, tables_.inverse[c]); }
  value_type binomial(std::uint32_t n, std::uint32_t k) const { return tables_.binomial(m_, n, k); }
  value_type dot(const value_type* a, const value_type* b, std::size_t len) const { return m_.dot(a, b, len); }
  std::pair<value_type, value_type> dot_pair(const value_type* a, const value_type* b, std::size_t len) const {
    return m_.dot_pair(a, b, len);
  }
  const Modulus& modulus() const { return m_; }

 private:
  Modulus m_;
  ModTables tables_;
};

/// Exact integer arithmetic. Divisions by grid coordinates are exact because
/// every Q_n has integer coefficients; a non-zero remainder is a bug.
class ExactArith {
 public:
  using value_type = BigInt;

  value_type from_int(std::int64_t v) const { return BigInt(v); }
  value_type small(std::uint32_t v) const { return BigInt(v); }
  value_type add(const value_type& a, const value_type& b) const { return a + b; }
  value_type sub(const value_type& a, const value_type& b) const { return a - b; }
  value_type mul(const value_type& a, const value_type& b) const { return a * b; }
  value_type div_small(const value_type& a, std::uint32_t c) const {
    BigInt q;
    BigInt r;
    boost::multiprecision::divide_qr(a, BigInt(c), q, r);
    if (r != 0) throw ContractViolation("exact grid engine: inexact division by " + std::to_string(c));
    return q;
  }
  value_type binomial(std::uint32_t n, std::uint32_t k) const {
    if (k > n) return 0;
    BigInt r = 1;
    for (std::uint32_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  }
  value_type dot(const value_type* a, const value_type* b, std::size_t len) const {
    BigInt s = 0;
    for (std::size_t i = 0; i < len; ++i) s += a[i] * b[i];
    return s;
  }
  std::pair<value_type, value_type> dot_pair(const value_type* a, const value_type* b, std::size_t len) const {
    return {len > 0 ? dot(a, b + 1, len - 1) : BigInt(0), dot(a, b, len)};
  }
};

/// Given f(1..n+2) for a polynomial of degree <= n+1, returns f(0) from
///   sum_{j=0}^{n+2} (-1)^j C(n+2,j) f(j) = 0.
template <class Arith>
typename Arith::value_type interpolate_at_zero(const Arith& ar,
                                               std::span<const typename Arith::value_type> values,
                                               std::uint32_t n) {
  if (values.size() < n + 2) throw ContractViolation("interpolate_at_zero: need n+2 values");
  using V = typename Arith::value_type;
  V pos = ar.from_int(0);
  V negs = ar.from_int(0);
  for (std::uint32_t j = 1; j <= n + 2; ++j) {
    V term = ar.mul(ar.binomial(n + 2, j), values[j - 1]);
    // f(0) = -sum_{j>=1} (-1)^j C f(j) = sum_{odd j} C f(j) - sum_{even j} C f(j)
    if (j % 2 == 1) {
      pos = ar.add(pos, term);
    } else {
      negs = ar.add(negs, term);
    }
  }
  return ar.sub(pos, negs);
}

/// Grid state for one arithmetic domain (one prime, or exact integers).
/// Histories are stored point-major: per grid point, A_1..A_{N-1} ascending at
/// offsets 0..N-2 and B_k at offset N-k (descending), so the convolution at a
/// grid point is a forward dot product of two contiguous ranges.
template <class Arith>
class GridEngine {
 public:
  using value_type = typename Arith::value_type;

  static std::size_t footprint_bytes(std::size_t n) {
    const std::size_t g = n + 2;
    return 2 * g * g * n * sizeof(value_type);
  }

  GridEngine(Arith arith, std::size_t n, std::size_t memory_budget_bytes = SIZE_MAX)
      : ar_(std::move(arith)), n_(n), g_(n + 2) {
    if (n < 1) throw ContractViolation("GridEngine: N must be >= 1");
    if (footprint_bytes(n) > memory_budget_bytes) {
      throw ResourceError("grid histories need " + std::to_string(footprint_bytes(n)) +
                          " bytes, budget is " + std::to_string(memory_budget_bytes) +
                          "; lower N, raise the budget, or run fewer primes concurrently");
    }
    hist_a_.assign(g_ * g_ * n_, ar_.from_int(0));
    hist_b_.assign(g_ * g_ * n_, ar_.from_int(0));
    q_.assign((g_ + 1) * (g_ + 1), ar_.from_int(0));
    initialize();
  }

  std::size_t order() const { return n_; }
  std::size_t grid_size() const { return g_; }
  std::size_t level() const { return level_; }
  const Arith& arith() const { return ar_; }

  /// Q_level(x, a) for 0 <= x, a <= N+2 (boundary rows included).
  const value_type& value(std::size_t x, std::size_t a) const { return q_[x * (g_ + 1) + a]; }

  /// w_1..w_level computed so far.
  const std::vector<value_type>& output() const { return output_; }

  /// Interior values of level n from levels 1..n-1.
  void recurrence_step(std::size_t n) {
    if (n != level_ + 1 || n < 2 || n > n_) {
      throw ContractViolation("recurrence_step: level " + std::to_string(n) + " out of order (at level " +
                              std::to_string(level_) + ")");
    }
    const std::size_t conv_len = n - 2;
    // The convolution for level n+1 only involves levels <= n-1, so it is
    // accumulated in the same pass and reused on the next call.
    const bool fuse = n + 1 <= n_ && n % 2 == 0;
    const bool reuse = pending_level_ == n;
    if (fuse && pending_.empty()) pending_.assign(g_ * g_, ar_.from_int(0));
    for (std::size_t x = 1; x <= g_; ++x) {
      const value_type x1 = ar_.small(static_cast<std::uint32_t>(x + 1));
      for (std::size_t a = 1; a <= g_; ++a) {
        const std::size_t pt = point(x, a);
        const std::size_t base = pt * n_;
        const value_type a1sq = ar_.mul(ar_.small(static_cast<std::uint32_t>(a + 1)),
                                        ar_.small(static_cast<std::uint32_t>(a + 1)));
        const value_type av = ar_.small(static_cast<std::uint32_t>(a));
        value_type& q = at(x, a);
        // (1+x)(1+a)^2 A_{n-1} / a
        value_type t1 = ar_.div_small(ar_.mul(a1sq, hist_a_[base + n - 2]), static_cast<std::uint32_t>(a));
        // (1+x) a Q_{n-1}
        value_type t2 = ar_.mul(av, q);
        value_type sum = ar_.add(t1, t2);
        value_type conv = ar_.from_int(0);
        if (reuse) {
          conv = pending_[pt];
        } else if (fuse) {
          auto [now, next] = ar_.dot_pair(&hist_a_[base], &hist_b_[base + n_ - (n - 1)], n - 1);
          conv = now;
          pending_[pt] = next;
        } else if (conv_len > 0) {
          conv = ar_.dot(&hist_a_[base], &hist_b_[base + n_ - conv_len], conv_len);
        }
        // (1+x)/x * sum_j A_j B_{n-1-j}
        sum = ar_.add(sum, ar_.div_small(conv, static_cast<std::uint32_t>(x)));
        q = ar_.mul(x1, sum);
      }
    }
    pending_level_ = fuse ? n + 1 : 0;
  }

  /// Recovers Q_n(x,0) for x in 1..N+2, then Q_n(0,a) for a in 0..N+2, and
  /// records the level's A/B histories and w_n = Q_n(0,0).
  void boundary_interpolation(std::size_t n) {
    if (n != level_ + 1) throw ContractViolation("boundary_interpolation: level out of order");
    const auto deg = static_cast<std::uint32_t>(n);
    std::vector<value_type> buf(n + 2);
    for (std::size_t x = 1; x <= g_; ++x) {
      for (std::size_t j = 1; j <= n + 2; ++j) buf[j - 1] = at(x, j);
      at(x, 0) = interpolate_at_zero<Arith>(ar_, buf, deg);
    }
    for (std::size_t a = 0; a <= g_; ++a) {
      for (std::size_t j = 1; j <= n + 2; ++j) buf[j - 1] = at(j, a);
      at(0, a) = interpolate_at_zero<Arith>(ar_, buf, deg);
    }
    record_level(n);
  }

  /// Advances one level (recurrence, then boundary recovery).
  void step() {
    const std::size_t n = level_ + 1;
    recurrence_step(n);
    boundary_interpolation(n);
  }

  void run() {
    while (level_ < n_) step();
  }

  /// (n+2)-th finite difference of the current level along a row (fixed x,
  /// a = first..first+n+2) or a column; zero for a polynomial of degree <= n+1.
  value_type finite_difference_a(std::size_t x, std::size_t first) const {
    return finite_difference([&](std::size_t j) { return value(x, first + j); });
  }
  value_type finite_difference_x(std::size_t a, std::size_t first) const {
    return finite_difference([&](std::size_t j) { return value(first + j, a); });
  }

 private:
  std::size_t point(std::size_t x, std::size_t a) const { return (x - 1) * g_ + (a - 1); }
  value_type& at(std::size_t x, std::size_t a) { return q_[x * (g_ + 1) + a]; }

  template <class F>
  value_type finite_difference(F f) const {
    const auto m = static_cast<std::uint32_t>(level_ + 2);
    value_type s = ar_.from_int(0);
    for (std::uint32_t j = 0; j <= m; ++j) {
      value_type term = ar_.mul(ar_.binomial(m, j), f(j));
      s = (j % 2 == 0) ? ar_.add(s, term) : ar_.sub(s, term);
    }
    return s;
  }

  void initialize() {
    for (std::size_t x = 0; x <= g_; ++x) {
      for (std::size_t a = 0; a <= g_; ++a) {
        const auto x1 = static_cast<std::int64_t>(x + 1);
        const auto a1 = static_cast<std::int64_t>(a + 1);
        at(x, a) = ar_.mul(ar_.from_int(x1 * x1), ar_.from_int(a1 * a1));
      }
    }
    record_level(1);
  }

  void record_level(std::size_t n) {
    if (n < n_) {
      for (std::size_t x = 1; x <= g_; ++x) {
        for (std::size_t a = 1; a <= g_; ++a) {
          const std::size_t base = point(x, a) * n_;
          hist_a_[base + n - 1] = ar_.sub(at(x, a), at(x, 0));
          hist_b_[base + n_ - n] = ar_.sub(at(x, a), at(0, a));
        }
      }
    }
    output_.push_back(at(0, 0));
    level_ = n;
  }

  Arith ar_;
  std::size_t n_;
  std::size_t g_;
  std::size_t level_ = 0;
  std::vector<value_type> hist_a_;
  std::vector<value_type> hist_b_;
  std::vector<value_type> q_;
  std::vector<value_type> output_;
  std::vector<value_type> pending_;
  std::size_t pending_level_ = 0;
};

}  // namespace stacksort
