#pragma once

// Arithmetic modulo a prime below 2^32. Residues live in 32 bits, products
// are formed in 64 bits and reduced with a precomputed reciprocal.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace stacksort {

class Modulus {
 public:
  explicit Modulus(std::uint32_t p) : p_(p) {
    if (p < 2) throw std::invalid_argument("Modulus: p must be >= 2");
    // floor(2^64 / p); p is never a power of two above 2, so -1 is safe.
    reciprocal_ = static_cast<std::uint64_t>((static_cast<unsigned __int128>(1) << 64) / p);
    two64_mod_p_ = static_cast<std::uint32_t>((static_cast<unsigned __int128>(1) << 64) % p);
    two32_mod_p_ = static_cast<std::uint32_t>((std::uint64_t{1} << 32) % p);
  }

  std::uint32_t value() const { return p_; }

  /// x mod p for any 64-bit x.
  std::uint32_t reduce(std::uint64_t x) const {
    auto q = static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * reciprocal_) >> 64);
    std::uint64_t r = x - q * p_;
    if (r >= p_) r -= p_;
    return static_cast<std::uint32_t>(r);
  }

  /// hi * 2^64 + lo mod p, for hi < 2^32.
  std::uint32_t reduce(std::uint64_t hi, std::uint64_t lo) const {
    std::uint64_t h = static_cast<std::uint64_t>(reduce(hi)) * two64_mod_p_;
    return add(reduce(h), reduce(lo));
  }

  std::uint32_t add(std::uint32_t a, std::uint32_t b) const {
    std::uint64_t s = static_cast<std::uint64_t>(a) + b;
    return static_cast<std::uint32_t>(s >= p_ ? s - p_ : s);
  }
  std::uint32_t sub(std::uint32_t a, std::uint32_t b) const {
    return a >= b ? a - b : static_cast<std::uint32_t>(static_cast<std::uint64_t>(a) + p_ - b);
  }
  std::uint32_t neg(std::uint32_t a) const { return a == 0 ? 0 : p_ - a; }
  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
    return reduce(static_cast<std::uint64_t>(a) * b);
  }
  std::uint32_t pow(std::uint32_t base, std::uint64_t e) const {
    std::uint32_t r = 1 % p_;
    while (e) {
      if (e & 1) r = mul(r, base);
      base = mul(base, base);
      e >>= 1;
    }
    return r;
  }
  /// Inverse by Fermat; p must be prime and a != 0 mod p.
  std::uint32_t inv(std::uint32_t a) const {
    if (a % p_ == 0) throw std::domain_error("Modulus::inv: zero has no inverse");
    return pow(a % p_, p_ - 2);
  }
  std::uint32_t from_signed(std::int64_t v) const {
    std::int64_t r = v % static_cast<std::int64_t>(p_);
    if (r < 0) r += p_;
    return static_cast<std::uint32_t>(r);
  }

  /// sum_i a[i] * b[i] mod p. The 64-bit products are split into 32-bit
  /// halves and summed separately, so the loop needs no carries or
  /// reductions and vectorizes.
  std::uint32_t dot(const std::uint32_t* a, const std::uint32_t* b, std::size_t len) const {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    for (std::size_t i = 0; i < len; ++i) {
      std::uint64_t prod = static_cast<std::uint64_t>(a[i]) * b[i];
      lo += prod & 0xffffffffu;
      hi += prod >> 32;
    }
    return combine(hi, lo);
  }

  /// Two shifted dot products in one pass over memory:
  ///   first  = sum_{i < len-1} a[i] * b[i+1]
  ///   second = sum_{i < len}   a[i] * b[i]
  std::pair<std::uint32_t, std::uint32_t> dot_pair(const std::uint32_t* a, const std::uint32_t* b,
                                                   std::size_t len) const {
    std::uint64_t lo0 = 0, hi0 = 0, lo1 = 0, hi1 = 0;
    for (std::size_t i = 0; i + 1 < len; ++i) {
      std::uint64_t p0 = static_cast<std::uint64_t>(a[i]) * b[i + 1];
      std::uint64_t p1 = static_cast<std::uint64_t>(a[i]) * b[i];
      lo0 += p0 & 0xffffffffu;
      hi0 += p0 >> 32;
      lo1 += p1 & 0xffffffffu;
      hi1 += p1 >> 32;
    }
    if (len > 0) {
      std::uint64_t p1 = static_cast<std::uint64_t>(a[len - 1]) * b[len - 1];
      lo1 += p1 & 0xffffffffu;
      hi1 += p1 >> 32;
    }
    return {combine(hi0, lo0), combine(hi1, lo1)};
  }

 private:
  std::uint32_t combine(std::uint64_t hi, std::uint64_t lo) const {
    std::uint64_t h = static_cast<std::uint64_t>(reduce(hi)) * two32_mod_p_;
    return add(reduce(h), reduce(lo));
  }

  std::uint32_t p_;
  std::uint64_t reciprocal_ = 0;
  std::uint32_t two64_mod_p_ = 0;
  std::uint32_t two32_mod_p_ = 0;
};

/// Per-prime lookup tables: inverses of 1..n, factorials and inverse
/// factorials up to n (for binomials mod p). Requires p > n.
struct ModTables {
  ModTables(const Modulus& m, std::uint32_t n) : inverse(n + 1), factorial(n + 1), inv_factorial(n + 1) {
    if (m.value() <= n) throw std::invalid_argument("ModTables: prime must exceed table size");
    factorial[0] = 1;
    for (std::uint32_t i = 1; i <= n; ++i) factorial[i] = m.mul(factorial[i - 1], i);
    inv_factorial[n] = m.inv(factorial[n]);
    for (std::uint32_t i = n; i > 0; --i) inv_factorial[i - 1] = m.mul(inv_factorial[i], i);
    for (std::uint32_t i = 1; i <= n; ++i) inverse[i] = m.mul(inv_factorial[i], factorial[i - 1]);
  }

  std::uint32_t binomial(const Modulus& m, std::uint32_t n, std::uint32_t k) const {
    if (k > n) return 0;
    return m.mul(factorial[n], m.mul(inv_factorial[k], inv_factorial[n - k]));
  }

  std::vector<std::uint32_t> inverse;
  std::vector<std::uint32_t> factorial;
  std::vector<std::uint32_t> inv_factorial;
};

}  // namespace stacksort
