#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "stacksort/modular.hpp"
#include "stacksort/numeric.hpp"

namespace stacksort {

/// Deterministic Miller-Rabin for n < 2^32 (bases 2, 7, 61 suffice).
inline bool is_prime_u32(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t small : {2u, 3u, 5u, 7u, 11u, 13u, 61u}) {
    if (n == small) return true;
    if (n % small == 0) return false;
  }
  if (n >= (std::uint64_t{1} << 32)) throw std::invalid_argument("is_prime_u32: n >= 2^32");
  Modulus m(static_cast<std::uint32_t>(n));
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint32_t a : {2u, 7u, 61u}) {
    std::uint32_t x = m.pow(a, d);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = m.mul(x, x);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// The k largest primes strictly below `bound` (bound <= 2^32), descending.
inline std::vector<std::uint32_t> generate_primes(std::size_t k,
                                                  std::uint64_t bound = std::uint64_t{1} << 32) {
  if (bound > (std::uint64_t{1} << 32)) throw std::invalid_argument("generate_primes: bound > 2^32");
  std::vector<std::uint32_t> out;
  out.reserve(k);
  for (std::uint64_t c = bound; out.size() < k && c > 2;) {
    --c;
    if (is_prime_u32(c)) out.push_back(static_cast<std::uint32_t>(c));
  }
  if (out.size() < k) throw std::invalid_argument("generate_primes: not enough primes below bound");
  return out;
}

struct PrimePlan {
  std::vector<std::uint32_t> primes;  // strictly decreasing
  BigInt product;
  std::size_t target_n = 0;

  /// Appends the next `extra` primes below the smallest one already planned.
  void extend(std::size_t extra) {
    std::uint64_t bound = primes.empty() ? (std::uint64_t{1} << 32) : primes.back();
    for (std::uint32_t p : generate_primes(extra, bound)) {
      if (p <= target_n + 2) throw std::invalid_argument("PrimePlan: prime too small for grid order");
      primes.push_back(p);
      product *= p;
    }
  }
};

inline PrimePlan make_plan(std::size_t n, std::size_t prime_count) {
  if (n < 1) throw std::invalid_argument("make_plan: N must be >= 1");
  PrimePlan plan;
  plan.target_n = n;
  plan.product = 1;
  plan.extend(prime_count);
  return plan;
}

/// Growth rate assumed per term when sizing a plan.
inline constexpr double kPlanGrowthRate = 10.5;

/// Chooses enough of the largest 32-bit primes that their product exceeds
/// 10^(N*log10(growth) + safety_digits). This is a belief, not a proof:
/// certification after the run is what makes the output exact.
inline PrimePlan plan_primes(std::size_t n, double safety_digits,
                             double growth = kPlanGrowthRate) {
  if (n < 1) throw std::invalid_argument("plan_primes: N must be >= 1");
  const double target = static_cast<double>(n) * std::log10(growth) + safety_digits;
  PrimePlan plan;
  plan.target_n = n;
  plan.product = 1;
  do {
    plan.extend(1);
  } while (log10_big(plan.product) <= target);
  return plan;
}

}  // namespace stacksort
