#pragma once

// Exact coefficients w_n of the 3-stack-sortable counting sequence via the
// grid recurrence evaluated modulo many 32-bit primes, combined by CRT and
// certified afterwards.

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "stacksort/grid_engine.hpp"
#include "stacksort/numeric.hpp"
#include "stacksort/primes.hpp"

namespace stacksort {

enum class Provenance { exact_certified, exact_uncertified, approximate };

inline std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::exact_certified:
      return "exact-certified";
    case Provenance::exact_uncertified:
      return "exact-uncertified";
    case Provenance::approximate:
      return "approximate";
  }
  return "unknown";
}

inline Provenance provenance_from_string(const std::string& s) {
  if (s == "exact-certified") return Provenance::exact_certified;
  if (s == "exact-uncertified") return Provenance::exact_uncertified;
  if (s == "approximate") return Provenance::approximate;
  throw std::invalid_argument("unknown provenance '" + s + "'");
}

inline bool is_exact(Provenance p) { return p != Provenance::approximate; }

/// Integer coefficients indexed from n = 1 (coeffs[0] is w_1).
struct CoefficientSeries {
  std::string name;
  std::vector<BigInt> coeffs;
  Provenance provenance = Provenance::exact_uncertified;

  std::size_t size() const { return coeffs.size(); }
  const BigInt& at(std::size_t n) const { return coeffs.at(n - 1); }

  CoefficientSeries prefix(std::size_t n) const {
    if (n > coeffs.size()) throw std::out_of_range("CoefficientSeries::prefix beyond available terms");
    return {name, {coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(n)}, provenance};
  }
};

struct CertificationReport {
  std::size_t n = 0;
  BigInt product;
  BigInt max_coefficient;
  bool passed = false;
  double log10_margin = 0.0;  // log10(P / (N * max w~_n))
};

/// Residues of w_1..w_N modulo p. Needs p > N + 2 (grid coordinates and the
/// binomials C(n+2, j) must be invertible).
inline std::vector<std::uint32_t> compute_series_mod_p(std::size_t n, std::uint32_t p,
                                                       std::size_t memory_budget_bytes = SIZE_MAX) {
  if (static_cast<std::uint64_t>(p) <= n + 2) {
    throw ContractViolation("compute_series_mod_p: prime " + std::to_string(p) + " <= N+2");
  }
  GridEngine<ModArith> engine(ModArith(p, static_cast<std::uint32_t>(n + 2)), n, memory_budget_bytes);
  engine.run();
  return engine.output();
}

/// The same grid algorithm in exact integer arithmetic. Independent oracle for
/// the modular pipeline; practical only for small N.
inline CoefficientSeries reference_compute_exact(std::size_t n) {
  GridEngine<ExactArith> engine(ExactArith{}, n);
  engine.run();
  return {"3-stack-sortable", engine.output(), Provenance::exact_uncertified};
}

/// Unique w~_n in [0, P) matching every residue vector.
inline CoefficientSeries crt_combine(const std::vector<std::vector<std::uint32_t>>& residues,
                                     const PrimePlan& plan) {
  if (residues.size() != plan.primes.size()) {
    throw std::invalid_argument("crt_combine: " + std::to_string(residues.size()) + " residue vectors for " +
                                std::to_string(plan.primes.size()) + " primes");
  }
  if (std::set<std::uint32_t>(plan.primes.begin(), plan.primes.end()).size() != plan.primes.size()) {
    throw std::invalid_argument("crt_combine: duplicate primes");
  }
  if (residues.empty()) return {"3-stack-sortable", {}, Provenance::exact_uncertified};
  const std::size_t len = residues.front().size();
  for (const auto& r : residues) {
    if (r.size() != len) throw std::invalid_argument("crt_combine: residue vectors differ in length");
  }

  // Garner: x = r_0 + p_0 (c_1 + p_1 (c_2 + ...)), with the running modulus
  // inverse precomputed once per prime.
  const std::size_t k = plan.primes.size();
  std::vector<BigInt> prefix_product(k);
  std::vector<std::uint32_t> inv_prefix(k, 0);
  BigInt m = 1;
  for (std::size_t i = 0; i < k; ++i) {
    prefix_product[i] = m;
    Modulus mod(plan.primes[i]);
    if (i > 0) {
      auto m_mod = static_cast<std::uint32_t>(static_cast<std::uint64_t>(m % plan.primes[i]));
      inv_prefix[i] = mod.inv(m_mod);
    }
    m *= plan.primes[i];
  }

  CoefficientSeries out{"3-stack-sortable", std::vector<BigInt>(len), Provenance::exact_uncertified};
  for (std::size_t t = 0; t < len; ++t) {
    BigInt x = residues[0][t] % plan.primes[0];
    for (std::size_t i = 1; i < k; ++i) {
      Modulus mod(plan.primes[i]);
      auto x_mod = static_cast<std::uint32_t>(static_cast<std::uint64_t>(x % plan.primes[i]));
      std::uint32_t c = mod.mul(mod.sub(residues[i][t] % plan.primes[i], x_mod), inv_prefix[i]);
      x += prefix_product[i] * c;
    }
    out.coeffs[t] = std::move(x);
  }
  return out;
}

/// Certification: if N * w~_n < P for every n then w~_n = w_n, because
/// w_n <= n * w_{n-1} bounds the true values inductively.
inline CertificationReport certify(CoefficientSeries& series, const PrimePlan& plan) {
  CertificationReport rep;
  rep.n = series.size();
  rep.product = plan.product;
  rep.max_coefficient = 0;
  for (const auto& c : series.coeffs) rep.max_coefficient = std::max(rep.max_coefficient, c);
  const BigInt bound = BigInt(rep.n) * rep.max_coefficient;
  rep.passed = bound < plan.product;
  rep.log10_margin = bound == 0 ? log10_big(plan.product) : log10_big(plan.product) - log10_big(bound);
  if (rep.passed) series.provenance = Provenance::exact_certified;
  return rep;
}

}  // namespace stacksort
