#pragma once

// Rigorous lower bounds for the growth constant from exact coefficients,
// and the binomial and log-convexity checks.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stacksort/grid_engine.hpp"
#include "stacksort/numeric.hpp"
#include "stacksort/series_core.hpp"

namespace stacksort::bounds {

enum class BoundMethod { root, indecomposable };

inline std::string to_string(BoundMethod m) { return m == BoundMethod::root ? "root" : "indecomposable"; }

struct BoundReport {
  BoundMethod method = BoundMethod::root;
  std::size_t n_used = 0;
  Real bound_value;
  std::optional<Real> t_c;
  bool certified = false;
  std::string warning;
};

inline bool certified_input(const CoefficientSeries& s) { return s.provenance == Provenance::exact_certified; }

inline std::string uncertified_warning(const CoefficientSeries& s) {
  return certified_input(s) ? std::string() : "coefficients are " + to_string(s.provenance) + "; bound is not rigorous";
}

/// w_n^{1/n}.
inline BoundReport root_bound(const CoefficientSeries& s, std::size_t n) {
  if (n == 0 || n > s.size()) throw std::out_of_range("root_bound: n outside the series");
  if (s.at(n) <= 0) throw std::domain_error("root_bound: non-positive coefficient");
  BoundReport r;
  r.method = BoundMethod::root;
  r.n_used = n;
  r.bound_value = exp(log_big(s.at(n)) / Real(static_cast<double>(n)));
  r.certified = certified_input(s);
  r.warning = uncertified_warning(s);
  return r;
}

/// Coefficients of W/(1+W), i.e. w~_n = w_n - sum_{j<n} w~_j w_{n-j}.
inline std::vector<BigInt> indecomposable_coefficients(const std::vector<BigInt>& w) {
  std::vector<BigInt> p(w.size());
  for (std::size_t n = 0; n < w.size(); ++n) {
    BigInt v = w[n];
    for (std::size_t j = 0; j < n; ++j) v -= p[j] * w[n - 1 - j];
    p[n] = v;
  }
  return p;
}

/// Coefficients of V/(1-V), the inverse transform.
inline std::vector<BigInt> compose_from_indecomposable(const std::vector<BigInt>& p) {
  std::vector<BigInt> w(p.size());
  for (std::size_t n = 0; n < p.size(); ++n) {
    BigInt v = p[n];
    for (std::size_t j = 0; j < n; ++j) v += p[j] * w[n - 1 - j];
    w[n] = v;
  }
  return w;
}

/// Generating function of sum-indecomposable members. Negative
/// coefficients mean the input is not a counting series of a sum-closed
/// class and are reported as an invariant violation.
inline CoefficientSeries indecomposable_series(const CoefficientSeries& s) {
  CoefficientSeries out{s.name + "-indecomposable", indecomposable_coefficients(s.coeffs), s.provenance};
  for (std::size_t n = 1; n <= out.size(); ++n)
    if (out.at(n) < 0) throw ContractViolation("indecomposable_series: negative coefficient at n=" + std::to_string(n));
  return out;
}

inline Real partial_sum(const std::vector<BigInt>& c, const Real& t) {
  Real acc = 0;
  for (std::size_t i = c.size(); i-- > 0;) acc = (acc + to_real(c[i])) * t;
  return acc;
}

struct BisectionOptions {
  double lo = 0.0;
  double hi = 0.2;
  double tolerance = 1e-12;
  int max_expansions = 64;
};

/// Smallest positive root of sum_{n<=N} w~_n t^n = 1, by bisection; 1/t_c.
inline BoundReport indecomposable_bound(const CoefficientSeries& s, std::size_t n_terms = 0,
                                        const BisectionOptions& opt = {}) {
  if (n_terms == 0) n_terms = s.size();
  if (n_terms > s.size()) throw std::out_of_range("indecomposable_bound: N beyond the series");
  std::vector<BigInt> p = indecomposable_coefficients(s.prefix(n_terms).coeffs);
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] < 0) throw ContractViolation("indecomposable_bound: negative coefficient at n=" + std::to_string(i + 1));
  Real lo = opt.lo;
  Real hi = opt.hi;
  int expansions = 0;
  while (partial_sum(p, hi) < 1) {
    if (++expansions > opt.max_expansions) throw std::domain_error("indecomposable_bound: partial sum never reaches 1");
    lo = hi;
    hi *= 2;
  }
  const Real tol = opt.tolerance;
  while (hi - lo > tol) {
    Real mid = (lo + hi) / 2;
    if (partial_sum(p, mid) < 1) lo = mid;
    else hi = mid;
  }
  BoundReport r;
  r.method = BoundMethod::indecomposable;
  r.n_used = n_terms;
  r.t_c = (lo + hi) / 2;
  // The upper bracket end keeps the bound on the safe side.
  r.bound_value = Real(1) / hi;
  r.certified = certified_input(s);
  r.warning = uncertified_warning(s);
  return r;
}

struct BonaReport {
  std::size_t checked_up_to = 0;
  bool binomial_ok = true;
  std::optional<std::size_t> first_binomial_violation;
  bool log_convex = true;
  std::optional<std::size_t> first_convexity_violation;
  std::optional<Real> lower_bound;
  bool asymptotic_conjecture_refuted = false;
};

inline Real bona_limit() { return Real(256) / Real(27); }

inline BigInt binomial_big(unsigned long n, unsigned long k) {
  BigInt r(1);
  for (unsigned long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// (i) w_n <= C(4n, n); (ii) a rigorous lower bound above 256/27 refutes
/// the growth-rate form of the conjecture; (iii) w_n^2 <= w_{n-1} w_{n+1}.
inline BonaReport bona_checks(const CoefficientSeries& s, std::optional<Real> lower_bound = std::nullopt) {
  BonaReport r;
  r.checked_up_to = s.size();
  for (std::size_t n = 1; n <= s.size(); ++n) {
    if (s.at(n) > binomial_big(4 * n, n)) {
      r.binomial_ok = false;
      r.first_binomial_violation = n;
      break;
    }
  }
  for (std::size_t n = 2; n + 1 <= s.size(); ++n) {
    if (s.at(n) * s.at(n) > s.at(n - 1) * s.at(n + 1)) {
      r.log_convex = false;
      r.first_convexity_violation = n;
      break;
    }
  }
  if (lower_bound) {
    r.lower_bound = lower_bound;
    r.asymptotic_conjecture_refuted = *lower_bound > bona_limit();
  }
  return r;
}

/// First n where w_n^{1/n} drops below w_{n-1}^{1/(n-1)}, if any.
inline std::optional<std::size_t> root_bound_monotonicity_violation(const CoefficientSeries& s) {
  // w_n^{n-1} >= w_{n-1}^n, compared in logs at working precision.
  Real prev = 0;
  for (std::size_t n = 1; n <= s.size(); ++n) {
    Real cur = log_big(s.at(n)) / Real(static_cast<double>(n));
    if (n > 1 && cur < prev) return n;
    prev = cur;
  }
  return std::nullopt;
}

}  // namespace stacksort::bounds
