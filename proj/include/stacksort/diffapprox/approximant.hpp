#pragma once

// Inhomogeneous differential approximants
//
//   sum_{k=0}^{M} Q_k(t) (t d/dt)^k F(t) = P(t)
//
// fitted to a truncated power series F = sum_{n>=0} f_n t^n. Coefficient of
// t^n gives sum_k sum_m q_{k,m} (n-m)^k f_{n-m} = p_n, one linear equation
// per term of the prefix.

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stacksort/diffapprox/complex.hpp"
#include "stacksort/diffapprox/linear_solve.hpp"
#include "stacksort/diffapprox/roots.hpp"

namespace stacksort::da {

struct ApproximantSpec {
  int order = 1;                  // M
  std::vector<int> q_degrees;     // deg Q_0 .. deg Q_M
  int p_degree = 0;               // -1 for a homogeneous approximant

  std::size_t unknowns() const {
    std::size_t u = 0;
    for (int d : q_degrees) u += static_cast<std::size_t>(d + 1);
    return u + static_cast<std::size_t>(p_degree + 1);
  }
  /// Terms needed for a square fit (unknowns - 1 equations).
  std::size_t terms_needed() const { return unknowns() - 1; }

  void validate() const {
    if (order < 1) throw std::invalid_argument("approximant order must be >= 1");
    if (q_degrees.size() != static_cast<std::size_t>(order) + 1)
      throw std::invalid_argument("approximant needs order + 1 polynomial degrees");
    for (int d : q_degrees)
      if (d < 0) throw std::invalid_argument("approximant degrees must be non-negative");
    if (p_degree < -1) throw std::invalid_argument("inhomogeneous degree must be >= -1");
  }

  std::string label() const {
    std::ostringstream os;
    os << "M=" << order << " deg=[";
    for (std::size_t i = 0; i < q_degrees.size(); ++i) os << (i ? "," : "") << q_degrees[i];
    os << "] L=" << p_degree;
    return os.str();
  }

  friend bool operator==(const ApproximantSpec&, const ApproximantSpec&) = default;
};

/// Uniform family member: Q_0..Q_{M-1} of degree n, Q_M of degree n + shift.
inline ApproximantSpec uniform_spec(int order, int n, int top_shift, int p_degree) {
  ApproximantSpec s;
  s.order = order;
  s.q_degrees.assign(static_cast<std::size_t>(order) + 1, n);
  s.q_degrees.back() = n + top_shift;
  s.p_degree = p_degree;
  return s;
}

/// Input series, coefficients f_0, f_1, ... Exact values are optional and
/// enable the exact fitting path.
struct SeriesPrefix {
  std::vector<Real> values;
  std::optional<std::vector<BigRational>> exact;

  std::size_t size() const { return values.size(); }

  static SeriesPrefix from_integers(const std::vector<BigInt>& f) {
    SeriesPrefix s;
    std::vector<BigRational> ex;
    for (const auto& v : f) {
      s.values.push_back(to_real(v));
      ex.emplace_back(v);
    }
    s.exact = std::move(ex);
    return s;
  }
  static SeriesPrefix from_rationals(const std::vector<BigRational>& f) {
    SeriesPrefix s;
    for (const auto& v : f) s.values.push_back(to_real(v));
    s.exact = f;
    return s;
  }
  static SeriesPrefix from_reals(std::vector<Real> f) {
    SeriesPrefix s;
    s.values = std::move(f);
    return s;
  }
  SeriesPrefix prefix(std::size_t n) const {
    if (n > size()) throw std::out_of_range("series prefix longer than series");
    SeriesPrefix s;
    s.values.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n));
    if (exact) s.exact = std::vector<BigRational>(exact->begin(), exact->begin() + static_cast<std::ptrdiff_t>(n));
    return s;
  }
};

enum class FitMethod { automatic, exact, floating };

struct FitOptions {
  FitMethod method = FitMethod::automatic;
  /// automatic uses exact arithmetic up to this many unknowns.
  std::size_t exact_unknown_limit = 40;
  /// Variable scale tau (fit in s = t / tau). 0 selects it from the data.
  double scale = 0;
};

/// A fitted approximant. Polynomials are stored in the scaled variable
/// s = t / scale, which keeps the float fit well conditioned.
struct HolonomicApproximant {
  ApproximantSpec spec;
  Real scale = 1;
  std::vector<std::vector<Real>> q;  // q[k][m], scaled variable
  std::vector<Real> p;               // scaled variable
  std::size_t used_terms = 0;
  bool exact = false;
  std::vector<std::vector<BigRational>> q_exact;  // unscaled, only when exact
  std::vector<BigRational> p_exact;

  /// Coefficients of Q_k in the original variable t.
  std::vector<Real> q_in_t(int k) const {
    std::vector<Real> c = q.at(static_cast<std::size_t>(k));
    Real f = 1;
    for (auto& v : c) {
      v /= f;
      f *= scale;
    }
    return c;
  }
  std::vector<Real> p_in_t() const {
    std::vector<Real> c = p;
    Real f = 1;
    for (auto& v : c) {
      v /= f;
      f *= scale;
    }
    return c;
  }
};

/// Data-driven variable scale: reciprocal of the last coefficient ratio,
/// rounded to a power of two so that scaling is exact.
inline Real choose_scale(const SeriesPrefix& f) {
  for (std::size_t n = f.size(); n-- > 1;) {
    if (f.values[n] != 0 && f.values[n - 1] != 0) {
      Real r = abs(f.values[n - 1] / f.values[n]);
      long e = 0;
      mpfr_get_d_2exp(&e, r.backend().data(), MPFR_RNDN);
      return ldexp(Real(1), static_cast<int>(e - 1));
    }
  }
  return Real(1);
}

namespace detail {

inline std::size_t column_count(const ApproximantSpec& s) { return s.unknowns(); }

/// Row n of the linear system for coefficients g (any ring supporting
/// multiplication by integers). Column order: Q_0 (m = 0..), ..., Q_M, P.
template <class T, class Get>
void fill_row(const ApproximantSpec& s, std::size_t n, Get&& g, T* row) {
  std::size_t col = 0;
  for (int k = 0; k <= s.order; ++k) {
    for (int m = 0; m <= s.q_degrees[static_cast<std::size_t>(k)]; ++m, ++col) {
      if (static_cast<std::size_t>(m) > n) {
        row[col] = T(0);
        continue;
      }
      std::size_t idx = n - static_cast<std::size_t>(m);
      T v = g(idx);
      T w(1);
      for (int i = 0; i < k; ++i) w *= T(static_cast<long>(idx));
      row[col] = v * w;
    }
  }
  for (int m = 0; m <= s.p_degree; ++m, ++col) row[col] = static_cast<std::size_t>(m) == n ? T(-1) : T(0);
}

}  // namespace detail

/// Fits the approximant to every term of `f`. Throws NullspaceError when
/// the nullspace is not one-dimensional and std::invalid_argument when the
/// prefix is too short.
inline HolonomicApproximant fit_approximant(const SeriesPrefix& f, const ApproximantSpec& spec,
                                            const FitOptions& opt = {}) {
  spec.validate();
  const std::size_t u = spec.unknowns();
  const std::size_t e = f.size();
  if (u > e + 1)
    throw std::invalid_argument("prefix of " + std::to_string(e) + " terms is too short for " + spec.label());

  bool use_exact = false;
  if (opt.method == FitMethod::exact) {
    if (!f.exact) throw std::invalid_argument("exact fit requested for a floating series");
    use_exact = true;
  } else if (opt.method == FitMethod::automatic) {
    use_exact = f.exact.has_value() && u <= opt.exact_unknown_limit;
  }

  HolonomicApproximant ap;
  ap.spec = spec;
  ap.used_terms = e;
  std::vector<Real> solution;

  if (use_exact) {
    const auto& fx = *f.exact;
    Matrix<BigInt> a(e, u);
    std::vector<BigRational> row(u);
    for (std::size_t n = 0; n < e; ++n) {
      detail::fill_row<BigRational>(spec, n, [&](std::size_t i) { return fx[i]; }, row.data());
      BigInt l(1);
      for (const auto& v : row) l = boost::multiprecision::lcm(l, denominator(v));
      for (std::size_t j = 0; j < u; ++j) a(n, j) = numerator(row[j]) * (l / denominator(row[j]));
    }
    auto x = exact_nullspace(std::move(a));
    ap.exact = true;
    ap.scale = 1;
    std::size_t col = 0;
    for (int k = 0; k <= spec.order; ++k) {
      std::vector<BigRational> qk;
      for (int m = 0; m <= spec.q_degrees[static_cast<std::size_t>(k)]; ++m) qk.push_back(x[col++]);
      ap.q_exact.push_back(std::move(qk));
    }
    for (int m = 0; m <= spec.p_degree; ++m) ap.p_exact.push_back(x[col++]);
    for (const auto& v : x) solution.push_back(to_real(v));
  } else {
    ap.scale = opt.scale > 0 ? Real(opt.scale) : choose_scale(f);
    // Exact inputs are converted at the current precision, which may exceed
    // the precision the float copy was made at.
    std::vector<Real> g(e);
    Real pw = 1;
    for (std::size_t n = 0; n < e; ++n) {
      g[n] = (f.exact ? to_real((*f.exact)[n]) : f.values[n]) * pw;
      pw *= ap.scale;
    }
    Matrix<Real> a(e, u);
    for (std::size_t n = 0; n < e; ++n) {
      detail::fill_row<Real>(spec, n, [&](std::size_t i) { return g[i]; }, &a.data[n * u]);
    }
    solution = float_nullspace(std::move(a));
  }

  // Both paths store polynomials in the scaled variable.
  std::size_t col = 0;
  for (int k = 0; k <= spec.order; ++k) {
    std::vector<Real> qk;
    for (int m = 0; m <= spec.q_degrees[static_cast<std::size_t>(k)]; ++m) qk.push_back(solution[col++]);
    ap.q.push_back(std::move(qk));
  }
  for (int m = 0; m <= spec.p_degree; ++m) ap.p.push_back(solution[col++]);
  return ap;
}

/// sum_k sum_m q_{k,m} (n-m)^k f_{n-m} - p_n for the coefficient of t^n,
/// evaluated in floating point on the original variable.
inline Real residual_at(const HolonomicApproximant& ap, const SeriesPrefix& f, std::size_t n) {
  Real s = 0;
  for (int k = 0; k <= ap.spec.order; ++k) {
    auto qk = ap.q_in_t(k);
    for (std::size_t m = 0; m < qk.size() && m <= n; ++m) {
      s += qk[m] * pow(Real(static_cast<long>(n - m)), k) * f.values[n - m];
    }
  }
  auto pt = ap.p_in_t();
  if (n < pt.size()) s -= pt[n];
  return s;
}

/// Exact residual (requires an exact fit and exact data).
inline BigRational exact_residual_at(const HolonomicApproximant& ap, const std::vector<BigRational>& f,
                                     std::size_t n) {
  if (!ap.exact) throw std::logic_error("exact residual needs an exactly fitted approximant");
  BigRational s(0);
  for (int k = 0; k <= ap.spec.order; ++k) {
    const auto& qk = ap.q_exact[static_cast<std::size_t>(k)];
    for (std::size_t m = 0; m < qk.size() && m <= n; ++m) {
      BigRational w(1);
      for (int i = 0; i < k; ++i) w *= BigRational(static_cast<long>(n - m));
      s += qk[m] * w * f[n - m];
    }
  }
  if (n < ap.p_exact.size()) s -= ap.p_exact[n];
  return s;
}

struct SingularityEstimate {
  Complex location;   // in t
  Complex exponent;   // lambda with F ~ (1 - t/z)^lambda
  bool near_multiple = false;
  Real residual = 0;  // relative residual of Q_M at the root
};

struct SingularityOptions {
  /// Roots closer than this (relative) are flagged as near-multiple.
  double multiple_tolerance = 1e-15;
};

/// All roots of Q_M with exponents lambda = M - 1 - Q_{M-1}(z) / (z Q_M'(z)),
/// sorted by modulus.
inline std::vector<SingularityEstimate> find_singularities(const HolonomicApproximant& ap,
                                                           const SingularityOptions& opt = {}) {
  const auto& top = ap.q.back();
  const auto& below = ap.q[ap.q.size() - 2];
  auto roots = polynomial_roots(top);
  std::vector<SingularityEstimate> out;
  out.reserve(roots.size());
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const Complex& s = roots[i];
    SingularityEstimate est;
    est.location = s * Complex(ap.scale);
    est.residual = relative_residual(top, s);
    auto [v, d] = evaluate_with_derivative(top, s);
    (void)v;
    Complex den = s * d;
    if (abs(den) != 0) {
      est.exponent = Complex(Real(ap.spec.order - 1)) - evaluate(below, s) / den;
    }
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (j != i && abs(roots[j] - s) <= Real(opt.multiple_tolerance) * abs(s)) est.near_multiple = true;
    }
    out.push_back(std::move(est));
  }
  std::sort(out.begin(), out.end(),
            [](const SingularityEstimate& a, const SingularityEstimate& b) { return abs(a.location) < abs(b.location); });
  return out;
}

/// Continues the series past the fitted prefix by running the recurrence
/// implied by the approximant. Returns f_0 .. f_{target-1}; the first
/// `f.size()` entries are copied from the input. Throws when the leading
/// recurrence coefficient vanishes at some n (indicial obstruction).
inline std::vector<Real> extend_with(const HolonomicApproximant& ap, const SeriesPrefix& f, std::size_t target) {
  const Real& tau = ap.scale;
  std::vector<Real> g(std::max(target, f.size()));
  Real pw = 1;
  for (std::size_t n = 0; n < f.size(); ++n) {
    g[n] = (f.exact ? to_real((*f.exact)[n]) : f.values[n]) * pw;
    pw *= tau;
  }
  for (std::size_t n = f.size(); n < target; ++n) {
    Real lead = 0;
    Real rhs = n < ap.p.size() ? ap.p[n] : Real(0);
    const Real nn(static_cast<long>(n));
    for (int k = 0; k <= ap.spec.order; ++k) {
      const auto& qk = ap.q[static_cast<std::size_t>(k)];
      lead += qk[0] * pow(nn, k);
      for (std::size_t m = 1; m < qk.size() && m <= n; ++m) {
        rhs -= qk[m] * pow(Real(static_cast<long>(n - m)), k) * g[n - m];
      }
    }
    if (lead == 0) throw std::domain_error("recurrence leading coefficient vanishes at n=" + std::to_string(n));
    g[n] = rhs / lead;
  }
  std::vector<Real> out(target);
  for (std::size_t n = 0; n < target; ++n) {
    out[n] = g[n] / pow(tau, static_cast<long>(n));
  }
  return out;
}

}  // namespace stacksort::da
