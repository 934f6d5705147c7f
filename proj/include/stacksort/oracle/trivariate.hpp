#pragma once

// Truncated series in t with exact bivariate polynomial coefficients, the
// series J(t,u,v) built from W_2 by enumeration, a check of its functional
// equation, and the substitution chain J -> J1 -> J2 -> Q.

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stacksort/grid_engine.hpp"
#include "stacksort/numeric.hpp"
#include "stacksort/oracle/permutation.hpp"

namespace stacksort::oracle {

/// Sparse polynomial in two variables; key (i, j) is the exponent pair.
class Poly2 {
 public:
  using Key = std::pair<int, int>;

  Poly2() = default;
  explicit Poly2(BigInt c) { add_term(0, 0, std::move(c)); }

  static Poly2 monomial(int i, int j, BigInt c = BigInt(1)) {
    Poly2 p;
    p.add_term(i, j, std::move(c));
    return p;
  }

  void add_term(int i, int j, const BigInt& c) {
    if (c == 0) return;
    auto [it, fresh] = terms_.try_emplace(Key{i, j}, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  BigInt coeff(int i, int j) const {
    auto it = terms_.find(Key{i, j});
    return it == terms_.end() ? BigInt(0) : it->second;
  }

  const std::map<Key, BigInt>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int degree_first() const {
    int d = -1;
    for (const auto& [k, c] : terms_) d = std::max(d, k.first);
    return d;
  }
  int degree_second() const {
    int d = -1;
    for (const auto& [k, c] : terms_) d = std::max(d, k.second);
    return d;
  }

  Poly2& operator+=(const Poly2& o) {
    for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
    return *this;
  }
  Poly2& operator-=(const Poly2& o) {
    for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, -c);
    return *this;
  }
  friend Poly2 operator+(Poly2 a, const Poly2& b) { return a += b; }
  friend Poly2 operator-(Poly2 a, const Poly2& b) { return a -= b; }
  friend Poly2 operator*(const Poly2& a, const Poly2& b) {
    Poly2 r;
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) r.add_term(ka.first + kb.first, ka.second + kb.second, ca * cb);
    return r;
  }
  friend Poly2 operator*(const BigInt& s, const Poly2& a) {
    Poly2 r;
    for (const auto& [k, c] : a.terms_) r.add_term(k.first, k.second, s * c);
    return r;
  }
  friend bool operator==(const Poly2& a, const Poly2& b) { return a.terms_ == b.terms_; }

  /// Multiplies by x^i y^j.
  Poly2 shifted(int i, int j) const {
    Poly2 r;
    for (const auto& [k, c] : terms_) r.add_term(k.first + i, k.second + j, c);
    return r;
  }

  /// Sets the first variable to 1.
  Poly2 at_first_one() const {
    Poly2 r;
    for (const auto& [k, c] : terms_) r.add_term(0, k.second, c);
    return r;
  }
  /// Sets the second variable to 1.
  Poly2 at_second_one() const {
    Poly2 r;
    for (const auto& [k, c] : terms_) r.add_term(k.first, 0, c);
    return r;
  }
  /// Sets the first variable to 0.
  Poly2 at_first_zero() const {
    Poly2 r;
    for (const auto& [k, c] : terms_)
      if (k.first == 0) r.add_term(0, k.second, c);
    return r;
  }
  /// Sets the second variable to 0.
  Poly2 at_second_zero() const {
    Poly2 r;
    for (const auto& [k, c] : terms_)
      if (k.second == 0) r.add_term(k.first, 0, c);
    return r;
  }
  /// Drops terms whose second exponent exceeds d.
  Poly2 truncated_second(int d) const {
    Poly2 r;
    for (const auto& [k, c] : terms_)
      if (k.second <= d) r.add_term(k.first, k.second, c);
    return r;
  }

  BigInt sum() const {
    BigInt s(0);
    for (const auto& [k, c] : terms_) s += c;
    return s;
  }

  std::string str(const char* x = "u", const char* y = "v") const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
      if (!first) os << (c < 0 ? " - " : " + ");
      else if (c < 0) os << "-";
      first = false;
      os << abs(c);
      if (k.first) os << "*" << x << "^" << k.first;
      if (k.second) os << "*" << y << "^" << k.second;
    }
    return os.str();
  }

 private:
  std::map<Key, BigInt> terms_;
};

/// f / (1 - x^du y^dv), which must be exact; throws ContractViolation if a
/// remainder is left.
inline Poly2 divide_one_minus(const Poly2& f, int du, int dv) {
  if (du < 0 || dv < 0 || du + dv == 0) throw std::invalid_argument("divide_one_minus: bad monomial");
  Poly2 q;
  const int max_i = f.degree_first();
  const int max_j = f.degree_second();
  // q_{a,b} = f_{a,b} + q_{a-du,b-dv}; lexicographic order visits the
  // second index first.
  for (int i = 0; i <= max_i; ++i)
    for (int j = 0; j <= max_j; ++j) {
      BigInt c = f.coeff(i, j);
      if (i >= du && j >= dv) c += q.coeff(i - du, j - dv);
      q.add_term(i, j, c);
    }
  if (!(q - q.shifted(du, dv) == f)) throw ContractViolation("divide_one_minus: division is not exact");
  return q;
}

/// f / (x^i y^j), which must be exact.
inline Poly2 divide_monomial(const Poly2& f, int i, int j) {
  Poly2 r;
  for (const auto& [k, c] : f.terms()) {
    if (k.first < i || k.second < j) throw ContractViolation("divide_monomial: division is not exact");
    r.add_term(k.first - i, k.second - j, c);
  }
  return r;
}

/// Series sum_{n <= max_n} t^n P_n, P_n a bivariate polynomial.
struct TruncatedTrivariateSeries {
  int max_n = 0;
  std::vector<Poly2> terms;  // size max_n + 1

  TruncatedTrivariateSeries() = default;
  explicit TruncatedTrivariateSeries(int n) : max_n(n), terms(static_cast<std::size_t>(n) + 1) {}

  Poly2& operator[](int n) { return terms[static_cast<std::size_t>(n)]; }
  const Poly2& operator[](int n) const { return terms[static_cast<std::size_t>(n)]; }

  template <class Fn>
  TruncatedTrivariateSeries map(Fn&& fn) const {
    TruncatedTrivariateSeries r(max_n);
    for (int n = 0; n <= max_n; ++n) r[n] = fn(terms[static_cast<std::size_t>(n)]);
    return r;
  }

  /// Coefficient sums with both variables set to 1.
  std::vector<BigInt> at_one_one() const {
    std::vector<BigInt> out;
    for (const auto& p : terms) out.push_back(p.sum());
    return out;
  }

  friend TruncatedTrivariateSeries operator+(const TruncatedTrivariateSeries& a, const TruncatedTrivariateSeries& b) {
    TruncatedTrivariateSeries r(std::min(a.max_n, b.max_n));
    for (int n = 0; n <= r.max_n; ++n) r[n] = a[n] + b[n];
    return r;
  }
  friend TruncatedTrivariateSeries operator-(const TruncatedTrivariateSeries& a, const TruncatedTrivariateSeries& b) {
    TruncatedTrivariateSeries r(std::min(a.max_n, b.max_n));
    for (int n = 0; n <= r.max_n; ++n) r[n] = a[n] - b[n];
    return r;
  }
  friend TruncatedTrivariateSeries operator*(const TruncatedTrivariateSeries& a, const TruncatedTrivariateSeries& b) {
    TruncatedTrivariateSeries r(std::min(a.max_n, b.max_n));
    for (int i = 0; i <= r.max_n; ++i) {
      if (a[i].is_zero()) continue;
      for (int j = 0; i + j <= r.max_n; ++j)
        if (!b[j].is_zero()) r[i + j] += a[i] * b[j];
    }
    return r;
  }
  /// Multiplies by t^k u^i v^j.
  TruncatedTrivariateSeries shifted(int k, int i, int j) const {
    TruncatedTrivariateSeries r(max_n);
    for (int n = 0; n + k <= max_n; ++n) r[n + k] = terms[static_cast<std::size_t>(n)].shifted(i, j);
    return r;
  }
};

inline constexpr int kMaxJOrder = 8;

/// J(t,u,v) = sum over pi in W_2(n) of |s^{-1}(pi)| t^n u^{leg-1} v^{tl}.
inline TruncatedTrivariateSeries compute_J_truncated(int max_n, int cap = kMaxJOrder) {
  if (max_n > cap) throw ResourceError("compute_J_truncated: order " + std::to_string(max_n) + " exceeds cap");
  TruncatedTrivariateSeries J(max_n);
  for (int n = 1; n <= max_n; ++n) {
    std::vector<std::uint64_t> pre = preimage_table(n, cap);
    std::size_t rank = 0;
    Perm tmp(static_cast<std::size_t>(n));
    for_each_permutation(n, [&](const Perm& p) {
      const std::uint64_t c = pre[rank++];
      if (c == 0 || !west_check(p)) return;
      J[n].add_term(legal_spaces(p) - 1, tail_length(p), BigInt(c));
    });
  }
  return J;
}

/// C(tuv) - 1 truncated at t^max_n.
inline TruncatedTrivariateSeries catalan_tuv(int max_n) {
  TruncatedTrivariateSeries c(max_n);
  for (int n = 1; n <= max_n; ++n) c[n] = Poly2::monomial(n, n, BigInt(catalan(n)));
  return c;
}

struct FunctionalEquationReport {
  int max_n = 0;
  bool holds = false;
  int first_mismatch = -1;  // order of the first differing t-coefficient
  std::string message;
};

/// Checks J = (C(tuv)-1)(1 + tu J(t,u,1)) + tuv/(1-u) * A * B with
///   A = (J(u,1) - J(u,v))/(1-v) - (C(tuv)-1)/v,
///   B = (J(1,1) - uv J(1,uv))/(1-uv) - u (J(u,1) - v J(u,v))/(1-v),
/// all divisions carried out exactly on polynomials.
inline FunctionalEquationReport verify_functional_equation(const TruncatedTrivariateSeries& J) {
  FunctionalEquationReport rep;
  rep.max_n = J.max_n;
  const int N = J.max_n;
  try {
    TruncatedTrivariateSeries C1 = catalan_tuv(N);
    TruncatedTrivariateSeries Ju1 = J.map([](const Poly2& p) { return p.at_second_one(); });
    TruncatedTrivariateSeries J11 = J.map([](const Poly2& p) { return Poly2(p.sum()); });
    // J(t,1,uv): u^k v^l -> (uv)^l.
    TruncatedTrivariateSeries J1uv = J.map([](const Poly2& p) {
      Poly2 r;
      for (const auto& [k, c] : p.terms()) r.add_term(k.second, k.second, c);
      return r;
    });

    TruncatedTrivariateSeries first = C1 + C1 * Ju1.shifted(1, 1, 0);

    TruncatedTrivariateSeries A = (Ju1 - J).map([](const Poly2& p) { return divide_one_minus(p, 0, 1); }) -
                                  C1.map([](const Poly2& p) { return divide_monomial(p, 0, 1); });
    TruncatedTrivariateSeries B1 =
        (J11 - J1uv.shifted(0, 1, 1)).map([](const Poly2& p) { return divide_one_minus(p, 1, 1); });
    TruncatedTrivariateSeries B2 =
        (Ju1 - J.shifted(0, 0, 1)).map([](const Poly2& p) { return divide_one_minus(p, 0, 1).shifted(1, 0); });
    TruncatedTrivariateSeries AB = A * (B1 - B2);
    TruncatedTrivariateSeries second =
        AB.map([](const Poly2& p) { return divide_one_minus(p, 1, 0); }).shifted(1, 1, 1);

    TruncatedTrivariateSeries rhs = first + second;
    rep.holds = true;
    for (int n = 0; n <= N; ++n) {
      if (!(rhs[n] == J[n])) {
        rep.holds = false;
        rep.first_mismatch = n;
        rep.message = "t^" + std::to_string(n) + ": lhs " + J[n].str() + " rhs " + rhs[n].str();
        break;
      }
    }
    if (rep.holds) rep.message = "identity holds through t^" + std::to_string(N);
  } catch (const ContractViolation& e) {
    rep.holds = false;
    rep.message = std::string("non-cancelling division: ") + e.what();
  }
  return rep;
}

inline FunctionalEquationReport verify_functional_equation(int max_n) {
  return verify_functional_equation(compute_J_truncated(max_n));
}

inline BigInt binomial(long n, long k) {
  if (k < 0 || k > n) return BigInt(0);
  BigInt r(1);
  for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Q(t,x,a) obtained from J through J1 = J(t,u,w/(tu)),
/// J2 = u (w J1(w) - tu J1(tu))/(w - tu) - u (C(w)-1), and
/// Q = J2(t, x+1, a/(1+a)^2). Polynomials use (x, a); Q_m is exact in a up
/// to degree max_n - m, and higher powers of a are dropped.
struct QFromJ {
  TruncatedTrivariateSeries Q;
  std::vector<int> exact_a_degree;  // per t-order
};

inline QFromJ transform_to_Q(const TruncatedTrivariateSeries& J) {
  const int N = J.max_n;
  // J2 as terms t^m u^i w^r.
  std::vector<std::map<std::pair<int, int>, BigInt>> J2(static_cast<std::size_t>(N) + 1);
  for (int n = 0; n <= N; ++n) {
    for (const auto& [k, c] : J[n].terms()) {
      const int deg_u = k.first;
      const int l = k.second;
      if (l > n || l > deg_u + 1) throw ContractViolation("transform_to_Q: monomial outside the expected support");
      for (int r = 0; r <= l; ++r) {
        const int m = n - r;
        const int i = deg_u + 1 - r;
        if (i < 0) throw ContractViolation("transform_to_Q: negative u power");
        J2[static_cast<std::size_t>(m)][{i, r}] += c;
      }
    }
  }
  QFromJ out;
  out.Q = TruncatedTrivariateSeries(N);
  out.exact_a_degree.assign(static_cast<std::size_t>(N) + 1, 0);
  for (int m = 0; m <= N; ++m) {
    const int amax = N - m;
    out.exact_a_degree[static_cast<std::size_t>(m)] = amax;
    Poly2& q = out.Q[m];
    for (const auto& [key, c] : J2[static_cast<std::size_t>(m)]) {
      const int i = key.first;
      const int r = key.second;
      if (r > amax) continue;
      // (x+1)^i * a^r (1+a)^{-2r}
      for (int xi = 0; xi <= i; ++xi) {
        BigInt cx = c * binomial(i, xi);
        if (r == 0) {
          q.add_term(xi, 0, cx);
          continue;
        }
        for (int s = 0; r + s <= amax; ++s) {
          BigInt e = binomial(2L * r + s - 1, s);
          if (s % 2) e = -e;
          q.add_term(xi, r + s, cx * e);
        }
      }
    }
    // - u (C(w) - 1) = -(x+1) a, which sits at t^0.
    if (m == 0 && amax >= 1) {
      q.add_term(0, 1, BigInt(-1));
      q.add_term(1, 1, BigInt(-1));
    }
  }
  return out;
}

inline QFromJ transform_to_Q(int max_n) { return transform_to_Q(compute_J_truncated(max_n)); }

/// Q_1..Q_max_n in (x, a) from the polynomial recurrence
///   Q_n = (1+x)(1+a)^2 (Q_{n-1} - Q_{n-1}(x,0))/a + (1+x) a Q_{n-1}
///       + (1+x)/x sum_{j=1}^{n-2} (Q_j - Q_j(x,0)) (Q_{n-j-1} - Q_{n-j-1}(0,a)).
/// With extra_t set, the convolution term carries an additional factor t,
/// i.e. it feeds Q_{n+1} instead of Q_n.
inline std::vector<Poly2> q_recurrence(int max_n, bool extra_t = false) {
  std::vector<Poly2> Q(static_cast<std::size_t>(max_n) + 1);
  const Poly2 one_x = Poly2::monomial(0, 0) + Poly2::monomial(1, 0);
  const Poly2 one_a = Poly2::monomial(0, 0) + Poly2::monomial(0, 1);
  const Poly2 one_a2 = one_a * one_a;
  if (max_n >= 1) Q[1] = one_x * one_x * one_a2;
  for (int n = 2; n <= max_n; ++n) {
    const Poly2& prev = Q[static_cast<std::size_t>(n) - 1];
    Poly2 q = one_x * one_a2 * divide_monomial(prev - prev.at_second_zero(), 0, 1) + (one_x * prev).shifted(0, 1);
    const int top = extra_t ? n - 3 : n - 2;
    const int shift = extra_t ? 2 : 1;
    Poly2 conv;
    for (int j = 1; j <= top; ++j) {
      const Poly2& a = Q[static_cast<std::size_t>(j)];
      const Poly2& b = Q[static_cast<std::size_t>(n - j - shift)];
      conv += (a - a.at_second_zero()) * (b - b.at_first_zero());
    }
    q += one_x * divide_monomial(conv, 1, 0);
    Q[static_cast<std::size_t>(n)] = q;
  }
  return Q;
}

struct QChainReport {
  int max_n = 0;
  bool q1_closed_form = false;
  bool q2_closed_form = false;
  bool matches_recurrence = false;
  bool constant_terms_match = false;  // Q(t,0,0) = J(t,1,1)
  std::vector<BigInt> constant_terms;
  bool literal_extra_t_rejected = false;
  bool ok() const { return q1_closed_form && q2_closed_form && matches_recurrence && constant_terms_match; }
};

inline QChainReport verify_q_chain(int max_n) {
  QChainReport rep;
  rep.max_n = max_n;
  TruncatedTrivariateSeries J = compute_J_truncated(max_n);
  QFromJ qj = transform_to_Q(J);
  std::vector<Poly2> rec = q_recurrence(max_n);
  std::vector<Poly2> literal = q_recurrence(max_n, true);

  const Poly2 one_x = Poly2::monomial(0, 0) + Poly2::monomial(1, 0);
  const Poly2 one_a = Poly2::monomial(0, 0) + Poly2::monomial(0, 1);
  const Poly2 q1 = one_x * one_x * one_a * one_a;
  const Poly2 q2 = BigInt(2) * (one_x * one_x * one_x * one_a * one_a * one_a);

  auto agrees = [&](int m, const Poly2& p) {
    const int d = qj.exact_a_degree[static_cast<std::size_t>(m)];
    return qj.Q[m].truncated_second(d) == p.truncated_second(d);
  };
  rep.q1_closed_form = max_n >= 1 && agrees(1, q1) && rec[1] == q1;
  rep.q2_closed_form = max_n >= 2 && agrees(2, q2) && rec[2] == q2;
  rep.matches_recurrence = qj.Q[0].is_zero();
  bool literal_differs = false;
  for (int m = 1; m <= max_n; ++m) {
    rep.matches_recurrence = rep.matches_recurrence && agrees(m, rec[static_cast<std::size_t>(m)]);
    literal_differs = literal_differs || !agrees(m, literal[static_cast<std::size_t>(m)]);
  }
  rep.literal_extra_t_rejected = literal_differs;
  std::vector<BigInt> w = J.at_one_one();
  rep.constant_terms_match = true;
  for (int m = 1; m <= max_n; ++m) {
    BigInt c = qj.Q[m].coeff(0, 0);
    rep.constant_terms.push_back(c);
    rep.constant_terms_match = rep.constant_terms_match && c == w[static_cast<std::size_t>(m)] &&
                               rec[static_cast<std::size_t>(m)].coeff(0, 0) == c;
  }
  return rep;
}

}  // namespace stacksort::oracle
