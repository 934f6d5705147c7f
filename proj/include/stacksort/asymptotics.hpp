#pragma once

// Ratio-based estimator sequences, windowed fits and the log-corrected
// coefficient model f_n ~ C mu^n n^{-alpha-1} (log n)^beta (...).

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stacksort/numeric.hpp"
#include "stacksort/series_core.hpp"

namespace stacksort::asym {

/// Coefficients c_n for n = first_n, first_n + 1, ... in working precision.
struct NumericSeries {
  std::size_t first_n = 1;
  std::vector<Real> values;

  std::size_t last_n() const { return first_n + values.size() - 1; }
  bool has(std::size_t n) const { return n >= first_n && n < first_n + values.size(); }
  const Real& at(std::size_t n) const { return values.at(n - first_n); }

  static NumericSeries from(const CoefficientSeries& s) {
    NumericSeries r;
    r.first_n = 1;
    for (const auto& c : s.coeffs) r.values.push_back(to_real(c));
    return r;
  }
};

enum class Abscissa { inv_n, inv_log_n, inv_n_log2_n, inv_n_log_n };

inline std::string to_string(Abscissa a) {
  switch (a) {
    case Abscissa::inv_n:
      return "1/n";
    case Abscissa::inv_log_n:
      return "1/log(n)";
    case Abscissa::inv_n_log2_n:
      return "1/(n log^2 n)";
    case Abscissa::inv_n_log_n:
      return "1/(n log n)";
  }
  return "?";
}

inline Real abscissa_value(Abscissa a, std::size_t n) {
  const Real x(static_cast<double>(n));
  switch (a) {
    case Abscissa::inv_n:
      return 1 / x;
    case Abscissa::inv_log_n:
      return 1 / log(x);
    case Abscissa::inv_n_log2_n: {
      Real l = log(x);
      return 1 / (x * l * l);
    }
    case Abscissa::inv_n_log_n:
      return 1 / (x * log(x));
  }
  return 0;
}

/// One estimator track. `kind` doubles as the CSV file stem.
struct EstimatorSeries {
  std::string kind;
  Abscissa abscissa = Abscissa::inv_n;
  std::vector<std::size_t> n;
  std::vector<Real> values;

  void push(std::size_t k, Real v) {
    n.push_back(k);
    values.push_back(std::move(v));
  }
  bool empty() const { return n.empty(); }
  std::size_t size() const { return n.size(); }
  const Real& at(std::size_t k) const {
    for (std::size_t i = 0; i < n.size(); ++i)
      if (n[i] == k) return values[i];
    throw std::out_of_range(kind + ": no value at n=" + std::to_string(k));
  }
  const Real& back() const { return values.back(); }
};

inline Real rn(std::size_t n) { return Real(static_cast<double>(n)); }

/// r_n = c_n / c_{n-1}.
inline EstimatorSeries ratios(const NumericSeries& s) {
  EstimatorSeries r{"ratios", Abscissa::inv_n, {}, {}};
  for (std::size_t n = s.first_n + 1; n <= s.last_n(); ++n) {
    if (s.at(n - 1) == 0) throw std::domain_error("ratios: zero coefficient at n=" + std::to_string(n - 1));
    r.push(n, s.at(n) / s.at(n - 1));
  }
  return r;
}

/// l_n = n r_n - (n-1) r_{n-1}.
inline EstimatorSeries linear_intercepts(const EstimatorSeries& r) {
  EstimatorSeries out{"intercepts", Abscissa::inv_n_log2_n, {}, {}};
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (r.n[i] != r.n[i - 1] + 1) continue;
    const std::size_t n = r.n[i];
    out.push(n, rn(n) * r.values[i] - rn(n - 1) * r.values[i - 1]);
  }
  return out;
}

/// g_n = (r_n/mu - 1) n.
inline EstimatorSeries estimator_g(const EstimatorSeries& r, const Real& mu, Abscissa axis = Abscissa::inv_n) {
  EstimatorSeries out{axis == Abscissa::inv_n ? "g" : "g_log", axis, {}, {}};
  for (std::size_t i = 0; i < r.size(); ++i) out.push(r.n[i], (r.values[i] / mu - 1) * rn(r.n[i]));
  return out;
}

/// beta_n - 1 = ((r_n/mu - 1) n + alpha + 1) log n.
inline EstimatorSeries beta_from_ratios(const EstimatorSeries& r, const Real& mu, const Real& alpha) {
  EstimatorSeries out{"beta_ratio", Abscissa::inv_log_n, {}, {}};
  for (std::size_t i = 0; i < r.size(); ++i) {
    const std::size_t n = r.n[i];
    if (n < 2) continue;
    out.push(n, ((r.values[i] / mu - 1) * rn(n) + alpha + 1) * log(rn(n)));
  }
  return out;
}

/// beta_n - 1 = (1 - l_n/mu) n log^2 n.
inline EstimatorSeries beta_from_intercepts(const EstimatorSeries& l, const Real& mu) {
  EstimatorSeries out{"beta_intercept", Abscissa::inv_n_log2_n, {}, {}};
  for (std::size_t i = 0; i < l.size(); ++i) {
    const std::size_t n = l.n[i];
    if (n < 2) continue;
    Real lg = log(rn(n));
    out.push(n, (1 - l.values[i] / mu) * rn(n) * lg * lg);
  }
  return out;
}

/// Solves A x = b (square) by partial-pivot elimination.
inline std::vector<Real> solve_dense(std::vector<std::vector<Real>> a, std::vector<Real> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0) throw std::domain_error("solve_dense: singular window");
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      Real f = a[r][c] / a[c][c];
      if (f == 0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<Real> x(n);
  for (std::size_t i = n; i-- > 0;) {
    Real s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Parameter tracks from fitting successive windows; params[j] is the
/// track of the j-th basis coefficient, indexed like `n`.
struct WindowedFit {
  std::vector<std::size_t> n;
  std::vector<std::vector<Real>> params;

  EstimatorSeries track(std::size_t j, const std::string& kind, Abscissa axis) const {
    EstimatorSeries e{kind, axis, {}, {}};
    for (std::size_t i = 0; i < n.size(); ++i) e.push(n[i], params[j][i]);
    return e;
  }
};

/// Fits y_n = sum_j t_j phi_j(n) on windows {k - p/2, ..., k - p/2 + p - 1}.
template <class Y, class Basis>
WindowedFit windowed_fit(std::size_t lo, std::size_t hi, std::size_t p, Y&& y, Basis&& basis) {
  WindowedFit fit;
  fit.params.assign(p, {});
  for (std::size_t k = lo + p / 2; k + (p - p / 2) <= hi + 1; ++k) {
    const std::size_t start = k - p / 2;
    if (start < 3) continue;
    std::vector<std::vector<Real>> a(p);
    std::vector<Real> b(p);
    for (std::size_t i = 0; i < p; ++i) {
      a[i] = basis(start + i);
      b[i] = y(start + i);
    }
    std::vector<Real> t = solve_dense(std::move(a), std::move(b));
    fit.n.push_back(k);
    for (std::size_t j = 0; j < p; ++j) fit.params[j].push_back(t[j]);
  }
  return fit;
}

/// d_n = log f_n - n log mu fitted to t1 + t2 log n + t3 loglog n + t4/log n
/// + t5/log^2 n (+ t6/log^3 n), truncated to the first `params` terms
/// (3 to 6). With alpha fixed the t2 term is moved to the left-hand side
/// and the remaining tracks shift down by one.
inline WindowedFit windowed_fit_coeffs(const NumericSeries& s, const Real& mu, std::size_t params = 5,
                                       std::optional<Real> fixed_alpha = std::nullopt) {
  if (params < 3 || params > 6) throw std::invalid_argument("windowed_fit_coeffs: 3 to 6 parameters");
  const Real lmu = log(mu);
  auto full_basis = [](std::size_t n) {
    Real x = rn(n);
    Real l = log(x);
    return std::vector<Real>{Real(1), l, log(l), 1 / l, 1 / (l * l), 1 / (l * l * l)};
  };
  const std::size_t p = fixed_alpha ? params - 1 : params;
  auto y = [&](std::size_t n) {
    Real d = log(s.at(n)) - rn(n) * lmu;
    if (fixed_alpha) d += (*fixed_alpha + 1) * log(rn(n));
    return d;
  };
  auto basis = [&](std::size_t n) {
    std::vector<Real> f = full_basis(n);
    std::vector<Real> out;
    for (std::size_t j = 0; j < params; ++j)
      if (!(fixed_alpha && j == 1)) out.push_back(f[j]);
    return out;
  };
  return windowed_fit(s.first_n, s.last_n(), p, y, basis);
}

/// e_n = (r_n/mu - 1) n fitted to t1 + t2/log n + t3/log^2 n + t4/log^3 n
/// (first `params` terms, 2 to 4).
inline WindowedFit windowed_fit_ratios(const EstimatorSeries& r, const Real& mu, std::size_t params = 4) {
  if (params < 2 || params > 4) throw std::invalid_argument("windowed_fit_ratios: 2 to 4 parameters");
  if (r.empty()) return {};
  auto y = [&](std::size_t n) { return (r.at(n) / mu - 1) * rn(n); };
  auto basis = [&](std::size_t n) {
    Real l = log(rn(n));
    std::vector<Real> f{Real(1), 1 / l, 1 / (l * l), 1 / (l * l * l)};
    f.resize(params);
    return f;
  };
  return windowed_fit(r.n.front(), r.n.back(), params, y, basis);
}

/// s_n = c_n n^{alpha+1} / mu^n.
inline NumericSeries normalized_coefficients(const NumericSeries& s, const Real& mu, const Real& alpha) {
  NumericSeries out;
  out.first_n = s.first_n;
  for (std::size_t n = s.first_n; n <= s.last_n(); ++n)
    out.values.push_back(s.at(n) * pow(rn(n), alpha + 1) / pow(mu, rn(n)));
  return out;
}

/// (R_n - 1) n log n with R_n = s_n / s_{n-1}.
inline EstimatorSeries normalized_ratio_estimator(const NumericSeries& s, const Real& mu, const Real& alpha = Real(2)) {
  NumericSeries sn = normalized_coefficients(s, mu, alpha);
  EstimatorSeries out{"Rn", Abscissa::inv_log_n, {}, {}};
  for (std::size_t n = std::max<std::size_t>(sn.first_n + 1, 2); n <= sn.last_n(); ++n)
    out.push(n, (sn.at(n) / sn.at(n - 1) - 1) * rn(n) * log(rn(n)));
  return out;
}

/// Fits s_n = e1 n^{beta-1} + e2 n^{beta-2} + e3 n^{beta-3} on successive
/// triples {k-1, k, k+1}.
inline WindowedFit amplitude_fit(const NumericSeries& s, const Real& mu, const Real& alpha, const Real& beta) {
  NumericSeries sn = normalized_coefficients(s, mu, alpha);
  auto y = [&](std::size_t n) { return sn.at(n); };
  auto basis = [&](std::size_t n) {
    Real x = rn(n);
    return std::vector<Real>{pow(x, beta - 1), pow(x, beta - 2), pow(x, beta - 3)};
  };
  return windowed_fit(sn.first_n, sn.last_n(), 3, y, basis);
}

enum class AmplitudeBehaviour { converging, vanishing, diverging };

inline std::string to_string(AmplitudeBehaviour b) {
  switch (b) {
    case AmplitudeBehaviour::converging:
      return "converging";
    case AmplitudeBehaviour::vanishing:
      return "vanishing";
    case AmplitudeBehaviour::diverging:
      return "diverging";
  }
  return "?";
}

/// Reads the tail of an amplitude track: vanishing when the last value is
/// small against the track's scale, converging when successive quarter-tail
/// increments shrink, diverging otherwise.
inline AmplitudeBehaviour classify_amplitude(const EstimatorSeries& e, double vanish_fraction = 0.05) {
  if (e.size() < 8) throw std::invalid_argument("classify_amplitude: track too short");
  Real scale = 0;
  for (const auto& v : e.values) scale = std::max<Real>(scale, abs(v));
  if (scale == 0 || abs(e.back()) < vanish_fraction * scale) return AmplitudeBehaviour::vanishing;
  const std::size_t m = e.size();
  const std::size_t q = m / 4;
  Real d1 = abs(e.values[m - 1 - q] - e.values[m - 1 - 2 * q]);
  Real d2 = abs(e.values[m - 1] - e.values[m - 1 - q]);
  return d2 < d1 ? AmplitudeBehaviour::converging : AmplitudeBehaviour::diverging;
}

class IntegerAlphaError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline bool near_nonnegative_integer(const Real& alpha, double tol = 1e-6) {
  Real r = round(alpha);
  return r >= 0 && abs(alpha - r) < tol;
}

/// 1/Gamma(s), zero at the poles of Gamma.
inline Real rgamma(const Real& s) {
  if (s <= 0 && s == floor(s)) return Real(0);
  Real g;
  mpfr_gamma(g.backend().data(), s.backend().data(), MPFR_RNDN);
  return 1 / g;
}

/// k-th derivative of 1/Gamma at s by a central difference whose step and
/// internal precision are tuned to the working precision.
inline Real rgamma_derivative(const Real& s, unsigned k) {
  if (k == 0) return rgamma(s);
  const unsigned digits = working_digits();
  const unsigned inner = (k + 2) * digits / 2 + 20;
  Real out;
  {
    PrecisionScope scope(inner);
    Real x(s, inner);
    Real h = pow(Real(10), -Real(static_cast<double>(inner)) / Real(static_cast<double>(k + 2)));
    Real acc = 0;
    Real binom = 1;
    for (unsigned j = 0; j <= k; ++j) {
      Real point = x + (Real(static_cast<double>(k)) / 2 - Real(static_cast<double>(j))) * h;
      Real term = binom * rgamma(point);
      acc += (j % 2) ? -term : term;
      binom = binom * Real(static_cast<double>(k - j)) / Real(static_cast<double>(j + 1));
    }
    out = acc / pow(h, Real(static_cast<double>(k)));
  }
  return Real(out, digits);
}

/// Generalized binomial coefficient beta choose k.
inline Real binomial_real(const Real& beta, unsigned k) {
  Real r = 1;
  for (unsigned i = 0; i < k; ++i) r = r * (beta - Real(static_cast<double>(i))) / Real(static_cast<double>(i + 1));
  return r;
}

/// c_0..c_kmax with c_k = binom(beta, k) Gamma(-alpha) (1/Gamma)^{(k)}(-alpha).
inline std::vector<Real> fs_coefficients(const Real& alpha, const Real& beta, unsigned k_max) {
  if (near_nonnegative_integer(alpha))
    throw IntegerAlphaError("fs_coefficients: alpha is a non-negative integer; use the integer-alpha form of model_predict");
  const Real s = -alpha;
  Real g;
  mpfr_gamma(g.backend().data(), s.backend().data(), MPFR_RNDN);
  std::vector<Real> c{Real(1)};
  for (unsigned k = 1; k <= k_max; ++k) c.push_back(binomial_real(beta, k) * g * rgamma_derivative(s, k));
  return c;
}

/// Integer-alpha constants binom(beta, k) (1/Gamma)^{(k)}(-alpha); the k=0
/// entry vanishes and the expansion starts at 1/log n.
inline std::vector<Real> integer_alpha_coefficients(const Real& alpha, const Real& beta, unsigned k_max) {
  std::vector<Real> c{Real(0)};
  for (unsigned k = 1; k <= k_max; ++k) c.push_back(binomial_real(beta, k) * rgamma_derivative(-round(alpha), k));
  return c;
}

/// f_n ~ C mu^n n^{-alpha-1} (log n)^beta (...) with coefficient-side log
/// power lambda: f_n ~ c0 mu^n / (n^{alpha+1} log^lambda n).
struct AsymptoticModel {
  Real mu = 1;
  Real alpha = 0;
  Real beta = 0;
  Real lambda = 0;
  Real amplitude = 1;           // C
  std::optional<Real> c0;       // never pinned; carried for reporting only
  std::vector<Real> c;          // correction coefficients c_0..c_K
  std::vector<Real> e;          // normalized amplitudes e_1..e_3

  bool integer_alpha() const { return near_nonnegative_integer(alpha); }

  static Real lambda_for(const Real& alpha, const Real& beta) {
    return near_nonnegative_integer(alpha) ? 1 - beta : -beta;
  }

  static AsymptoticModel make(const Real& mu, const Real& alpha, const Real& beta, const Real& amplitude = Real(1)) {
    AsymptoticModel m;
    m.mu = mu;
    m.alpha = alpha;
    m.beta = beta;
    m.lambda = lambda_for(alpha, beta);
    m.amplitude = amplitude;
    return m;
  }

  void validate() const {
    if (abs(lambda - lambda_for(alpha, beta)) > Real(1e-12))
      throw std::logic_error("AsymptoticModel: lambda inconsistent with alpha and beta");
  }
};

/// Evaluates the model at n with correction terms up to 1/log^{k_max} n.
/// Non-integer alpha: C mu^n n^{-alpha-1} (log n)^beta / Gamma(-alpha)
/// (1 + sum c_k / log^k n). Integer alpha: C mu^n n^{-alpha-1} (log n)^beta
/// sum_{k>=1} c_k / log^k n.
inline Real model_predict(const AsymptoticModel& m, std::size_t n, unsigned k_max = 4) {
  if (n < 2) throw std::invalid_argument("model_predict: n must be at least 2");
  m.validate();
  const Real x = rn(n);
  const Real l = log(x);
  std::vector<Real> c = m.c;
  if (c.size() < static_cast<std::size_t>(k_max) + 1) {
    c = m.integer_alpha() ? integer_alpha_coefficients(m.alpha, m.beta, k_max) : fs_coefficients(m.alpha, m.beta, k_max);
  }
  Real series = 0;
  Real lk = 1;
  for (unsigned k = 0; k <= k_max; ++k) {
    if (!(m.integer_alpha() && k == 0)) series += c[k] / lk;
    lk *= l;
  }
  Real lead = m.amplitude * pow(m.mu, x) * pow(x, -m.alpha - 1) * pow(l, m.beta);
  if (!m.integer_alpha()) lead *= rgamma(-m.alpha);
  return lead * series;
}

/// Writes `n,abscissa,value` rows to <dir>/<kind>.csv.
inline std::filesystem::path export_csv(const EstimatorSeries& e, const std::filesystem::path& dir, int digits = 20) {
  std::filesystem::create_directories(dir);
  std::filesystem::path p = dir / (e.kind + ".csv");
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << "n,abscissa,value\n";
  for (std::size_t i = 0; i < e.size(); ++i)
    out << e.n[i] << ',' << to_sci(abscissa_value(e.abscissa, e.n[i]), digits) << ',' << to_sci(e.values[i], digits)
        << '\n';
  return p;
}

struct EstimatorBundle {
  std::vector<EstimatorSeries> series;
};

/// Every plot track for a series, given mu, alpha and a beta hypothesis.
inline EstimatorBundle all_estimators(const NumericSeries& s, const Real& mu, const Real& alpha, const Real& beta) {
  EstimatorBundle b;
  EstimatorSeries r = ratios(s);
  EstimatorSeries l = linear_intercepts(r);
  b.series.push_back(r);
  b.series.push_back(l);
  b.series.push_back(estimator_g(r, mu));
  b.series.push_back(estimator_g(r, mu, Abscissa::inv_log_n));
  b.series.push_back(beta_from_ratios(r, mu, alpha));
  b.series.push_back(beta_from_intercepts(l, mu));
  if (s.values.size() >= 8) {
    WindowedFit fc = windowed_fit_coeffs(s, mu, 5);
    b.series.push_back(fc.track(1, "t2", Abscissa::inv_n));
    b.series.push_back(fc.track(2, "t3", Abscissa::inv_log_n));
    WindowedFit fa = windowed_fit_coeffs(s, mu, 5, alpha);
    b.series.push_back(fa.track(1, "beta_fixed_alpha", Abscissa::inv_n_log_n));
    WindowedFit fr = windowed_fit_ratios(r, mu, 4);
    b.series.push_back(fr.track(0, "t1r", Abscissa::inv_n));
    b.series.push_back(fr.track(1, "t2r", Abscissa::inv_log_n));
    WindowedFit fe = amplitude_fit(s, mu, alpha, beta);
    b.series.push_back(fe.track(0, "e1", Abscissa::inv_n));
  }
  b.series.push_back(normalized_ratio_estimator(s, mu, alpha));
  return b;
}

}  // namespace stacksort::asym
