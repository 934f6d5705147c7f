#pragma once

// Families of approximants: dominant-singularity statistics and series
// extension with ensemble error bars.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "stacksort/diffapprox/approximant.hpp"

namespace stacksort::da {

class EnsembleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FamilyOptions {
  int max_spread = 2;         // |deg Q_k - deg Q_j| <= max_spread
  int min_p_degree = 0;
  int max_p_degree = 2;
  double min_fraction = 0.9;  // of the available prefix
  std::size_t max_members = 24;
};

/// Degree vectors with bounded spread and inhomogeneous degree in range whose
/// square systems use between min_fraction * terms and terms coefficients.
/// When the family is larger than max_members an evenly spaced, deterministic
/// subset is returned.
inline std::vector<ApproximantSpec> default_family(int order, std::size_t terms, const FamilyOptions& opt = {}) {
  std::vector<ApproximantSpec> all;
  const int width = opt.max_spread + 1;
  int combos = 1;
  for (int k = 0; k <= order; ++k) combos *= width;
  const auto lo = static_cast<std::size_t>(std::ceil(opt.min_fraction * static_cast<double>(terms)));
  for (int pd = opt.min_p_degree; pd <= opt.max_p_degree; ++pd) {
    for (int code = 0; code < combos; ++code) {
      std::vector<int> off;
      int c = code;
      for (int k = 0; k <= order; ++k) {
        off.push_back(c % width);
        c /= width;
      }
      if (*std::min_element(off.begin(), off.end()) != 0) continue;
      for (int base = 0;; ++base) {
        ApproximantSpec s;
        s.order = order;
        s.p_degree = pd;
        for (int o : off) s.q_degrees.push_back(base + o);
        const std::size_t need = s.terms_needed();
        if (need > terms) break;
        if (need >= lo) all.push_back(std::move(s));
      }
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const ApproximantSpec& a, const ApproximantSpec& b) {
    return a.terms_needed() > b.terms_needed();
  });
  if (all.size() <= opt.max_members || opt.max_members == 0) return all;
  std::vector<ApproximantSpec> pick;
  for (std::size_t i = 0; i < opt.max_members; ++i) pick.push_back(all[i * all.size() / opt.max_members]);
  return pick;
}

/// Working precision that keeps the float fit of `spec` stable: the
/// monomial systems lose roughly half a digit per unknown.
inline unsigned recommended_fit_digits(const ApproximantSpec& spec) {
  return static_cast<unsigned>(spec.unknowns() / 2 + 60);
}

struct MemberResult {
  ApproximantSpec spec;
  std::optional<HolonomicApproximant> approximant;
  std::vector<SingularityEstimate> singularities;
  std::string error;  // empty on success
};

struct EnsembleStats {
  std::vector<MemberResult> members;
  std::size_t fitted = 0;
  Complex dominant;                 // cluster centre used for selection
  std::vector<std::size_t> chosen;  // member index per accepted estimate
  std::vector<Real> locations;      // real parts of accepted estimates
  std::vector<Real> exponents;
  Real location_mean = 0;
  Real location_stddev = 0;
  Real exponent_mean = 0;
  Real exponent_stddev = 0;
  std::size_t rejected = 0;
  double tolerance_used = 0;

  /// Fitted members having a root within rel_tol of `z`.
  std::size_t support_near(const Complex& z, double rel_tol) const {
    std::size_t n = 0;
    for (const auto& m : members) {
      for (const auto& s : m.singularities) {
        if (abs(s.location - z) <= Real(rel_tol) * abs(z)) {
          ++n;
          break;
        }
      }
    }
    return n;
  }
};

struct EnsembleOptions {
  unsigned threads = 1;
  unsigned min_digits = 50;     // floor for the working precision
  double cluster_tolerance = 1e-6;
  int refine_levels = 4;  // tenfold narrowings of the window
  double presence = 0.8;
  double mad_cut = 3.0;
  std::size_t min_members = 10;
  /// Optional restriction of candidate roots (e.g. to the positive axis).
  std::function<bool(const Complex&)> candidate;
};

namespace detail {

inline Real median(std::vector<Real> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : Real((v[n / 2 - 1] + v[n / 2]) / 2);
}

/// Indices of values within cut * 1.4826 * MAD of the median. A zero MAD
/// keeps values equal to the median up to the working epsilon.
inline std::vector<std::size_t> mad_keep(const std::vector<Real>& v, double cut) {
  if (v.empty()) return {};
  Real med = median(v);
  std::vector<Real> dev;
  for (const auto& x : v) dev.push_back(abs(x - med));
  Real mad = median(dev) * Real(1.4826);
  Real floor = abs(med) * pow(Real(10), -static_cast<int>(working_digits()) + 10);
  Real lim = std::max<Real>(mad * Real(cut), floor);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (dev[i] <= lim) keep.push_back(i);
  return keep;
}

inline std::pair<Real, Real> mean_stddev(const std::vector<Real>& v) {
  if (v.empty()) return {Real(0), Real(0)};
  Real s = 0;
  for (const auto& x : v) s += x;
  Real mean = s / Real(static_cast<long>(v.size()));
  if (v.size() < 2) return {mean, Real(0)};
  Real q = 0;
  for (const auto& x : v) q += (x - mean) * (x - mean);
  return {mean, sqrt(q / Real(static_cast<long>(v.size() - 1)))};
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline unsigned family_digits(const std::vector<ApproximantSpec>& family, unsigned floor) {
  unsigned d = floor;
  for (const auto& s : family) d = std::max(d, recommended_fit_digits(s));
  return d;
}

}  // namespace detail

/// Fits every member and locates its singularities. Failures are recorded
/// per member and never abort the scan.
inline std::vector<MemberResult> fit_family(const SeriesPrefix& f, const std::vector<ApproximantSpec>& family,
                                            unsigned threads, const FitOptions& fit = {}) {
  std::vector<MemberResult> out(family.size());
  detail::parallel_for(family.size(), threads, [&](std::size_t i) {
    MemberResult& r = out[i];
    r.spec = family[i];
    try {
      r.approximant = fit_approximant(f.prefix(family[i].terms_needed()), family[i], fit);
      r.singularities = find_singularities(*r.approximant);
    } catch (const std::exception& e) {
      r.approximant.reset();
      r.error = e.what();
    }
  });
  return out;
}

/// Dominant singularity statistics over a family. The dominant singularity is
/// the root nearest the origin that occurs (within the cluster tolerance) in
/// at least `presence` of the fitted members. Throws EnsembleError when the
/// family is too small or no such cluster exists.
inline EnsembleStats ensemble_scan(const SeriesPrefix& f, const std::vector<ApproximantSpec>& family,
                                   const EnsembleOptions& opt = {}) {
  if (family.size() < opt.min_members)
    throw EnsembleError("ensemble needs at least " + std::to_string(opt.min_members) + " specs, got " +
                        std::to_string(family.size()));
  PrecisionScope scope(detail::family_digits(family, opt.min_digits));
  EnsembleStats st;
  st.members = fit_family(f, family, opt.threads);
  for (const auto& m : st.members)
    if (m.approximant) ++st.fitted;
  if (st.fitted == 0) throw EnsembleError("no member of the family could be fitted");

  const auto need = static_cast<std::size_t>(std::ceil(opt.presence * static_cast<double>(st.fitted)));
  auto accept = [&](const SingularityEstimate& s) { return !opt.candidate || opt.candidate(s.location); };

  // Candidate centres in order of modulus.
  std::vector<Complex> candidates;
  for (const auto& m : st.members)
    for (const auto& s : m.singularities)
      if (accept(s)) candidates.push_back(s.location);
  std::sort(candidates.begin(), candidates.end(),
            [](const Complex& a, const Complex& b) { return abs(a) < abs(b); });

  auto nearest_common = [&](double t) -> std::optional<Complex> {
    for (const auto& c : candidates)
      if (st.support_near(c, t) >= need) return c;
    return std::nullopt;
  };
  std::optional<Complex> centre = nearest_common(opt.cluster_tolerance);
  // Several roots of each member may fall inside one tolerance window. The
  // window is narrowed while a common root survives, which singles out the
  // root whose position is consistent across the family.
  double used_tol = opt.cluster_tolerance;
  for (int level = 0; centre && level < opt.refine_levels; ++level) {
    auto finer = nearest_common(used_tol / 10);
    if (!finer) break;
    centre = finer;
    used_tol /= 10;
  }
  st.tolerance_used = used_tol;
  const Real tol(used_tol);
  if (!centre) {
    std::string msg = "no singularity common to " + std::to_string(need) + " of " + std::to_string(st.fitted) +
                      " approximants; nearest candidates:";
    for (std::size_t i = 0; i < std::min<std::size_t>(candidates.size(), 5); ++i)
      msg += " " + to_sci(candidates[i].re, 12) + (candidates[i].im != 0 ? "+" + to_sci(candidates[i].im, 3) + "i" : "");
    throw EnsembleError(msg);
  }

  // Each member contributes its root nearest the centre; the centre is then
  // moved to the median and the selection repeated once.
  for (int pass = 0; pass < 2; ++pass) {
    st.chosen.clear();
    st.locations.clear();
    st.exponents.clear();
    std::vector<Real> ims;
    for (std::size_t i = 0; i < st.members.size(); ++i) {
      const SingularityEstimate* best = nullptr;
      for (const auto& s : st.members[i].singularities) {
        if (!accept(s) || abs(s.location - *centre) > tol * abs(*centre)) continue;
        if (!best || abs(s.location - *centre) < abs(best->location - *centre)) best = &s;
      }
      if (!best) continue;
      st.chosen.push_back(i);
      st.locations.push_back(best->location.re);
      st.exponents.push_back(best->exponent.re);
      ims.push_back(best->location.im);
    }
    centre = Complex(detail::median(st.locations), detail::median(ims));
  }
  st.dominant = *centre;

  auto keep = detail::mad_keep(st.locations, opt.mad_cut);
  std::vector<Real> loc;
  std::vector<Real> ex;
  for (auto i : keep) {
    loc.push_back(st.locations[i]);
    ex.push_back(st.exponents[i]);
  }
  st.rejected = st.locations.size() - keep.size();
  std::tie(st.location_mean, st.location_stddev) = detail::mean_stddev(loc);
  auto keep_ex = detail::mad_keep(ex, opt.mad_cut);
  std::vector<Real> ex2;
  for (auto i : keep_ex) ex2.push_back(ex[i]);
  std::tie(st.exponent_mean, st.exponent_stddev) = detail::mean_stddev(ex2);
  return st;
}

struct ExtensionResult {
  std::size_t exact_terms = 0;       // coefficients copied from the input
  std::vector<Real> coefficients;    // f_{exact_terms}, f_{exact_terms+1}, ...
  std::vector<Real> stddev;
  std::vector<double> declared_digits;
  std::size_t members_used = 0;
  std::vector<std::string> discarded;  // spec label and reason
};

struct ExtensionOptions {
  unsigned threads = 1;
  unsigned min_digits = 60;
  double mad_cut = 3.0;
  /// A member is discarded when |sum_k q_{k,0} n^k| falls below this
  /// fraction of sum_k |q_{k,0}| n^k for some needed n.
  double lead_tolerance = 1e-30;
};

/// Extends f (coefficients f_0..f_{L-1}) to index target_n - 1 by averaging
/// the recurrences of all usable members. Stops early at the first index
/// whose declared accuracy is below digit_threshold.
inline ExtensionResult extend_series(const SeriesPrefix& f, const std::vector<ApproximantSpec>& family,
                                     std::size_t target_n, double digit_threshold,
                                     const ExtensionOptions& opt = {}) {
  PrecisionScope scope(detail::family_digits(family, opt.min_digits));
  auto members = fit_family(f, family, opt.threads);
  ExtensionResult res;
  res.exact_terms = f.size();
  std::vector<std::vector<Real>> runs;
  for (const auto& m : members) {
    if (!m.approximant) {
      res.discarded.push_back(m.spec.label() + ": " + m.error);
      continue;
    }
    const auto& ap = *m.approximant;
    bool ok = true;
    for (std::size_t n = f.size(); n < target_n && ok; ++n) {
      Real lead = 0;
      Real mag = 0;
      for (int k = 0; k <= ap.spec.order; ++k) {
        Real term = ap.q[static_cast<std::size_t>(k)][0] * pow(Real(static_cast<long>(n)), k);
        lead += term;
        mag += abs(term);
      }
      if (abs(lead) <= Real(opt.lead_tolerance) * mag) {
        res.discarded.push_back(m.spec.label() + ": leading recurrence factor vanishes at n=" + std::to_string(n));
        ok = false;
      }
    }
    if (!ok) continue;
    runs.push_back(extend_with(ap, f, target_n));
  }
  if (runs.empty()) throw EnsembleError("no ensemble member survived for extension");
  res.members_used = runs.size();
  const Real max_digits(static_cast<long>(working_digits()));
  for (std::size_t n = f.size(); n < target_n; ++n) {
    std::vector<Real> v;
    for (const auto& r : runs) v.push_back(r[n]);
    auto keep = detail::mad_keep(v, opt.mad_cut);
    std::vector<Real> kept;
    for (auto i : keep) kept.push_back(v[i]);
    auto [mean, sd] = detail::mean_stddev(kept);
    double digits = mean == 0 ? 0.0
                    : sd == 0 ? static_cast<double>(max_digits)
                              : static_cast<double>(std::min<Real>(max_digits, Real(-log10(sd / abs(mean)))));
    if (digits < digit_threshold) break;
    res.coefficients.push_back(mean);
    res.stddev.push_back(sd);
    res.declared_digits.push_back(digits);
  }
  return res;
}

}  // namespace stacksort::da
