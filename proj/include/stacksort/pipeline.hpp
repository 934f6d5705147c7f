#pragma once

// Analysis steps shared by the command-line tool and the acceptance run:
// ensemble scans on series prefixes, singularity clusters and extension.

#include <algorithm>
#include <chrono>
#include <string>
#include <vector>

#include "stacksort/diffapprox/ensemble.hpp"
#include "stacksort/series_core.hpp"

namespace stacksort::pipeline {

using da::Complex;

/// 1, w_1, w_2, ...: the generating function including its constant term.
inline std::vector<BigInt> with_constant_term(const CoefficientSeries& s) {
  std::vector<BigInt> f{BigInt(1)};
  f.insert(f.end(), s.coeffs.begin(), s.coeffs.end());
  return f;
}

/// The first `terms` coefficients f_0..f_{terms-1} of 1 + W.
inline da::SeriesPrefix series_prefix(const CoefficientSeries& s, std::size_t terms) {
  std::vector<BigInt> f = with_constant_term(s);
  if (terms > f.size())
    throw std::out_of_range("prefix of " + std::to_string(terms) + " terms needs N >= " + std::to_string(terms - 1));
  f.resize(terms);
  return da::SeriesPrefix::from_integers(f);
}

struct ScanConfig {
  int order = 3;
  unsigned threads = 1;
  unsigned min_digits = 50;
  std::size_t max_members = 24;
  double min_fraction = 0.9;
  double cluster_tolerance = 1e-6;
  bool positive_axis = true;
};

struct ScanResult {
  std::vector<da::ApproximantSpec> family;
  da::EnsembleStats stats;
  double seconds = 0;
};

inline ScanResult scan(const da::SeriesPrefix& f, const ScanConfig& c) {
  auto t0 = std::chrono::steady_clock::now();
  da::FamilyOptions fo;
  fo.max_members = c.max_members;
  fo.min_fraction = c.min_fraction;
  ScanResult r;
  r.family = da::default_family(c.order, f.size(), fo);
  da::EnsembleOptions eo;
  eo.threads = c.threads;
  eo.min_digits = c.min_digits;
  eo.cluster_tolerance = c.cluster_tolerance;
  if (c.positive_axis) eo.candidate = [](const Complex& z) { return z.re > 0; };
  r.stats = da::ensemble_scan(f, r.family, eo);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

struct Cluster {
  Complex location;
  std::size_t support = 0;
};

/// Roots of all fitted members grouped greedily by modulus within a
/// relative tolerance; groups met by at least min_support members, nearest
/// the origin first.
inline std::vector<Cluster> clusters(const da::EnsembleStats& st, double rel_tol, std::size_t min_support,
                                     std::size_t max_count = 8) {
  std::vector<Complex> roots;
  for (const auto& m : st.members)
    for (const auto& s : m.singularities) roots.push_back(s.location);
  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) { return abs(a) < abs(b); });
  std::vector<Cluster> out;
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size() && out.size() < max_count; ++i) {
    if (used[i]) continue;
    const Complex c = roots[i];
    for (std::size_t j = i; j < roots.size(); ++j)
      if (!used[j] && abs(roots[j] - c) <= Real(rel_tol) * abs(c)) used[j] = true;
    const std::size_t support = st.support_near(c, rel_tol);
    if (support >= min_support) out.push_back({c, support});
  }
  return out;
}

struct ExtendConfig {
  int order = 4;
  std::size_t target_n = 0;      // last index to produce
  double digit_threshold = 5;
  unsigned threads = 1;
  unsigned min_digits = 60;
  std::size_t max_members = 24;
  double min_fraction = 0.9;
};

/// Continues W from all of its exact terms up to w_{target_n}.
inline da::ExtensionResult extend(const CoefficientSeries& s, const ExtendConfig& c) {
  da::SeriesPrefix f = series_prefix(s, s.size() + 1);
  da::FamilyOptions fo;
  fo.max_members = c.max_members;
  fo.min_fraction = c.min_fraction;
  auto family = da::default_family(c.order, f.size(), fo);
  da::ExtensionOptions eo;
  eo.threads = c.threads;
  eo.min_digits = c.min_digits;
  return da::extend_series(f, family, c.target_n + 1, c.digit_threshold, eo);
}

}  // namespace stacksort::pipeline
