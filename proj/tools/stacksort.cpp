// stacksort: compute, verify and analyze the 3-stack-sortable counting
// sequence from the command line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "stacksort/asymptotics.hpp"
#include "stacksort/bounds.hpp"
#include "stacksort/compute.hpp"
#include "stacksort/diffapprox/test_series.hpp"
#include "stacksort/io.hpp"
#include "stacksort/oracle/decomposition.hpp"
#include "stacksort/oracle/permutation.hpp"
#include "stacksort/oracle/trivariate.hpp"
#include "stacksort/pipeline.hpp"

namespace fs = std::filesystem;
using namespace stacksort;
using io::Json;

namespace {

constexpr int kExitCertification = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitResource = 4;

struct Globals {
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  unsigned precision = 60;
};

void write_command_manifest(const fs::path& out, const std::string& command, const Json& config, const Globals& g,
                            const Json& results) {
  Json j;
  j["tool"] = "stacksort";
  j["tool_version"] = io::kToolVersion;
  j["command"] = command;
  j["config"] = config;
  j["config_hash"] = io::config_hash(config);
  j["threads"] = g.threads;
  j["precision_digits"] = g.precision;
  j["results"] = results;
  io::write_manifest(out / (command + "-manifest.json"), j);
}

// Input series: a coefficient file or a named test series.

struct InputSeries {
  std::string label;
  Provenance provenance = Provenance::exact_uncertified;
  da::SeriesPrefix f;                      // f_0, f_1, ...
  std::optional<CoefficientSeries> exact;  // w_1.. when the file is exact
};

InputSeries load_input(const std::string& path, const std::string& series, std::size_t terms) {
  InputSeries in;
  if (!series.empty()) {
    in.label = series;
    in.provenance = Provenance::exact_certified;
    in.f = da::SeriesPrefix::from_rationals(da::make_test_series(series, terms));
    return in;
  }
  if (path.empty()) throw CLI::ValidationError("give --coefficients FILE or --series NAME");
  io::SeriesFile file = io::read_coefficients(path);
  in.label = fs::path(path).filename().string();
  in.provenance = file.provenance;
  if (file.is_exact()) {
    in.exact = file.series();
    in.f = pipeline::series_prefix(*in.exact, in.exact->size() + 1);
  } else {
    std::vector<Real> v{Real(1)};
    for (const auto& x : file.approx) v.push_back(x);
    in.f = da::SeriesPrefix::from_reals(std::move(v));
  }
  return in;
}

asym::NumericSeries tail_values(const da::SeriesPrefix& f) {
  asym::NumericSeries s;
  s.first_n = 1;
  s.values.assign(f.values.begin() + 1, f.values.end());
  return s;
}

std::vector<std::size_t> write_estimators(const asym::NumericSeries& s, const Real& mu, const Real& alpha,
                                          const Real& beta, const fs::path& dir, int digits, Json& files) {
  std::vector<std::size_t> sizes;
  asym::EstimatorBundle b = asym::all_estimators(s, mu, alpha, beta);
  for (const auto& e : b.series) {
    fs::path p = asym::export_csv(e, dir, digits);
    files.push_back(p.filename().string());
    sizes.push_back(e.size());
  }
  return sizes;
}

// compute

int cmd_compute(RunConfig c, const Globals& g) {
  c.threads = g.threads;
  c.precision_digits = g.precision;
  ComputeResult r = run_compute(c, [](const std::string& m) { std::cerr << m << '\n'; });
  const fs::path file = coefficient_path(c);
  io::write_coefficients(file, r.series);
  io::write_manifest(c.output_dir / "compute-manifest.json", compute_manifest(c, r));
  std::cout << "wrote " << file.string() << " (" << to_string(r.series.provenance) << ", "
            << r.plan.primes.size() << " primes, " << r.wall_seconds << " s)\n";
  if (!r.report.passed) {
    std::cerr << "certification failed: log10 margin " << r.report.log10_margin
              << "; rerun with more primes (--primes) or a larger --max-topups\n";
    return kExitCertification;
  }
  return 0;
}

// verify

struct VerifyConfig {
  int max_n = 8;
  int order = 7;
  bool quick = false;
  std::string coefficients;
  fs::path out = "out";
};

struct CheckRow {
  CheckRow(std::string n, bool p = true, std::string d = {}) : name(std::move(n)), pass(p), detail(std::move(d)) {}
  std::string name;
  bool pass;
  std::string detail;
};

std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

std::vector<CheckRow> oracle_checks(int max_n, int order) {
  std::vector<CheckRow> rows;
  using namespace oracle;

  {
    CheckRow r{"modular series equals brute force W3(n), n<=" + std::to_string(max_n)};
    std::vector<std::uint32_t> mod = compute_series_mod_p(static_cast<std::size_t>(max_n), generate_primes(1)[0]);
    for (int n = 1; n <= max_n && r.pass; ++n) {
      const std::uint64_t b = count_sortable(n, 3);
      if (b != mod[static_cast<std::size_t>(n) - 1]) {
        r.pass = false;
        r.detail = "n=" + std::to_string(n) + ": brute " + std::to_string(b) + " modular " +
                   std::to_string(mod[static_cast<std::size_t>(n) - 1]);
      }
    }
    rows.push_back(r);
  }
  const int pre_n = std::min(max_n, 7);
  {
    CheckRow r{"preimage counts sum to n!, n<=" + std::to_string(pre_n)};
    for (int n = 1; n <= pre_n && r.pass; ++n) {
      std::uint64_t s = 0;
      for (auto c : preimage_table(n)) s += c;
      if (s != factorial(n)) {
        r.pass = false;
        r.detail = "n=" + std::to_string(n) + ": sum " + std::to_string(s);
      }
    }
    rows.push_back(r);
  }
  {
    CheckRow r{"two-pass sortability check, n<=" + std::to_string(std::min(max_n, 8))};
    for (int n = 1; n <= std::min(max_n, 8) && r.pass; ++n) {
      for_each_permutation(n, [&](const Perm& p) {
        if (r.pass && west_check(p) != is_k_stack_sortable(p, 2)) {
          r.pass = false;
          r.detail = "fails at " + to_string(p);
        }
      });
    }
    rows.push_back(r);
  }
  const int dec_n = std::min(max_n, 6);
  {
    CheckRow r{"decomposition lemma equals brute force on S" + std::to_string(dec_n)};
    std::vector<std::uint64_t> t = preimage_table(dec_n);
    DecompositionCounter dc;
    std::size_t rank = 0;
    for_each_permutation(dec_n, [&](const Perm& p) {
      const std::uint64_t brute = t[rank++];
      if (!r.pass) return;
      if (dc.count(p) != brute) {
        r.pass = false;
        r.detail = "fails at " + to_string(p);
        return;
      }
      if (is_identity(p)) return;
      for (int d : tail_bound_descents(p)) {
        if (preimage_count_decomposition(p, d) != brute) {
          r.pass = false;
          r.detail = "fails at " + to_string(p) + " descent " + std::to_string(d);
          return;
        }
      }
    });
    rows.push_back(r);
  }
  {
    TruncatedTrivariateSeries J = compute_J_truncated(order);
    FunctionalEquationReport fe = verify_functional_equation(J);
    rows.push_back({"functional equation for J to order " + std::to_string(order), fe.holds, fe.message});
    CheckRow r{"J(t,1,1) equals the series to order " + std::to_string(order)};
    std::vector<BigInt> sums = J.at_one_one();
    CoefficientSeries ref = reference_compute_exact(static_cast<std::size_t>(order));
    for (int n = 1; n <= order && r.pass; ++n) {
      if (sums[static_cast<std::size_t>(n)] != ref.at(static_cast<std::size_t>(n))) {
        r.pass = false;
        r.detail = "n=" + std::to_string(n);
      }
    }
    rows.push_back(r);
  }
  {
    const int qn = std::min(order, 6);
    QChainReport q = verify_q_chain(qn);
    std::string d;
    if (!q.q1_closed_form) d += " Q1";
    if (!q.q2_closed_form) d += " Q2";
    if (!q.matches_recurrence) d += " recurrence";
    if (!q.constant_terms_match) d += " Q(t,0,0)";
    rows.push_back({"J to Q chain to order " + std::to_string(qn), q.ok(), d.empty() ? "" : "mismatch:" + d});
  }
  return rows;
}

std::vector<CheckRow> file_checks(const std::string& path, int max_n) {
  std::vector<CheckRow> rows;
  io::SeriesFile file;
  try {
    file = io::read_coefficients(path);
  } catch (const io::FormatError& e) {
    rows.push_back({"coefficient file is well formed", false, e.what()});
    return rows;
  }
  if (!file.is_exact()) {
    rows.push_back({"coefficient file is exact", false, "provenance " + to_string(file.provenance)});
    return rows;
  }
  const CoefficientSeries s = file.series();
  {
    CheckRow r{"file equals brute force for n<=" + std::to_string(std::min<std::size_t>(max_n, s.size()))};
    for (std::size_t n = 1; n <= std::min<std::size_t>(max_n, s.size()) && r.pass; ++n) {
      if (s.at(n) != oracle::count_sortable(static_cast<int>(n), 3)) {
        r.pass = false;
        r.detail = "mismatch at n=" + std::to_string(n);
      }
    }
    rows.push_back(r);
  }
  {
    const std::size_t m = std::min<std::size_t>(40, s.size());
    CheckRow r{"file equals exact reference for n<=" + std::to_string(m)};
    CoefficientSeries ref = reference_compute_exact(m);
    for (std::size_t n = 1; n <= m && r.pass; ++n) {
      if (s.at(n) != ref.at(n)) {
        r.pass = false;
        r.detail = "mismatch at n=" + std::to_string(n) + ": file " + s.at(n).str() + " reference " + ref.at(n).str();
      }
    }
    rows.push_back(r);
  }
  {
    CheckRow r{"coefficients positive and w_n <= n w_{n-1}"};
    for (std::size_t n = 1; n <= s.size() && r.pass; ++n) {
      if (s.at(n) <= 0 || (n > 1 && s.at(n) > BigInt(static_cast<unsigned long>(n)) * s.at(n - 1))) {
        r.pass = false;
        r.detail = "fails at n=" + std::to_string(n);
      }
    }
    rows.push_back(r);
  }
  bounds::BonaReport b = bounds::bona_checks(s);
  rows.push_back({"log-convexity", b.log_convex,
                  b.first_convexity_violation ? "fails at n=" + std::to_string(*b.first_convexity_violation) : ""});
  rows.push_back({"w_n <= C(4n,n)", b.binomial_ok,
                  b.first_binomial_violation ? "fails at n=" + std::to_string(*b.first_binomial_violation) : ""});
  auto mono = bounds::root_bound_monotonicity_violation(s);
  rows.push_back({"w_n^(1/n) non-decreasing", !mono, mono ? "fails at n=" + std::to_string(*mono) : ""});
  {
    CheckRow r{"indecomposable coefficients non-negative"};
    auto p = bounds::indecomposable_coefficients(s.coeffs);
    for (std::size_t i = 0; i < p.size() && r.pass; ++i) {
      if (p[i] < 0) {
        r.pass = false;
        r.detail = "negative at n=" + std::to_string(i + 1);
      }
    }
    rows.push_back(r);
  }
  return rows;
}

int cmd_verify(VerifyConfig c, const Globals& g) {
  if (c.quick) {
    c.max_n = std::min(c.max_n, 4);
    c.order = std::min(c.order, 4);
  }
  if (c.max_n < 1 || c.order < 1) throw CLI::ValidationError("--max-n and --order must be >= 1");
  std::vector<CheckRow> rows = oracle_checks(c.max_n, c.order);
  if (!c.coefficients.empty()) {
    auto more = file_checks(c.coefficients, c.max_n);
    rows.insert(rows.end(), more.begin(), more.end());
  }
  bool ok = true;
  Json results = Json::array();
  for (const auto& r : rows) {
    ok &= r.pass;
    std::cout << (r.pass ? "PASS  " : "FAIL  ") << r.name;
    if (!r.detail.empty()) std::cout << "  [" << r.detail << "]";
    std::cout << '\n';
    results.push_back({{"check", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  }
  std::cout << (ok ? "all checks passed" : "some checks FAILED") << '\n';
  Json cfg{{"max_n", c.max_n}, {"order", c.order}, {"coefficients", c.coefficients}};
  write_command_manifest(c.out, "verify", cfg, g, results);
  return ok ? 0 : kExitInvariant;
}

// analyze

struct AnalyzeConfig {
  std::string coefficients;
  std::string series;
  std::size_t terms = 100;
  std::vector<int> orders{2, 3, 4};
  std::vector<std::size_t> prefixes;
  std::size_t max_members = 24;
  double min_fraction = 0.9;
  double cluster_tolerance = 1e-6;
  double beta = 0;
  int digits = 20;
  fs::path out = "out";
};

int cmd_analyze(const AnalyzeConfig& c, const Globals& g) {
  InputSeries in = load_input(c.coefficients, c.series, c.terms);
  std::vector<std::size_t> prefixes = c.prefixes;
  if (prefixes.empty()) prefixes.push_back(in.f.size());
  for (std::size_t p : prefixes)
    if (p > in.f.size() || p < 4)
      throw std::invalid_argument("prefix of " + std::to_string(p) + " terms is outside the series (" +
                                  std::to_string(in.f.size()) + " terms including f_0)");
  fs::create_directories(c.out);

  std::ostringstream table;
  table << "order,terms,fitted,location,location_stddev,exponent,exponent_stddev,status\n";
  Json rows = Json::array();
  std::optional<pipeline::ScanResult> best;
  std::size_t best_terms = 0;
  int best_order = 0;
  std::cout << "order  terms  fitted  x_c                          exponent\n";
  for (std::size_t p : prefixes) {
    for (int order : c.orders) {
      pipeline::ScanConfig sc;
      sc.order = order;
      sc.threads = g.threads;
      sc.min_digits = g.precision;
      sc.max_members = c.max_members;
      sc.min_fraction = c.min_fraction;
      sc.cluster_tolerance = c.cluster_tolerance;
      try {
        pipeline::ScanResult r = pipeline::scan(in.f.prefix(p), sc);
        const auto& st = r.stats;
        table << order << ',' << p << ',' << st.fitted << ',' << to_sci(st.location_mean, c.digits) << ','
              << to_sci(st.location_stddev, 6) << ',' << to_sci(st.exponent_mean, c.digits) << ','
              << to_sci(st.exponent_stddev, 6) << ",ok\n";
        std::cout << order << "      " << p << "    " << st.fitted << "      " << to_sci(st.location_mean, 12)
                  << " +- " << to_sci(st.location_stddev, 2) << "  " << to_sci(st.exponent_mean, 6) << " +- "
                  << to_sci(st.exponent_stddev, 2) << '\n';
        rows.push_back({{"order", order},
                        {"terms", p},
                        {"fitted", st.fitted},
                        {"location", to_sci(st.location_mean, c.digits)},
                        {"location_stddev", to_sci(st.location_stddev, 6)},
                        {"exponent", to_sci(st.exponent_mean, c.digits)},
                        {"exponent_stddev", to_sci(st.exponent_stddev, 6)}});
        if (!best || p > best_terms || (p == best_terms && order > best_order)) {
          best = std::move(r);
          best_terms = p;
          best_order = order;
        }
      } catch (const std::exception& e) {
        table << order << ',' << p << ",0,,,,," << "failed\n";
        std::cout << order << "      " << p << "    failed: " << e.what() << '\n';
        rows.push_back({{"order", order}, {"terms", p}, {"error", e.what()}});
      }
    }
  }
  io::atomic_write(c.out / "singularities.csv", table.str());
  if (!best) {
    std::cerr << "no order/prefix combination produced an estimate; the series is too short for the requested orders\n";
    return 1;
  }

  const auto& st = best->stats;
  const Real mu = 1 / st.location_mean;
  const Real alpha = st.exponent_mean;
  std::cout << "summary (order " << best_order << ", " << best_terms << " terms): x_c = " << to_sci(st.location_mean, 15)
            << " +- " << to_sci(st.location_stddev, 3) << ", mu = " << to_sci(mu, 12) << ", alpha = "
            << to_sci(alpha, 8) << " +- " << to_sci(st.exponent_stddev, 3) << '\n';

  std::vector<const da::HolonomicApproximant*> aps;
  for (const auto& m : st.members)
    if (m.approximant) aps.push_back(&*m.approximant);
  io::write_approximant_archive(c.out / "approximants.txt", aps);

  Json files = Json::array();
  try {
    write_estimators(tail_values(in.f), mu, alpha, Real(c.beta), c.out / "estimators", c.digits, files);
  } catch (const std::exception& e) {
    std::cerr << "estimator tracks skipped: " << e.what() << '\n';
  }

  Json results{{"input", in.label},
               {"provenance", to_string(in.provenance)},
               {"scans", rows},
               {"summary",
                {{"order", best_order},
                 {"terms", best_terms},
                 {"x_c", to_sci(st.location_mean, c.digits)},
                 {"x_c_stddev", to_sci(st.location_stddev, 6)},
                 {"mu", to_sci(mu, c.digits)},
                 {"alpha", to_sci(alpha, c.digits)},
                 {"alpha_stddev", to_sci(st.exponent_stddev, 6)}}},
               {"estimator_files", files}};
  Json cfg{{"coefficients", c.coefficients}, {"series", c.series},     {"terms", c.terms},
           {"orders", c.orders},             {"prefixes", prefixes},   {"max_members", c.max_members},
           {"min_fraction", c.min_fraction}, {"cluster_tolerance", c.cluster_tolerance},
           {"beta", c.beta},                 {"digits", c.digits},     {"precision", g.precision}};
  write_command_manifest(c.out, "analyze", cfg, g, results);
  return 0;
}

// extend

struct ExtendCliConfig {
  std::string coefficients;
  std::string series;
  std::size_t terms = 60;
  std::size_t target = 0;
  int order = 4;
  double digits_threshold = 5;
  std::size_t max_members = 24;
  double min_fraction = 0.9;
  fs::path out = "out";
};

int cmd_extend(const ExtendCliConfig& c, const Globals& g) {
  InputSeries in = load_input(c.coefficients, c.series, c.terms);
  if (!in.exact && c.series.empty()) throw io::FormatError("extend needs an exact coefficient file");
  const std::size_t have = in.f.size() - 1;
  if (c.target <= have) throw std::invalid_argument("--target must exceed the " + std::to_string(have) + " known terms");

  da::FamilyOptions fo;
  fo.max_members = c.max_members;
  fo.min_fraction = c.min_fraction;
  auto family = da::default_family(c.order, in.f.size(), fo);
  da::ExtensionOptions eo;
  eo.threads = g.threads;
  eo.min_digits = g.precision;
  da::ExtensionResult ext = da::extend_series(in.f, family, c.target + 1, c.digits_threshold, eo);

  std::vector<BigInt> exact;
  if (in.exact) {
    exact = in.exact->coeffs;
  } else {
    for (std::size_t n = 1; n < in.f.size(); ++n) {
      const BigRational& q = (*in.f.exact)[n];
      if (boost::multiprecision::denominator(q) != 1) throw std::invalid_argument("test series is not integral");
      exact.push_back(boost::multiprecision::numerator(q));
    }
  }
  const fs::path file = c.out / ("w-ext-N" + std::to_string(c.target) + ".txt");
  io::write_extended(file, exact, ext.coefficients, ext.stddev, static_cast<int>(working_digits()));

  double worst = 1e300;
  for (double d : ext.declared_digits) worst = std::min(worst, d);
  std::cout << "wrote " << file.string() << " (approximate, " << ext.members_used << " members, worst declared digits "
            << worst << ")\n";
  Json discarded = ext.discarded;
  Json results{{"input", in.label},
               {"exact_terms", have},
               {"target", c.target},
               {"members_used", ext.members_used},
               {"worst_declared_digits", worst},
               {"discarded", discarded},
               {"provenance", "approximate"},
               {"file", file.filename().string()}};
  Json cfg{{"coefficients", c.coefficients},
           {"series", c.series},
           {"terms", c.terms},
           {"target", c.target},
           {"order", c.order},
           {"digits_threshold", c.digits_threshold},
           {"max_members", c.max_members},
           {"min_fraction", c.min_fraction},
           {"precision", g.precision}};
  write_command_manifest(c.out, "extend", cfg, g, results);
  return 0;
}

// bounds

struct BoundsConfig {
  std::string coefficients;
  std::size_t root_n = 0;
  std::size_t indecomposable_n = 0;
  fs::path out = "out";
};

CoefficientSeries rounded_series(const io::SeriesFile& f) {
  CoefficientSeries s{"approximate", {}, Provenance::approximate};
  for (const auto& v : f.approx) s.coeffs.push_back(round(v).convert_to<BigInt>());
  return s;
}

int cmd_bounds(const BoundsConfig& c, const Globals& g) {
  io::SeriesFile file = io::read_coefficients(c.coefficients);
  const CoefficientSeries s = file.is_exact() ? file.series() : rounded_series(file);
  if (s.size() == 0) throw io::FormatError("coefficient file has no rows");
  const std::size_t rn = c.root_n ? c.root_n : s.size();
  const std::size_t in = c.indecomposable_n ? c.indecomposable_n : s.size();
  bounds::BoundReport root = bounds::root_bound(s, rn);
  bounds::BoundReport ind = bounds::indecomposable_bound(s, in);
  bounds::BonaReport b = bounds::bona_checks(s, ind.certified ? std::optional<Real>(ind.bound_value) : std::nullopt);
  auto mono = bounds::root_bound_monotonicity_violation(s);

  std::cout << "root bound w_" << rn << "^(1/" << rn << ") = " << to_sci(root.bound_value, 12) << '\n';
  std::cout << "indecomposable bound (N=" << in << ") = " << to_sci(ind.bound_value, 12) << '\n';
  std::cout << "w_n <= C(4n,n): " << (b.binomial_ok ? "holds" : "VIOLATED") << '\n';
  std::cout << "log-convexity: " << (b.log_convex ? "holds" : "VIOLATED") << '\n';
  std::cout << "root bounds non-decreasing: " << (mono ? "VIOLATED" : "holds") << '\n';
  if (b.lower_bound)
    std::cout << "lower bound " << (b.asymptotic_conjecture_refuted ? "exceeds" : "does not exceed") << " 256/27\n";
  if (!root.warning.empty()) std::cout << "uncertified: " << root.warning << '\n';

  Json results{{"provenance", to_string(s.provenance)},
               {"certified", root.certified},
               {"warning", root.warning},
               {"root_bound", {{"n", rn}, {"value", to_sci(root.bound_value, 20)}}},
               {"indecomposable_bound",
                {{"n", in}, {"value", to_sci(ind.bound_value, 20)}, {"t_c", to_sci(*ind.t_c, 20)}}},
               {"binomial_ok", b.binomial_ok},
               {"log_convex", b.log_convex},
               {"root_monotone", !mono},
               {"exceeds_256_over_27", b.asymptotic_conjecture_refuted}};
  Json cfg{{"coefficients", c.coefficients}, {"root_n", rn}, {"indecomposable_n", in}};
  write_command_manifest(c.out, "bounds", cfg, g, results);
  return b.binomial_ok && b.log_convex && !mono ? 0 : kExitInvariant;
}

// export-plot

struct PlotConfig {
  std::string coefficients;
  std::string series;
  std::size_t terms = 100;
  std::optional<double> mu;
  std::optional<double> alpha;
  double beta = 0;
  int order = 3;
  double cluster_tolerance = 1e-6;
  int digits = 20;
  fs::path out = "out";
};

int cmd_export_plot(const PlotConfig& c, const Globals& g) {
  InputSeries in = load_input(c.coefficients, c.series, c.terms);
  Real mu, alpha;
  std::string source = "flags";
  if (c.mu && c.alpha) {
    mu = Real(*c.mu);
    alpha = Real(*c.alpha);
  } else {
    pipeline::ScanConfig sc;
    sc.order = c.order;
    sc.threads = g.threads;
    sc.min_digits = g.precision;
    sc.cluster_tolerance = c.cluster_tolerance;
    pipeline::ScanResult r = pipeline::scan(in.f, sc);
    mu = c.mu ? Real(*c.mu) : Real(1 / r.stats.location_mean);
    alpha = c.alpha ? Real(*c.alpha) : r.stats.exponent_mean;
    source = "ensemble order " + std::to_string(c.order);
  }
  Json files = Json::array();
  write_estimators(tail_values(in.f), mu, alpha, Real(c.beta), c.out / "plot", c.digits, files);
  std::cout << "wrote " << files.size() << " tracks to " << (c.out / "plot").string() << " (mu = " << to_sci(mu, 12)
            << ", alpha = " << to_sci(alpha, 8) << ")\n";
  Json results{{"input", in.label},
               {"mu", to_sci(mu, c.digits)},
               {"alpha", to_sci(alpha, c.digits)},
               {"parameters_from", source},
               {"files", files}};
  Json cfg{{"coefficients", c.coefficients}, {"series", c.series}, {"terms", c.terms},
           {"mu", c.mu ? Json(*c.mu) : Json(nullptr)}, {"alpha", c.alpha ? Json(*c.alpha) : Json(nullptr)},
           {"beta", c.beta}, {"order", c.order}, {"digits", c.digits}};
  write_command_manifest(c.out, "export-plot", cfg, g, results);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3-stack-sortable permutation counts: exact series, checks and asymptotic analysis"};
  app.set_version_flag("--version", io::kToolVersion);
  app.fallthrough();
  app.require_subcommand(1);

  Globals g;
  auto* threads_opt = app.add_option("--threads", g.threads, "worker threads")->envname("STACKSORT_THREADS")->check(CLI::PositiveNumber);
  auto* precision_opt = app.add_option("--precision", g.precision, "working precision in decimal digits")
      ->envname("STACKSORT_PRECISION")
      ->check(CLI::Range(30u, 100000u));

  RunConfig rc;
  std::size_t prime_count = 0;
  auto* compute = app.add_subcommand("compute", "exact coefficients w_1..w_N by multi-prime modular arithmetic");
  compute->add_option("--n", rc.n, "last index N")->required()->check(CLI::PositiveNumber);
  compute->add_option("--primes", prime_count, "number of primes (default: planned from the growth rate)");
  compute->add_option("--memory-budget", rc.memory_budget_bytes, "bytes available for grids, e.g. 8GB")
      ->transform(CLI::AsSizeValue(false));
  compute->add_option("--out", rc.output_dir, "output directory");
  compute->add_flag("--resume", rc.resume, "reuse per-prime checkpoints");
  compute->add_option("--safety-digits", rc.safety_digits, "extra decimal digits in the prime plan");
  compute->add_option("--max-topups", rc.max_topups, "prime top-up rounds after a failed certification");

  VerifyConfig vc;
  auto* verify = app.add_subcommand("verify", "run the oracle checks and optional file invariants");
  verify->add_option("--max-n", vc.max_n, "enumeration cap");
  verify->add_option("--order", vc.order, "order of the functional-equation check");
  verify->add_flag("--quick", vc.quick, "cap n at 4");
  verify->add_option("--coefficients", vc.coefficients, "coefficient file to check");
  verify->add_option("--out", vc.out, "output directory");

  AnalyzeConfig ac;
  auto* analyze = app.add_subcommand("analyze", "differential approximant scans and estimator tracks");
  analyze->add_option("--coefficients", ac.coefficients, "coefficient file");
  analyze->add_option("--series", ac.series, "test series: log-test, catalan or geometric");
  analyze->add_option("--terms", ac.terms, "terms of the test series including f_0");
  analyze->add_option("--orders", ac.orders, "approximant orders")->delimiter(',');
  analyze->add_option("--prefixes", ac.prefixes, "prefix lengths f_0..f_{L-1}")->delimiter(',');
  analyze->add_option("--max-members", ac.max_members, "members per ensemble");
  analyze->add_option("--min-fraction", ac.min_fraction, "smallest member as a fraction of the prefix");
  analyze->add_option("--cluster-tolerance", ac.cluster_tolerance, "relative width of the singularity cluster");
  analyze->add_option("--beta", ac.beta, "log exponent hypothesis for the amplitude tracks");
  analyze->add_option("--digits", ac.digits, "digits written to CSV files");
  analyze->add_option("--out", ac.out, "output directory");

  ExtendCliConfig ec;
  auto* extend = app.add_subcommand("extend", "approximate continuation of an exact series");
  extend->add_option("--coefficients", ec.coefficients, "exact coefficient file");
  extend->add_option("--series", ec.series, "test series instead of a file");
  extend->add_option("--terms", ec.terms, "terms of the test series including f_0");
  extend->add_option("--target", ec.target, "last index to produce")->required();
  extend->add_option("--order", ec.order, "approximant order");
  extend->add_option("--digits-threshold", ec.digits_threshold, "stop when declared digits fall below this");
  extend->add_option("--max-members", ec.max_members, "members per ensemble");
  extend->add_option("--min-fraction", ec.min_fraction, "smallest member as a fraction of the prefix");
  extend->add_option("--out", ec.out, "output directory");

  BoundsConfig bc;
  auto* bnds = app.add_subcommand("bounds", "rigorous lower bounds and coefficient invariants");
  bnds->add_option("--coefficients", bc.coefficients, "coefficient file")->required();
  bnds->add_option("--root-n", bc.root_n, "index of the root bound (default: last)");
  bnds->add_option("--indecomposable-n", bc.indecomposable_n, "terms for the indecomposable bound (default: all)");
  bnds->add_option("--out", bc.out, "output directory");

  PlotConfig pc;
  auto* plot = app.add_subcommand("export-plot", "estimator tracks as CSV");
  plot->add_option("--coefficients", pc.coefficients, "coefficient file");
  plot->add_option("--series", pc.series, "test series instead of a file");
  plot->add_option("--terms", pc.terms, "terms of the test series including f_0");
  plot->add_option("--mu", pc.mu, "growth rate (default: ensemble estimate)");
  plot->add_option("--alpha", pc.alpha, "exponent (default: ensemble estimate)");
  plot->add_option("--beta", pc.beta, "log exponent hypothesis");
  plot->add_option("--order", pc.order, "approximant order for the ensemble estimate");
  plot->add_option("--cluster-tolerance", pc.cluster_tolerance, "relative width of the singularity cluster");
  plot->add_option("--digits", pc.digits, "digits written to CSV files");
  plot->add_option("--out", pc.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  for (auto [opt, var] : {std::pair{threads_opt, "STACKSORT_THREADS"}, std::pair{precision_opt, "STACKSORT_PRECISION"}}) {
    if (opt->empty() && std::getenv(var)) {
      std::cerr << var << "=" << std::getenv(var) << " is not a valid value for " << opt->get_name() << '\n';
      return 1;
    }
  }
  if (g.precision < 30 || g.threads < 1) {
    std::cerr << "precision must be >= 30 digits and threads >= 1\n";
    return 1;
  }
  PrecisionScope scope(g.precision);
  try {
    if (*compute) {
      if (prime_count) rc.prime_count = prime_count;
      return cmd_compute(rc, g);
    }
    if (*verify) return cmd_verify(vc, g);
    if (*analyze) return cmd_analyze(ac, g);
    if (*extend) return cmd_extend(ec, g);
    if (*bnds) return cmd_bounds(bc, g);
    if (*plot) return cmd_export_plot(pc, g);
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::bad_alloc&) {
    std::cerr << "resource error: out of memory; lower --n or --threads, or raise --memory-budget\n";
    return kExitResource;
  } catch (const ContractViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const io::FormatError& e) {
    std::cerr << "bad input: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
