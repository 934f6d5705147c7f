#pragma once

// Multi-prime orchestration: plan, per-prime runs on a worker pool with
// checkpoints, CRT, certification and prime top-up.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "stacksort/grid_engine.hpp"
#include "stacksort/io.hpp"
#include "stacksort/primes.hpp"
#include "stacksort/series_core.hpp"

namespace stacksort {

struct RunConfig {
  std::size_t n = 1;
  std::optional<std::size_t> prime_count;
  unsigned threads = 1;
  std::size_t memory_budget_bytes = std::size_t{8} << 30;
  unsigned precision_digits = 60;
  std::filesystem::path output_dir = "out";
  bool resume = false;
  double safety_digits = 20;
  int max_topups = 3;

  void validate() const {
    if (n < 1) throw std::invalid_argument("N must be >= 1");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (precision_digits < 30) throw std::invalid_argument("precision must be >= 30 digits");
  }

  /// The fields that determine the output, for hashing.
  io::Json to_json() const {
    io::Json j{{"N", n}, {"safety_digits", safety_digits}, {"max_topups", max_topups}};
    j["prime_count"] = prime_count ? io::Json(*prime_count) : io::Json(nullptr);
    return j;
  }
};

struct PrimeTiming {
  std::uint32_t prime = 0;
  double seconds = 0;
  bool from_checkpoint = false;
};

struct ComputeResult {
  CoefficientSeries series;
  PrimePlan plan;
  CertificationReport report;
  std::vector<PrimeTiming> timings;
  int topups = 0;
  double wall_seconds = 0;
  unsigned workers = 1;
};

using ProgressFn = std::function<void(const std::string&)>;

inline std::filesystem::path checkpoint_dir(const RunConfig& c) { return c.output_dir / "checkpoints"; }

/// Concurrent prime runs allowed by the memory budget.
inline unsigned workers_for(const RunConfig& c) {
  const std::size_t per = GridEngine<ModArith>::footprint_bytes(c.n);
  if (per > c.memory_budget_bytes) {
    throw ResourceError("one prime at N=" + std::to_string(c.n) + " needs " + std::to_string(per) +
                        " bytes but the memory budget is " + std::to_string(c.memory_budget_bytes) +
                        "; raise --memory-budget or lower --n");
  }
  const std::size_t fit = c.memory_budget_bytes / std::max<std::size_t>(per, 1);
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(c.threads, fit)));
}

/// Residues for `primes`, reusing checkpoints when resuming.
inline std::map<std::uint32_t, std::vector<std::uint32_t>> run_primes(const RunConfig& c,
                                                                      const std::vector<std::uint32_t>& primes,
                                                                      std::vector<PrimeTiming>& timings,
                                                                      const ProgressFn& progress) {
  std::map<std::uint32_t, std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> todo;
  for (std::uint32_t p : primes) {
    if (c.resume) {
      if (auto r = io::read_checkpoint(checkpoint_dir(c), p, c.n)) {
        out.emplace(p, std::move(*r));
        timings.push_back({p, 0.0, true});
        continue;
      }
    }
    todo.push_back(p);
  }
  if (progress && !out.empty()) progress("resumed " + std::to_string(out.size()) + " primes from checkpoints");

  const unsigned workers = std::min<unsigned>(workers_for(c), static_cast<unsigned>(std::max<std::size_t>(todo.size(), 1)));
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (failure) return;
      }
      const std::uint32_t p = todo[i];
      try {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<std::uint32_t> r = compute_series_mod_p(c.n, p, c.memory_budget_bytes);
        io::write_checkpoint(checkpoint_dir(c), p, c.n, r);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::lock_guard<std::mutex> lock(mu);
        out.emplace(p, std::move(r));
        timings.push_back({p, secs, false});
        if (progress)
          progress("prime " + std::to_string(p) + " done in " + std::to_string(secs) + " s (" +
                   std::to_string(out.size()) + "/" + std::to_string(primes.size()) + ")");
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Extra primes needed to lift log10 P above log10(N * max w~) with one
/// prime of slack.
inline std::size_t topup_count(const CertificationReport& r) {
  const double deficit = -r.log10_margin;
  return static_cast<std::size_t>(std::ceil(std::max(deficit, 0.0) / 9.6)) + 1;
}

inline ComputeResult run_compute(const RunConfig& c, const ProgressFn& progress = {}) {
  c.validate();
  auto t0 = std::chrono::steady_clock::now();
  ComputeResult res;
  res.plan = c.prime_count ? make_plan(c.n, *c.prime_count) : plan_primes(c.n, c.safety_digits);
  res.workers = workers_for(c);
  if (progress)
    progress("N=" + std::to_string(c.n) + ": " + std::to_string(res.plan.primes.size()) + " primes, " +
             std::to_string(res.workers) + " worker(s)");

  std::map<std::uint32_t, std::vector<std::uint32_t>> residues = run_primes(c, res.plan.primes, res.timings, progress);
  for (;;) {
    std::vector<std::vector<std::uint32_t>> ordered;
    for (std::uint32_t p : res.plan.primes) ordered.push_back(residues.at(p));
    res.series = crt_combine(ordered, res.plan);
    res.report = certify(res.series, res.plan);
    if (res.report.passed || res.topups >= c.max_topups) break;
    const std::size_t extra = topup_count(res.report);
    if (progress)
      progress("certification failed (log10 margin " + std::to_string(res.report.log10_margin) + "); adding " +
               std::to_string(extra) + " primes");
    const std::size_t before = res.plan.primes.size();
    res.plan.extend(extra);
    std::vector<std::uint32_t> fresh(res.plan.primes.begin() + static_cast<std::ptrdiff_t>(before), res.plan.primes.end());
    for (auto& [p, r] : run_primes(c, fresh, res.timings, progress)) residues.emplace(p, std::move(r));
    ++res.topups;
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

inline std::filesystem::path coefficient_path(const RunConfig& c) {
  return c.output_dir / ("w-N" + std::to_string(c.n) + ".txt");
}

inline io::Json compute_manifest(const RunConfig& c, const ComputeResult& r) {
  io::Json cfg = c.to_json();
  io::Json j;
  j["tool"] = "stacksort";
  j["tool_version"] = io::kToolVersion;
  j["command"] = "compute";
  j["config"] = cfg;
  j["config_hash"] = io::config_hash(cfg);
  j["threads"] = c.threads;
  j["workers"] = r.workers;
  j["primes"] = r.plan.primes;
  j["prime_count"] = r.plan.primes.size();
  j["product_P"] = r.plan.product.str();
  io::Json times = io::Json::array();
  for (const auto& t : r.timings)
    times.push_back({{"prime", t.prime}, {"seconds", t.seconds}, {"from_checkpoint", t.from_checkpoint}});
  j["prime_timings"] = times;
  j["topups"] = r.topups;
  j["wall_seconds"] = r.wall_seconds;
  j["certification"] = io::certification_json(r.report);
  j["provenance"] = to_string(r.series.provenance);
  j["coefficient_file"] = coefficient_path(c).filename().string();
  return j;
}

}  // namespace stacksort
