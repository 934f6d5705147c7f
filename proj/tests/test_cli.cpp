#include <gtest/gtest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "stacksort/io.hpp"
#include "stacksort/oracle/permutation.hpp"
#include "stacksort/series_core.hpp"

namespace fs = std::filesystem;
using namespace stacksort;

namespace {

struct Outcome {
  int status = -1;
  std::string out;
};

Outcome run(const std::string& args, const std::string& env = "") {
  std::string cmd = env + (env.empty() ? "" : " ") + std::string(STACKSORT_CLI) + " " + args + " 2>&1";
  Outcome r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t k;
  while ((k = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, k);
  int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stacksort-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string d(const std::string& sub = "") const { return (dir_ / sub).string(); }
  fs::path dir_;
};

TEST_F(Cli, ComputeSingleTerm) {
  Outcome r = run("compute --n 1 --threads 1 --out " + d());
  ASSERT_EQ(r.status, 0) << r.out;
  io::SeriesFile f = io::read_coefficients(dir_ / "w-N1.txt");
  ASSERT_EQ(f.exact.size(), 1u);
  EXPECT_EQ(f.exact[0], 1);
  EXPECT_EQ(f.provenance, Provenance::exact_certified);
  std::string text = slurp(dir_ / "w-N1.txt");
  EXPECT_EQ(text.substr(text.find('\n') + 1), "1 1\n");
}

TEST_F(Cli, ComputeThirteenMatchesOracles) {
  Outcome r = run("compute --n 13 --out " + d());
  ASSERT_EQ(r.status, 0) << r.out;
  io::SeriesFile f = io::read_coefficients(dir_ / "w-N13.txt");
  ASSERT_EQ(f.exact.size(), 13u);
  for (int n = 1; n <= 9; ++n) EXPECT_EQ(f.exact[n - 1], oracle::count_sortable(n, 3)) << n;
  CoefficientSeries ref = reference_compute_exact(13);
  EXPECT_EQ(f.exact, ref.coeffs);
  io::Json m = io::read_manifest(dir_ / "compute-manifest.json");
  EXPECT_EQ(m["tool_version"], io::kToolVersion);
  EXPECT_EQ(m["config_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(m["certification"]["passed"].get<bool>());
}

TEST_F(Cli, FlagsOverrideEnvironment) {
  ASSERT_EQ(run("compute --n 5 --threads 2 --out " + d("a"), "STACKSORT_THREADS=3").status, 0);
  EXPECT_EQ(io::read_manifest(dir_ / "a" / "compute-manifest.json")["threads"], 2);
  ASSERT_EQ(run("compute --n 5 --out " + d("b"), "STACKSORT_THREADS=3 STACKSORT_PRECISION=45").status, 0);
  EXPECT_EQ(io::read_manifest(dir_ / "b" / "compute-manifest.json")["threads"], 3);
  ASSERT_EQ(run("verify --quick --precision 50 --out " + d("c"), "STACKSORT_PRECISION=45").status, 0);
  EXPECT_EQ(io::read_manifest(dir_ / "c" / "verify-manifest.json")["precision_digits"], 50);
  ASSERT_EQ(run("verify --quick --out " + d("e"), "STACKSORT_PRECISION=45").status, 0);
  EXPECT_EQ(io::read_manifest(dir_ / "e" / "verify-manifest.json")["precision_digits"], 45);
}

TEST_F(Cli, InvalidSettingsRejected) {
  EXPECT_NE(run("compute --n 0 --out " + d()).status, 0);
  EXPECT_NE(run("compute --n 3 --threads 0 --out " + d()).status, 0);
  EXPECT_NE(run("verify --quick --out " + d(), "STACKSORT_PRECISION=10").status, 0);
}

TEST_F(Cli, ResourceErrorExitCode) {
  Outcome r = run("compute --n 50 --memory-budget 1KB --out " + d());
  EXPECT_EQ(r.status, 4) << r.out;
  EXPECT_NE(r.out.find("memory"), std::string::npos);
}

TEST_F(Cli, CertificationFailureExitCode) {
  Outcome r = run("compute --n 40 --primes 2 --max-topups 0 --out " + d());
  EXPECT_EQ(r.status, 2) << r.out;
  EXPECT_EQ(io::read_coefficients(dir_ / "w-N40.txt").provenance, Provenance::exact_uncertified);
}

TEST_F(Cli, TopUpRecoversCertification) {
  Outcome r = run("compute --n 40 --primes 2 --out " + d());
  EXPECT_EQ(r.status, 0) << r.out;
  io::SeriesFile f = io::read_coefficients(dir_ / "w-N40.txt");
  EXPECT_EQ(f.provenance, Provenance::exact_certified);
  EXPECT_EQ(f.exact, reference_compute_exact(40).coeffs);
}

TEST_F(Cli, ResumeGivesIdenticalFile) {
  ASSERT_EQ(run("compute --n 30 --out " + d("full")).status, 0);
  ASSERT_EQ(run("compute --n 30 --out " + d("part")).status, 0);
  auto cps = dir_ / "part" / "checkpoints";
  std::size_t removed = 0;
  for (auto it = fs::directory_iterator(cps); it != fs::directory_iterator(); ++it)
    if (removed++ % 2 == 0) fs::remove(it->path());
  fs::remove(dir_ / "part" / "w-N30.txt");
  Outcome r = run("compute --n 30 --resume --out " + d("part"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("resumed"), std::string::npos);
  EXPECT_EQ(slurp(dir_ / "full" / "w-N30.txt"), slurp(dir_ / "part" / "w-N30.txt"));
}

TEST_F(Cli, VerifyQuickPassesFast) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome r = run("verify --quick --out " + d());
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_LT(secs, 5.0);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, VerifyDefaultCapsPass) {
  Outcome r = run("verify --out " + d());
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
}

TEST_F(Cli, VerifyReportsCorruptedFile) {
  ASSERT_EQ(run("compute --n 12 --out " + d()).status, 0);
  std::string text = slurp(dir_ / "w-N12.txt");
  const std::string good = "\n7 3494\n";
  ASSERT_NE(text.find(good), std::string::npos);
  text.replace(text.find(good), good.size(), "\n7 3495\n");
  io::atomic_write(dir_ / "bad.txt", text);
  EXPECT_EQ(run("verify --quick --coefficients " + d("w-N12.txt") + " --out " + d()).status, 0);
  Outcome r = run("verify --quick --coefficients " + d("bad.txt") + " --out " + d());
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.out.find("mismatch at n=7"), std::string::npos) << r.out;
  io::atomic_write(dir_ / "junk.txt", "not coefficients\n");
  EXPECT_EQ(run("verify --quick --coefficients " + d("junk.txt") + " --out " + d()).status, 3);
}

TEST_F(Cli, BoundsOnOneTermFile) {
  ASSERT_EQ(run("compute --n 1 --out " + d()).status, 0);
  Outcome r = run("bounds --coefficients " + d("w-N1.txt") + " --out " + d());
  ASSERT_EQ(r.status, 0) << r.out;
  io::Json m = io::read_manifest(dir_ / "bounds-manifest.json");
  EXPECT_EQ(Real(m["results"]["root_bound"]["value"].get<std::string>()), 1);
  EXPECT_LT(abs(Real(m["results"]["indecomposable_bound"]["value"].get<std::string>()) - 1), Real(1e-10));
  EXPECT_TRUE(m["results"]["certified"].get<bool>());
}

TEST_F(Cli, BoundsFlagsInvariantViolation) {
  io::atomic_write(dir_ / "w.txt", "stacksort-coeffs v1 N=3 provenance=exact-certified\n1 5\n2 4\n3 100\n");
  EXPECT_EQ(run("bounds --coefficients " + d("w.txt") + " --out " + d()).status, 3);
}

TEST_F(Cli, AnalyzeCatalan) {
  Outcome r = run("analyze --series catalan --terms 30 --orders 1 --out " + d());
  ASSERT_EQ(r.status, 0) << r.out;
  io::Json m = io::read_manifest(dir_ / "analyze-manifest.json");
  Real xc(m["results"]["summary"]["x_c"].get<std::string>());
  EXPECT_LT(abs(xc - Real(0.25)), Real(1e-12));
  Real alpha(m["results"]["summary"]["alpha"].get<std::string>());
  EXPECT_LT(abs(alpha - Real(0.5)), Real(1e-10));
  EXPECT_TRUE(fs::exists(dir_ / "estimators" / "ratios.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "singularities.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "approximants.txt"));
}

TEST_F(Cli, AnalyzeIsDeterministic) {
  ASSERT_EQ(run("compute --n 40 --out " + d()).status, 0);
  const std::string args = "analyze --coefficients " + d("w-N40.txt") + " --orders 2,3 --cluster-tolerance 1e-2";
  ASSERT_EQ(run(args + " --threads 1 --out " + d("a")).status, 0);
  ASSERT_EQ(run(args + " --threads 3 --out " + d("b")).status, 0);
  std::size_t compared = 0;
  for (auto it = fs::recursive_directory_iterator(dir_ / "a"); it != fs::recursive_directory_iterator(); ++it) {
    if (it->path().extension() != ".csv") continue;
    fs::path other = dir_ / "b" / fs::relative(it->path(), dir_ / "a");
    EXPECT_EQ(slurp(it->path()), slurp(other)) << it->path();
    ++compared;
  }
  EXPECT_GT(compared, 5u);
}

TEST_F(Cli, AnalyzeRejectsLongPrefix) {
  Outcome r = run("analyze --series catalan --terms 30 --prefixes 40 --out " + d());
  EXPECT_NE(r.status, 0);
}

TEST_F(Cli, ExtendRationalSeriesExactly) {
  Outcome r = run("extend --series geometric --terms 20 --order 1 --target 40 --min-fraction 0 --out " + d());
  ASSERT_EQ(r.status, 0) << r.out;
  io::SeriesFile f = io::read_coefficients(dir_ / "w-ext-N40.txt");
  EXPECT_EQ(f.provenance, Provenance::approximate);
  ASSERT_EQ(f.approx.size(), 40u);
  EXPECT_EQ(f.exact_prefix, 19u);
  for (std::size_t n = 20; n <= 40; ++n) {
    EXPECT_EQ(f.stddev[n - 1], 0) << n;
    EXPECT_EQ(f.approx[n - 1], pow(Real(2), static_cast<int>(n))) << n;
  }
}

TEST_F(Cli, ExtendNeedsExactInput) {
  Outcome r = run("extend --series geometric --terms 20 --order 1 --target 40 --min-fraction 0 --out " + d());
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(run("extend --coefficients " + d("w-ext-N40.txt") + " --target 60 --out " + d()).status, 3);
}

TEST_F(Cli, BoundsOnApproximateInputAreUncertified) {
  ASSERT_EQ(run("extend --series geometric --terms 20 --order 1 --target 30 --min-fraction 0 --out " + d()).status, 0);
  Outcome r = run("bounds --coefficients " + d("w-ext-N30.txt") + " --out " + d());
  EXPECT_NE(r.out.find("uncertified"), std::string::npos) << r.out;
  io::Json m = io::read_manifest(dir_ / "bounds-manifest.json");
  EXPECT_FALSE(m["results"]["certified"].get<bool>());
}

TEST_F(Cli, ExportPlotWithGivenParameters) {
  Outcome r = run("export-plot --series catalan --terms 40 --mu 4 --alpha 0.5 --out " + d());
  ASSERT_EQ(r.status, 0) << r.out;
  std::string g = slurp(dir_ / "plot" / "g.csv");
  EXPECT_EQ(g.rfind("n,abscissa,value\n", 0), 0u);
  io::Json m = io::read_manifest(dir_ / "export-plot-manifest.json");
  EXPECT_EQ(m["results"]["parameters_from"], "flags");
  EXPECT_GT(m["results"]["files"].size(), 5u);
}

TEST_F(Cli, UnknownSeriesFails) {
  EXPECT_EQ(run("analyze --series nope --out " + d()).status, 1);
}

}  // namespace
