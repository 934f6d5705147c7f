#include <gtest/gtest.h>

#include "stacksort/io.hpp"

using namespace stacksort;
using namespace stacksort::io;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("stacksort-io-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

}  // namespace

using IoTest = TempDir;

TEST_F(IoTest, CoefficientRoundTrip) {
  CoefficientSeries s{"w", {1, 2, 6, 23, BigInt("123456789012345678901234567890")}, Provenance::exact_certified};
  write_coefficients(dir_ / "w.txt", s);
  SeriesFile f = read_coefficients(dir_ / "w.txt");
  EXPECT_EQ(f.n, 5u);
  EXPECT_TRUE(f.is_exact());
  EXPECT_EQ(f.provenance, Provenance::exact_certified);
  EXPECT_EQ(f.series().coeffs, s.coeffs);
  EXPECT_EQ(f.exact_prefix, 5u);
  EXPECT_EQ(read_text(dir_ / "w.txt").substr(0, 48), "stacksort-coeffs v1 N=5 provenance=exact-certifi");
}

TEST_F(IoTest, ExtendedRoundTrip) {
  PrecisionScope ps(40);
  write_extended(dir_ / "x.txt", {BigInt(1), BigInt(2)}, {Real("6.0000001"), Real("23.5")}, {Real("1e-7"), Real("0.5")}, 20);
  SeriesFile f = read_coefficients(dir_ / "x.txt");
  EXPECT_FALSE(f.is_exact());
  EXPECT_EQ(f.n, 4u);
  EXPECT_EQ(f.exact_prefix, 2u);
  EXPECT_EQ(f.approx[0], 1);
  EXPECT_LT(abs(f.approx[2] - Real("6.0000001")), Real(1e-30));
  EXPECT_EQ(f.stddev[3], Real("0.5"));
  EXPECT_THROW(f.series(), FormatError);
  EXPECT_EQ(exact_rows(dir_ / "x.txt", 2), (std::vector<BigInt>{1, 2}));
}

TEST_F(IoTest, MalformedFilesRejected) {
  atomic_write(dir_ / "a.txt", "hello\n1 1\n");
  EXPECT_THROW(read_coefficients(dir_ / "a.txt"), FormatError);
  atomic_write(dir_ / "b.txt", "stacksort-coeffs v1 N=3 provenance=exact-certified\n1 1\n3 6\n");
  EXPECT_THROW(read_coefficients(dir_ / "b.txt"), FormatError);
  atomic_write(dir_ / "c.txt", "stacksort-coeffs v1 N=3 provenance=exact-certified\n1 1\n2 2\n");
  EXPECT_THROW(read_coefficients(dir_ / "c.txt"), FormatError);
  atomic_write(dir_ / "d.txt", "stacksort-coeffs v1 N=2 provenance=exact-certified\n1 1\n2 2.5\n");
  EXPECT_THROW(read_coefficients(dir_ / "d.txt"), FormatError);
  atomic_write(dir_ / "e.txt", "stacksort-coeffs v1 N=1\n1 1\n");
  EXPECT_THROW(read_coefficients(dir_ / "e.txt"), FormatError);
  EXPECT_THROW(read_coefficients(dir_ / "missing.txt"), std::runtime_error);
}

TEST_F(IoTest, Checkpoints) {
  std::vector<std::uint32_t> r{1, 2, 6, 24};
  write_checkpoint(dir_, 97, 4, r);
  EXPECT_EQ(read_checkpoint(dir_, 97, 4), r);
  EXPECT_FALSE(read_checkpoint(dir_, 97, 5).has_value());
  EXPECT_FALSE(read_checkpoint(dir_, 89, 4).has_value());
  atomic_write(checkpoint_path(dir_, 89, 4), "prime=89 N=4\n1 1\n2 2\n");
  EXPECT_FALSE(read_checkpoint(dir_, 89, 4).has_value());
  atomic_write(checkpoint_path(dir_, 83, 2), "prime=83 N=2\n1 1\n2 90\n");
  EXPECT_FALSE(read_checkpoint(dir_, 83, 2).has_value());
  EXPECT_FALSE(std::filesystem::exists(checkpoint_path(dir_, 97, 4).string() + ".tmp"));
}

TEST_F(IoTest, ManifestAndHash) {
  Json cfg{{"N", 10}, {"safety_digits", 20}};
  Json same{{"N", 10}, {"safety_digits", 20}};
  Json other{{"N", 11}, {"safety_digits", 20}};
  EXPECT_EQ(config_hash(cfg), config_hash(same));
  EXPECT_NE(config_hash(cfg), config_hash(other));
  EXPECT_EQ(config_hash(cfg).size(), 16u);
  Json m{{"tool_version", kToolVersion}, {"config", cfg}, {"config_hash", config_hash(cfg)}};
  write_manifest(dir_ / "m.json", m);
  Json back = read_manifest(dir_ / "m.json");
  EXPECT_EQ(back, m);
  EXPECT_EQ(back["tool_version"], "1.0.0");
}

TEST_F(IoTest, CertificationJson) {
  CertificationReport r;
  r.n = 3;
  r.product = BigInt(1000);
  r.max_coefficient = BigInt(10);
  r.passed = true;
  r.log10_margin = 1.5;
  Json j = certification_json(r);
  EXPECT_EQ(j["N"], 3);
  EXPECT_NEAR(j["product_P_log10"].get<double>(), 3.0, 1e-12);
  EXPECT_EQ(j["passed"], true);
}

TEST_F(IoTest, ApproximantArchive) {
  PrecisionScope ps(40);
  da::HolonomicApproximant ap;
  ap.spec.order = 1;
  ap.spec.q_degrees = {0, 1};
  ap.spec.p_degree = 0;
  ap.scale = Real("0.25");
  ap.q = {{Real("-0.5")}, {Real(1), Real("0.75")}};
  ap.p = {Real(3)};
  write_approximant_archive(dir_ / "ap.txt", {&ap});
  std::string text = read_text(dir_ / "ap.txt");
  EXPECT_NE(text.find("stacksort-approximants v1 count=1"), std::string::npos);
  EXPECT_NE(text.find("order 1\ndegrees 0 1 0\nscale 1 4\n-1 2\n1 1 3 4\n3 1\n"), std::string::npos) << text;
}
