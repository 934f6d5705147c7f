#include <gtest/gtest.h>

#include "stacksort/oracle/permutation.hpp"
#include "stacksort/series_core.hpp"

using namespace stacksort;

namespace {

CoefficientSeries modular_series(std::size_t n, const PrimePlan& plan) {
  std::vector<std::vector<std::uint32_t>> res;
  for (auto p : plan.primes) res.push_back(compute_series_mod_p(n, p));
  return crt_combine(res, plan);
}

}  // namespace

TEST(SeriesCore, ModularMatchesBruteForce) {
  const std::size_t N = 9;
  PrimePlan plan = plan_primes(N, 20);
  CoefficientSeries s = modular_series(N, plan);
  CertificationReport rep = certify(s, plan);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(s.provenance, Provenance::exact_certified);
  for (std::size_t n = 1; n <= N; ++n) EXPECT_EQ(s.at(n), BigInt(oracle::count_sortable(static_cast<int>(n), 3))) << n;
}

TEST(SeriesCore, ExactEngineMatchesModularCrt) {
  const std::size_t N = 30;
  CoefficientSeries exact = reference_compute_exact(N);
  PrimePlan plan = plan_primes(N, 20);
  CoefficientSeries s = modular_series(N, plan);
  ASSERT_TRUE(certify(s, plan).passed);
  EXPECT_EQ(s.coeffs, exact.coeffs);
}

TEST(SeriesCore, SingleTerm) {
  PrimePlan plan = plan_primes(1, 0);
  CoefficientSeries s = modular_series(1, plan);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.at(1), BigInt(1));
}

TEST(SeriesCore, CrtSmallModuli) {
  PrimePlan plan;
  plan.primes = {3, 5};
  plan.product = 15;
  CoefficientSeries s = crt_combine({{2, 0, 1}, {3, 0, 4}}, plan);
  EXPECT_EQ(s.coeffs, (std::vector<BigInt>{8, 0, 4}));
}

TEST(SeriesCore, CrtRejectsBadInput) {
  PrimePlan plan = make_plan(5, 2);
  EXPECT_THROW(crt_combine({{1, 2}}, plan), std::invalid_argument);
  EXPECT_THROW(crt_combine({{1, 2}, {1}}, plan), std::invalid_argument);
  PrimePlan dup;
  dup.primes = {7, 7};
  dup.product = 49;
  EXPECT_THROW(crt_combine({{1}, {1}}, dup), std::invalid_argument);
}

TEST(SeriesCore, CertificationRejectsLargeResidue) {
  PrimePlan plan = make_plan(4, 2);
  CoefficientSeries s{"w", {1, 2, 6, BigInt(plan.product - 1)}, Provenance::exact_uncertified};
  CertificationReport rep = certify(s, plan);
  EXPECT_FALSE(rep.passed);
  EXPECT_LT(rep.log10_margin, 0);
  EXPECT_EQ(s.provenance, Provenance::exact_uncertified);
}

TEST(SeriesCore, TooFewPrimesFailsCertification) {
  const std::size_t N = 40;
  PrimePlan plan = make_plan(N, 2);
  CoefficientSeries s = modular_series(N, plan);
  EXPECT_FALSE(certify(s, plan).passed);
  CoefficientSeries exact = reference_compute_exact(N);
  EXPECT_NE(s.coeffs, exact.coeffs);
}

TEST(SeriesCore, SmallPrimeRejected) {
  EXPECT_THROW(compute_series_mod_p(10, 11), ContractViolation);
}

TEST(SeriesCore, ProvenanceRoundTrip) {
  for (Provenance p : {Provenance::exact_certified, Provenance::exact_uncertified, Provenance::approximate})
    EXPECT_EQ(provenance_from_string(to_string(p)), p);
  EXPECT_THROW(provenance_from_string("guess"), std::invalid_argument);
  EXPECT_FALSE(is_exact(Provenance::approximate));
}

TEST(SeriesCore, PrefixKeepsProvenance) {
  CoefficientSeries s{"w", {1, 2, 6, 24}, Provenance::exact_certified};
  CoefficientSeries p = s.prefix(2);
  EXPECT_EQ(p.coeffs, (std::vector<BigInt>{1, 2}));
  EXPECT_EQ(p.provenance, Provenance::exact_certified);
  EXPECT_THROW(s.prefix(5), std::out_of_range);
}
