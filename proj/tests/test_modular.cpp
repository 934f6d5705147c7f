#include <gtest/gtest.h>

#include <random>

#include "stacksort/grid_engine.hpp"
#include "stacksort/oracle/trivariate.hpp"
#include "stacksort/primes.hpp"

using namespace stacksort;

namespace {

constexpr std::uint32_t kP = 4294967291u;

std::uint32_t ref_mul(std::uint32_t a, std::uint32_t b, std::uint32_t p) {
  return static_cast<std::uint32_t>(static_cast<unsigned __int128>(a) * b % p);
}

BigInt eval(const oracle::Poly2& q, long x, long a) {
  BigInt s = 0;
  for (const auto& [k, c] : q.terms()) s += c * boost::multiprecision::pow(BigInt(x), k.first) * boost::multiprecision::pow(BigInt(a), k.second);
  return s;
}

std::uint32_t mod_of(const BigInt& v, std::uint32_t p) {
  BigInt r = v % p;
  if (r < 0) r += p;
  return static_cast<std::uint32_t>(r);
}

}  // namespace

TEST(Modulus, ArithmeticMatchesWideReference) {
  std::mt19937_64 rng(7);
  for (std::uint32_t p : {kP, 4294967279u, 2147483647u, 65521u, 97u}) {
    Modulus m(p);
    for (int i = 0; i < 20000; ++i) {
      std::uint32_t a = static_cast<std::uint32_t>(rng() % p);
      std::uint32_t b = static_cast<std::uint32_t>(rng() % p);
      std::uint64_t x = rng();
      ASSERT_EQ(m.mul(a, b), ref_mul(a, b, p));
      ASSERT_EQ(m.add(a, b), static_cast<std::uint32_t>((std::uint64_t{a} + b) % p));
      ASSERT_EQ(m.sub(a, b), static_cast<std::uint32_t>((std::uint64_t{a} + p - b) % p));
      ASSERT_EQ(m.reduce(x), static_cast<std::uint32_t>(x % p));
      std::uint64_t hi = rng() >> 32;
      unsigned __int128 wide = (static_cast<unsigned __int128>(hi) << 64) | x;
      ASSERT_EQ(m.reduce(hi, x), static_cast<std::uint32_t>(wide % p));
    }
    EXPECT_EQ(m.reduce(~std::uint64_t{0}), static_cast<std::uint32_t>(~std::uint64_t{0} % p));
  }
}

TEST(Modulus, InverseAndSigned) {
  Modulus m(kP);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::uint32_t a = static_cast<std::uint32_t>(rng() % (kP - 1)) + 1;
    EXPECT_EQ(m.mul(a, m.inv(a)), 1u);
  }
  EXPECT_THROW(m.inv(0), std::domain_error);
  EXPECT_EQ(m.from_signed(-1), kP - 1);
  EXPECT_EQ(m.from_signed(-static_cast<std::int64_t>(kP) * 3 - 5), kP - 5);
}

TEST(Modulus, DotProductsWithoutOverflow) {
  Modulus m(kP);
  for (std::size_t len : {0u, 1u, 2u, 7u, 1000u, 5000u}) {
    std::vector<std::uint32_t> a(len, kP - 1), b(len, kP - 1);
    std::uint32_t expect = 0;
    std::uint32_t shifted = 0;
    for (std::size_t i = 0; i < len; ++i) {
      expect = m.add(expect, ref_mul(a[i], b[i], kP));
      if (i + 1 < len) shifted = m.add(shifted, ref_mul(a[i], b[i + 1], kP));
    }
    EXPECT_EQ(m.dot(a.data(), b.data(), len), expect);
    auto [first, second] = m.dot_pair(a.data(), b.data(), len);
    EXPECT_EQ(first, shifted);
    EXPECT_EQ(second, expect);
  }
}

TEST(ModTables, BinomialsMatchExact) {
  Modulus m(kP);
  ModTables t(m, 200);
  for (std::uint32_t n = 0; n <= 200; n += 7)
    for (std::uint32_t k = 0; k <= n; ++k)
      EXPECT_EQ(t.binomial(m, n, k), mod_of(oracle::binomial(n, k), kP));
  EXPECT_EQ(t.binomial(m, 3, 5), 0u);
  for (std::uint32_t i = 1; i <= 200; ++i) EXPECT_EQ(m.mul(t.inverse[i], i), 1u);
  EXPECT_THROW(ModTables(Modulus(97), 97), std::invalid_argument);
}

TEST(Interpolation, RecoversValueAtZero) {
  ExactArith ar;
  // f(z) = 3 z^4 - 2 z + 11, degree 4 = n + 1 with n = 3.
  std::vector<BigInt> v;
  for (int z = 1; z <= 5; ++z) v.push_back(BigInt(3 * z * z * z * z - 2 * z + 11));
  EXPECT_EQ(interpolate_at_zero<ExactArith>(ar, v, 3), BigInt(11));
  ModArith mar(kP, 10);
  std::vector<std::uint32_t> vm;
  for (const auto& x : v) vm.push_back(mod_of(x, kP));
  EXPECT_EQ(interpolate_at_zero<ModArith>(mar, vm, 3), 11u);
}

TEST(GridEngine, FirstLevelsClosedForm) {
  GridEngine<ExactArith> e(ExactArith{}, 4);
  EXPECT_EQ(e.value(1, 1), BigInt(16));
  e.step();
  EXPECT_EQ(e.value(1, 1), BigInt(128));
  EXPECT_EQ(e.value(0, 0), BigInt(2));
}

TEST(GridEngine, GridValuesMatchPolynomialRecurrence) {
  const int N = 7;
  std::vector<oracle::Poly2> q = oracle::q_recurrence(N);
  GridEngine<ExactArith> ex(ExactArith{}, N);
  GridEngine<ModArith> md(ModArith(kP, N + 2), N);
  for (int n = 1; n <= N; ++n) {
    if (n > 1) {
      ex.step();
      md.step();
    }
    for (std::size_t x = 0; x <= ex.grid_size(); ++x) {
      for (std::size_t a = 0; a <= ex.grid_size(); ++a) {
        BigInt v = eval(q[static_cast<std::size_t>(n)], static_cast<long>(x), static_cast<long>(a));
        ASSERT_EQ(ex.value(x, a), v) << "n=" << n << " x=" << x << " a=" << a;
        ASSERT_EQ(md.value(x, a), mod_of(v, kP));
      }
    }
  }
}

TEST(GridEngine, FiniteDifferencesVanish) {
  GridEngine<ModArith> e(ModArith(kP, 14), 12);
  for (int n = 1; n <= 12; ++n) {
    if (n > 1) e.step();
    const std::size_t span = e.level() + 2;
    for (std::size_t x = 0; x <= e.grid_size(); ++x)
      for (std::size_t first = 0; first + span <= e.grid_size(); ++first) {
        EXPECT_EQ(e.finite_difference_a(x, first), 0u);
        EXPECT_EQ(e.finite_difference_x(x, first), 0u);
      }
  }
}

TEST(GridEngine, OutOfOrderStepsRejected) {
  GridEngine<ModArith> e(ModArith(kP, 7), 5);
  EXPECT_THROW(e.recurrence_step(3), ContractViolation);
  EXPECT_THROW(e.boundary_interpolation(4), ContractViolation);
  e.run();
  EXPECT_THROW(e.step(), ContractViolation);
}

TEST(GridEngine, MemoryBudgetEnforced) {
  EXPECT_EQ(GridEngine<ModArith>::footprint_bytes(10), 2u * 12 * 12 * 10 * 4);
  EXPECT_THROW(GridEngine<ModArith>(ModArith(kP, 12), 10, 1000), ResourceError);
  EXPECT_NO_THROW(GridEngine<ModArith>(ModArith(kP, 12), 10, GridEngine<ModArith>::footprint_bytes(10)));
}
