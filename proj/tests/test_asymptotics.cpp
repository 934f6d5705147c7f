#include <gtest/gtest.h>

#include <fstream>

#include "stacksort/asymptotics.hpp"
#include "stacksort/diffapprox/test_series.hpp"

using namespace stacksort;
using namespace stacksort::asym;

namespace {

// C mu^n n^{-alpha-1} (log n)^beta (e1 + e2/n + e3/n^2) for n = 2..last.
NumericSeries planted(const Real& C, const Real& mu, const Real& alpha, const Real& beta, std::size_t last,
                      const std::vector<Real>& e = {Real(1), Real(0), Real(0)}) {
  NumericSeries s;
  s.first_n = 2;
  for (std::size_t n = 2; n <= last; ++n) {
    Real x = rn(n);
    s.values.push_back(C * pow(mu, x) * pow(x, -alpha - 1) * pow(log(x), beta) * (e[0] + e[1] / x + e[2] / (x * x)));
  }
  return s;
}

double agreement(const Real& a, const Real& b) {
  if (a == b) return 1000;
  return static_cast<double>(-log10(abs(a - b) / std::max<Real>(abs(b), Real(1e-300))));
}

Real euler() { return Real("0.57721566490153286060651209008240243104215933593992359880576723488486772677766467"); }

}  // namespace

TEST(Estimators, RatiosAndIntercepts) {
  PrecisionScope ps(40);
  NumericSeries s;
  s.first_n = 1;
  for (int n = 1; n <= 10; ++n) s.values.push_back(pow(Real(3), n));
  EstimatorSeries r = ratios(s);
  ASSERT_EQ(r.size(), 9u);
  for (const auto& v : r.values) EXPECT_EQ(v, 3);
  EstimatorSeries l = linear_intercepts(r);
  for (const auto& v : l.values) EXPECT_LT(abs(v - 3), Real(1e-35));
  EstimatorSeries g = estimator_g(r, Real(3));
  for (const auto& v : g.values) EXPECT_LT(abs(v), Real(1e-35));
  EXPECT_EQ(r.abscissa, Abscissa::inv_n);
  EXPECT_EQ(l.abscissa, Abscissa::inv_n_log2_n);
}

TEST(Estimators, AbscissaAssignment) {
  PrecisionScope ps(40);
  NumericSeries s = planted(Real(1), Real(9), Real("2.4"), Real("0.5"), 40);
  EstimatorBundle b = all_estimators(s, Real(9), Real("2.4"), Real("0.5"));
  std::map<std::string, Abscissa> expect{{"ratios", Abscissa::inv_n},
                                         {"intercepts", Abscissa::inv_n_log2_n},
                                         {"g", Abscissa::inv_n},
                                         {"g_log", Abscissa::inv_log_n},
                                         {"beta_ratio", Abscissa::inv_log_n},
                                         {"beta_intercept", Abscissa::inv_n_log2_n},
                                         {"t2", Abscissa::inv_n},
                                         {"t3", Abscissa::inv_log_n},
                                         {"beta_fixed_alpha", Abscissa::inv_n_log_n},
                                         {"t1r", Abscissa::inv_n},
                                         {"t2r", Abscissa::inv_log_n},
                                         {"e1", Abscissa::inv_n},
                                         {"Rn", Abscissa::inv_log_n}};
  EXPECT_EQ(b.series.size(), expect.size());
  for (const auto& e : b.series) {
    ASSERT_TRUE(expect.count(e.kind)) << e.kind;
    EXPECT_EQ(e.abscissa, expect[e.kind]) << e.kind;
    EXPECT_FALSE(e.empty()) << e.kind;
  }
}

TEST(Fits, RecoverPlantedParameters) {
  PrecisionScope ps(60);
  const Real C("1.75"), mu("9.65"), alpha("2.37"), beta("0.4");
  NumericSeries s = planted(C, mu, alpha, beta, 150);
  for (std::size_t p : {3u, 4u, 5u, 6u}) {
    WindowedFit f = windowed_fit_coeffs(s, mu, p);
    ASSERT_FALSE(f.n.empty());
    EXPECT_GE(agreement(f.params[0].back(), log(C)), 8) << p;
    EXPECT_GE(agreement(f.params[1].back(), -alpha - 1), 8) << p;
    EXPECT_GE(agreement(f.params[2].back(), beta), 8) << p;
  }
  WindowedFit fa = windowed_fit_coeffs(s, mu, 5, alpha);
  EXPECT_GE(agreement(fa.params[1].back(), beta), 8);
}

TEST(Fits, RecoverPlantedAmplitudes) {
  PrecisionScope ps(60);
  const Real mu("9.65"), alpha("2.37"), beta("0.4");
  std::vector<Real> e{Real("1.3"), Real("-0.7"), Real("2.2")};
  // s_n = e1 n^{beta-1} + e2 n^{beta-2} + e3 n^{beta-3}, i.e. f_n = mu^n n^{-alpha-1} s_n.
  NumericSeries s;
  s.first_n = 2;
  for (std::size_t n = 2; n <= 120; ++n) {
    Real x = rn(n);
    Real sn = e[0] * pow(x, beta - 1) + e[1] * pow(x, beta - 2) + e[2] * pow(x, beta - 3);
    s.values.push_back(pow(mu, x) * pow(x, -alpha - 1) * sn);
  }
  WindowedFit f = amplitude_fit(s, mu, alpha, beta);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_GE(agreement(f.params[j].back(), e[j]), 8) << j;
}

TEST(Fits, RatioFitRecoversExponent) {
  PrecisionScope ps(60);
  // r_n / mu - 1 = (a + b/log n) / n exactly.
  const Real mu("4.5"), a("-3.37"), b("0.6");
  EstimatorSeries r{"ratios", Abscissa::inv_n, {}, {}};
  for (std::size_t n = 3; n <= 100; ++n) r.push(n, mu * (1 + (a + b / log(rn(n))) / rn(n)));
  WindowedFit f = windowed_fit_ratios(r, mu, 2);
  EXPECT_GE(agreement(f.params[0].back(), a), 8);
  EXPECT_GE(agreement(f.params[1].back(), b), 8);
  WindowedFit f4 = windowed_fit_ratios(r, mu, 4);
  EXPECT_GE(agreement(f4.params[0].back(), a), 8);
}

TEST(Fits, StableUnderPrecisionChange) {
  std::vector<Real> got;
  for (unsigned d : {60u, 100u}) {
    PrecisionScope ps(d);
    NumericSeries s = planted(Real("1.75"), Real("9.65"), Real("2.37"), Real("0.4"), 150,
                                       {Real(1), Real("0.3"), Real("-0.2")});
    WindowedFit f = windowed_fit_coeffs(s, Real("9.65"), 5);
    got.push_back(Real(f.params[1].back(), 100));
  }
  EXPECT_GE(agreement(got[0], got[1]), 15);
}

TEST(Estimators, BetaEstimatorsConverge) {
  PrecisionScope ps(60);
  const Real mu("9.65"), alpha("2.37"), beta("0.4");
  NumericSeries s = planted(Real(1), mu, alpha, beta, 400);
  EstimatorSeries br = beta_from_ratios(ratios(s), mu, alpha);
  Real early = abs(br.at(50) - beta);
  Real late = abs(br.at(400) - beta);
  EXPECT_LT(late, early);
  EXPECT_LT(late, Real("0.1"));
}

TEST(Amplitude, Classification) {
  PrecisionScope ps(30);
  EstimatorSeries conv{"e1", Abscissa::inv_n, {}, {}}, van{"e1", Abscissa::inv_n, {}, {}}, div{"e1", Abscissa::inv_n, {}, {}};
  for (std::size_t n = 10; n < 50; ++n) {
    conv.push(n, 2 + Real(1) / rn(n));
    van.push(n, Real(1) / (rn(n) * rn(n)));
    div.push(n, rn(n) * rn(n));
  }
  EXPECT_EQ(classify_amplitude(conv), AmplitudeBehaviour::converging);
  EXPECT_EQ(classify_amplitude(van), AmplitudeBehaviour::vanishing);
  EXPECT_EQ(classify_amplitude(div), AmplitudeBehaviour::diverging);
}

TEST(Corrections, FirstCoefficientClosedForm) {
  PrecisionScope ps(60);
  // alpha = 1/2, beta = 1: c1 = -psi(-1/2) = gamma + 2 log 2 - 2.
  auto c = fs_coefficients(Real("0.5"), Real(1), 3);
  Real expect = euler() + 2 * log(Real(2)) - 2;
  EXPECT_GE(agreement(c[1], expect), 25);
  EXPECT_GE(agreement(c[1], Real("-0.036489973978576520559")), 19);
  EXPECT_EQ(c[0], 1);
}

TEST(Corrections, SecondCoefficientClosedForm) {
  PrecisionScope ps(60);
  // c2 = binom(beta, 2) (psi(s)^2 - psi'(s)) at s = -1/2, with
  // psi(-1/2) = 2 - gamma - 2 log 2 and psi'(-1/2) = pi^2/2 + 4.
  const Real beta("2.5");
  auto c = fs_coefficients(Real("0.5"), beta, 2);
  Real psi = 2 - euler() - 2 * log(Real(2));
  Real trigamma = pi() * pi() / 2 + 4;
  Real expect = binomial_real(beta, 2) * (psi * psi - trigamma);
  EXPECT_GE(agreement(c[2], expect), 20);
}

TEST(Corrections, IntegerAlpha) {
  PrecisionScope ps(60);
  EXPECT_THROW(fs_coefficients(Real(2), Real(-3), 3), IntegerAlphaError);
  // (1/Gamma)'(-m) = (-1)^m m!.
  auto c = integer_alpha_coefficients(Real(2), Real(-3), 3);
  EXPECT_EQ(c[0], 0);
  EXPECT_GE(agreement(c[1], Real(-3) * 2), 20);
  auto c3 = integer_alpha_coefficients(Real(3), Real("0.5"), 1);
  EXPECT_GE(agreement(c3[1], Real("0.5") * -6), 20);
}

TEST(Model, LogTestErrorShrinks) {
  PrecisionScope ps(60);
  auto ls = da::log_test_series(151);
  AsymptoticModel m = AsymptoticModel::make(Real(1), Real(2), Real(-3), 1 + exp(Real(1)));
  EXPECT_EQ(m.lambda, 4);
  for (unsigned k = 1; k <= 5; ++k) {
    Real prev = -1;
    for (std::size_t n : {100u, 125u, 150u}) {
      Real err = abs(model_predict(m, n, k) / to_real(ls[n]) - 1);
      if (prev >= 0) {
        EXPECT_LT(err, prev) << "k=" << k << " n=" << n;
      }
      prev = err;
    }
  }
}

TEST(Model, RatioExpansionCarriesMinusC1) {
  PrecisionScope ps(90);
  // r_n/mu = 1 - (alpha+1)/n + beta/(n L) - c1/(n L^2) + O(1/(n L^3)), L = log n.
  const Real alpha("0.5"), beta(1);
  AsymptoticModel m = AsymptoticModel::make(Real(1), alpha, beta);
  auto c = fs_coefficients(alpha, beta, 6);
  m.c = c;
  std::vector<Real> inv_l, est;
  for (double n : {1e6, 1e9, 1e12}) {
    auto k = static_cast<std::size_t>(n);
    Real x = rn(k);
    Real L = log(x);
    Real r = model_predict(m, k, 6) / model_predict(m, k - 1, 6);
    est.push_back((r - 1 + (alpha + 1) / x - beta / (x * L)) * x * L * L);
    inv_l.push_back(1 / L);
  }
  // Quadratic extrapolation in 1/L to 1/L = 0.
  Real limit = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    Real w = 1;
    for (std::size_t j = 0; j < 3; ++j)
      if (j != i) w *= inv_l[j] / (inv_l[j] - inv_l[i]);
    limit += w * est[i];
  }
  EXPECT_LT(abs(limit + c[1]), abs(c[1]) * Real("0.01")) << to_sci(limit, 10) << " c1 " << to_sci(c[1], 10);
  EXPECT_GT(abs(limit - c[1]), abs(c[1]));
}

TEST(Model, Validation) {
  AsymptoticModel m = AsymptoticModel::make(Real(2), Real("0.3"), Real(1));
  EXPECT_EQ(m.lambda, -1);
  m.lambda = 5;
  EXPECT_THROW(m.validate(), std::logic_error);
  EXPECT_THROW(model_predict(AsymptoticModel::make(Real(2), Real("0.3"), Real(1)), 1), std::invalid_argument);
}

TEST(Export, CsvLayout) {
  PrecisionScope ps(30);
  EstimatorSeries e{"ratios", Abscissa::inv_n, {}, {}};
  e.push(4, Real("2.5"));
  e.push(5, Real("2.25"));
  auto dir = std::filesystem::temp_directory_path() / "stacksort-csv-test";
  std::filesystem::remove_all(dir);
  auto p = export_csv(e, dir, 10);
  std::ifstream in(p);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "n,abscissa,value");
  EXPECT_EQ(row.substr(0, 2), "4,");
  EXPECT_NE(row.find("2.5"), std::string::npos);
  std::filesystem::remove_all(dir);
}
