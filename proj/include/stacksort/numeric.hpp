#pragma once

// Number types shared by every module: exact integers (GMP) and
// variable-precision reals (MPFR), plus the conversions between them.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace stacksort {

using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int, boost::multiprecision::et_off>;
using BigRational =
    boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;

/// Sets the default working precision (decimal digits) for newly created
/// Reals and restores the previous value on destruction.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned digits10) : saved_(Real::default_precision()) {
    Real::default_precision(digits10);
  }
  ~PrecisionScope() { Real::default_precision(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

inline unsigned working_digits() { return Real::default_precision(); }

inline Real to_real(const BigInt& z) {
  Real r;
  mpfr_set_z(r.backend().data(), z.backend().data(), MPFR_RNDN);
  return r;
}

inline Real to_real(const BigRational& q) {
  Real r;
  mpfr_set_q(r.backend().data(), q.backend().data(), MPFR_RNDN);
  return r;
}

/// Natural log of a positive big integer. MPFR carries a wide exponent
/// range, so values with thousands of digits never overflow.
inline Real log_big(const BigInt& z) {
  if (z <= 0) throw std::domain_error("log_big: non-positive argument");
  return boost::multiprecision::log(to_real(z));
}

/// Decimal digit count of |z| (z != 0).
inline std::size_t decimal_digits(const BigInt& z) {
  BigInt a = boost::multiprecision::abs(z);
  return a.str().size();
}

/// log10 of a positive big integer as a double (for reporting only).
inline double log10_big(const BigInt& z) {
  long exp2 = 0;
  double mant = mpz_get_d_2exp(&exp2, z.backend().data());
  return std::log10(mant) + static_cast<double>(exp2) * std::log10(2.0);
}

inline Real pi() { return boost::math::constants::pi<Real>(); }

/// Exact binary expansion of a finite Real as numerator / 2^k.
inline BigRational exact_rational(const Real& x) {
  if (x == 0) return BigRational(0);
  mpz_t m;
  mpz_init(m);
  mpfr_exp_t e = mpfr_get_z_2exp(m, x.backend().data());
  BigInt num;
  mpz_set(num.backend().data(), m);
  mpz_clear(m);
  BigRational q(num);
  if (e >= 0) {
    q *= BigRational(BigInt(1) << static_cast<unsigned>(e));
  } else {
    q /= BigRational(BigInt(1) << static_cast<unsigned>(-e));
  }
  return q;
}

inline std::string to_sci(const Real& x, int digits) {
  return x.str(digits, std::ios_base::scientific);
}

}  // namespace stacksort
