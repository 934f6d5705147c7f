#pragma once

// Minimal complex arithmetic over Real. std::complex is unspecified for
// non-fundamental value types, and MPC is not a dependency.

#include "stacksort/numeric.hpp"

namespace stacksort::da {

struct Complex {
  Real re;
  Real im;

  Complex() : re(0), im(0) {}
  Complex(Real r) : re(std::move(r)), im(0) {}  // NOLINT(google-explicit-constructor)
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}

  Complex& operator+=(const Complex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Complex& operator-=(const Complex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Complex& operator*=(const Complex& o) {
    Real r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  Complex& operator/=(const Complex& o) {
    // Smith's algorithm avoids overflow in |o|^2.
    if (abs(o.re) >= abs(o.im)) {
      Real ratio = o.im / o.re;
      Real den = o.re + o.im * ratio;
      Real r = (re + im * ratio) / den;
      im = (im - re * ratio) / den;
      re = std::move(r);
    } else {
      Real ratio = o.re / o.im;
      Real den = o.re * ratio + o.im;
      Real r = (re * ratio + im) / den;
      im = (im * ratio - re) / den;
      re = std::move(r);
    }
    return *this;
  }

  friend Complex operator+(Complex a, const Complex& b) { return a += b; }
  friend Complex operator-(Complex a, const Complex& b) { return a -= b; }
  friend Complex operator*(Complex a, const Complex& b) { return a *= b; }
  friend Complex operator/(Complex a, const Complex& b) { return a /= b; }
  friend Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
};

inline Real abs(const Complex& z) { return boost::multiprecision::hypot(z.re, z.im); }

/// Horner evaluation of sum c[m] z^m.
inline Complex evaluate(const std::vector<Real>& c, const Complex& z) {
  Complex acc;
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    acc *= z;
    acc.re += *it;
  }
  return acc;
}

/// Value and derivative together.
inline std::pair<Complex, Complex> evaluate_with_derivative(const std::vector<Real>& c, const Complex& z) {
  Complex v;
  Complex d;
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    d *= z;
    d += v;
    v *= z;
    v.re += *it;
  }
  return {v, d};
}

}  // namespace stacksort::da
