#pragma once

// All complex roots of a real polynomial by Aberth-Ehrlich simultaneous
// iteration in working precision.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "stacksort/diffapprox/complex.hpp"

namespace stacksort::da {

class RootFindingError : public std::runtime_error {
 public:
  RootFindingError(const std::string& what, std::vector<Real> residuals)
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<Real>& residuals() const { return residuals_; }

 private:
  std::vector<Real> residuals_;
};

/// |p(z)| / sum |c_m| |z|^m: backward-error style residual.
inline Real relative_residual(const std::vector<Real>& c, const Complex& z) {
  Real scale = 0;
  Real r = abs(z);
  for (auto it = c.rbegin(); it != c.rend(); ++it) scale = scale * r + abs(*it);
  if (scale == 0) return Real(0);
  return abs(evaluate(c, z)) / scale;
}

struct RootOptions {
  int max_iterations = 2000;
  /// A root is accepted when its correction or its relative residual is
  /// below 10^-(digits - slack).
  int slack_digits = 5;
};

/// Roots of sum coeffs[m] z^m, counted with multiplicity. Trailing zero
/// leading coefficients are dropped; the rest must be non-zero.
inline std::vector<Complex> polynomial_roots(std::vector<Real> coeffs, const RootOptions& opt = {}) {
  while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
  if (coeffs.size() < 2) return {};
  // Exact zero roots.
  std::size_t zeros = 0;
  while (coeffs[zeros] == 0) ++zeros;
  std::vector<Real> c(coeffs.begin() + static_cast<std::ptrdiff_t>(zeros), coeffs.end());
  const std::size_t deg = c.size() - 1;
  std::vector<Complex> z(deg);
  std::vector<Complex> out(zeros, Complex{});
  if (deg == 0) return out;

  // Initial guesses on a circle whose radius is the geometric mean of the
  // root moduli, with an irrational angular offset to break symmetry.
  const Real radius = pow(abs(c.front() / c.back()), Real(1) / Real(deg));
  const Real two_pi = 2 * pi();
  for (std::size_t i = 0; i < deg; ++i) {
    Real ang = two_pi * Real(i) / Real(deg) + Real(0.4);
    z[i] = Complex(radius * cos(ang), radius * sin(ang));
  }

  const unsigned digits = working_digits();
  const Real tol = pow(Real(10), -static_cast<int>(digits) + opt.slack_digits);
  std::vector<bool> done(deg, false);
  for (int it = 0; it < opt.max_iterations; ++it) {
    bool all_done = true;
    for (std::size_t i = 0; i < deg; ++i) {
      if (done[i]) continue;
      auto [v, d] = evaluate_with_derivative(c, z[i]);
      if (v.re == 0 && v.im == 0) {
        done[i] = true;
        continue;
      }
      Complex ratio = v / d;
      Complex sum;
      for (std::size_t j = 0; j < deg; ++j) {
        if (j != i) sum += Complex(Real(1)) / (z[i] - z[j]);
      }
      Complex w = ratio / (Complex(Real(1)) - ratio * sum);
      z[i] -= w;
      if (abs(w) <= tol * abs(z[i]) || relative_residual(c, z[i]) <= tol) {
        done[i] = true;
      } else {
        all_done = false;
      }
    }
    if (all_done) {
      out.insert(out.end(), z.begin(), z.end());
      return out;
    }
  }
  std::vector<Real> residuals;
  residuals.reserve(deg);
  for (const auto& r : z) residuals.push_back(relative_residual(c, r));
  throw RootFindingError("Aberth iteration did not converge for degree " + std::to_string(deg), residuals);
}

}  // namespace stacksort::da
