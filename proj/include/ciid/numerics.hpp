#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include "ciid/errors.hpp"

namespace ciid::num {

inline constexpr double kQuadTol = 1e-10;

inline double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(k));
}

// Adaptive Gauss-Kronrod on [a,b]; b may be +inf.
template <class F>
double integrate(F&& f, double a, double b, double tol = kQuadTol) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol, &err);
}

// Double-exponential rule for finite intervals with endpoint singularities.
template <class F>
double integrate_finite(F&& f, double a, double b, double tol = kQuadTol) {
  if (!(b > a)) return 0.0;
  static thread_local boost::math::quadrature::tanh_sinh<double> ts(10);
  return ts.integrate(f, a, b, tol);
}

// Largest x (up to tol) in [lo,hi] with pred(x) false, assuming pred is
// monotone false->true. Returns the midpoint of the final bracket.
template <class P>
double bisect(P&& pred, double lo, double hi, double tol) {
  for (int it = 0; it < 2000 && hi - lo > tol * std::max(1.0, std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid)) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Upper end of a doubling bracket [0,hi] with pred(hi) true.
template <class P>
double bracket_up(P&& pred, double start = 1.0, double limit = 1e300) {
  double hi = start;
  while (!pred(hi)) {
    hi *= 2.0;
    if (hi > limit) throw NumericalError("bracket search exceeded limit");
  }
  return hi;
}

// Generalized inverse inf{x >= 0 : f(x) <= u} of a non-increasing f.
template <class F>
double inverse_decreasing(F&& f, double u, double tol = 1e-12) {
  if (f(0.0) <= u) return 0.0;
  auto pred = [&](double x) { return f(x) <= u; };
  double hi = bracket_up(pred);
  return bisect(pred, 0.0, hi, tol);
}

// Determinant by LU with partial pivoting; a is row-major n x n.
inline double lu_determinant(std::vector<double> a, std::size_t n) {
  if (n == 0) return 1.0;
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[p * n + c])) p = r;
    if (a[p * n + c] == 0.0) return 0.0;
    if (p != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[p * n + k], a[c * n + k]);
      det = -det;
    }
    double piv = a[c * n + c];
    det *= piv;
    for (std::size_t r = c + 1; r < n; ++r) {
      double f = a[r * n + c] / piv;
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
    }
  }
  return det;
}

// Solves a x = b (row-major n x n) by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b, std::size_t n) {
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[p * n + c])) p = r;
    if (a[p * n + c] == 0.0) throw NumericalError("singular linear system");
    if (p != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[p * n + k], a[c * n + k]);
      std::swap(b[p], b[c]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      double f = a[r * n + c] / a[c * n + c];
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * x[k];
    x[i] = s / a[i * n + i];
  }
  return x;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Ascending order statistics.
inline std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace ciid::num
