#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ciid/diagnostics.hpp"
#include "ciid/rng.hpp"

namespace testing_support {

// sup |F_n - F| of one sample against a continuous df.
template <class F>
double ks_distance(std::vector<double> xs, F&& cdf) {
  std::sort(xs.begin(), xs.end());
  double n = static_cast<double>(xs.size()), sup = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    sup = std::max({sup, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return sup;
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < a.size() && j < b.size()) {
    double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    sup = std::max(sup, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return sup;
}

// 1% critical values
inline double ks_crit(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }
inline double ks_crit(std::size_t n, std::size_t m) {
  return 1.63 * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

inline double binom_se(double p, std::size_t n) { return std::sqrt(std::max(p * (1 - p), 1e-12) / n); }

inline double surv(const ciid::SampleMatrix& s, std::vector<double> x) {
  return ciid::empirical_probability(s, x, ciid::ProbabilityKind::survival);
}
inline double cdf(const ciid::SampleMatrix& s, std::vector<double> x) {
  return ciid::empirical_probability(s, x, ciid::ProbabilityKind::cdf);
}

}  // namespace testing_support

#define EXPECT_MC(emp, exact, n)                                                                       \
  do {                                                                                                 \
    double e_ = (emp), x_ = (exact);                                                                   \
    EXPECT_LE(std::abs(e_ - x_), 3.0 * testing_support::binom_se(x_, (n)) + 1e-3) << "emp " << e_ << " exact " << x_; \
  } while (0)
