#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "ciid/errors.hpp"
#include "ciid/numerics.hpp"
#include "ciid/rng.hpp"

namespace ciid {

// ---- Kendall's tau ----

namespace detail {
inline std::uint64_t tie_pairs(const std::vector<double>& sorted_vals) {
  std::uint64_t s = 0, run = 1;
  for (std::size_t i = 1; i <= sorted_vals.size(); ++i) {
    if (i < sorted_vals.size() && sorted_vals[i] == sorted_vals[i - 1]) {
      ++run;
    } else {
      s += run * (run - 1) / 2;
      run = 1;
    }
  }
  return s;
}

// Sorts v and returns the number of strict inversions.
inline std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = (lo + hi) / 2;
  std::uint64_t c = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      c += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return c;
}
}  // namespace detail

// Concordant minus discordant pairs over all n(n-1)/2 pairs; pairs tied in
// either coordinate count as neither (Knight's O(n log n) algorithm).
inline double empirical_kendall_tau(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "Kendall tau needs paired samples");
  std::size_t n = x.size();
  require(n >= 2, "Kendall tau needs n >= 2");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[idx[i]];
    ys[i] = y[idx[i]];
  }
  std::uint64_t n1 = detail::tie_pairs(xs), n3 = 0, run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && xs[i] == xs[i - 1] && ys[i] == ys[i - 1]) {
      ++run;
    } else {
      n3 += run * (run - 1) / 2;
      run = 1;
    }
  }
  std::vector<double> buf(n);
  std::uint64_t swaps = detail::merge_count(ys, buf, 0, n);
  std::uint64_t n2 = detail::tie_pairs(ys);
  double n0 = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  double num = n0 - static_cast<double>(n1) - static_cast<double>(n2) + static_cast<double>(n3) - 2.0 * static_cast<double>(swaps);
  return num / n0;
}

// Standard error of tau under independence.
inline double kendall_tau_stderr(std::size_t n) {
  double m = static_cast<double>(n);
  return std::sqrt(2.0 * (2.0 * m + 5.0) / (9.0 * m * (m - 1.0)));
}

struct CorrelationResult {
  double r = 0.0;
  double stderr = 0.0;
  std::size_t n = 0;
};

// Pearson correlation over rows where both entries are finite.
inline CorrelationResult empirical_correlation(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "correlation needs paired samples");
  double sx = 0, sy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::isfinite(x[i]) && std::isfinite(y[i])) {
      sx += x[i];
      sy += y[i];
      ++n;
    }
  require(n >= 3, "correlation needs at least 3 finite pairs");
  double mx = sx / n, my = sy / n, cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::isfinite(x[i]) && std::isfinite(y[i])) {
      cxy += (x[i] - mx) * (y[i] - my);
      cxx += (x[i] - mx) * (x[i] - mx);
      cyy += (y[i] - my) * (y[i] - my);
    }
  CorrelationResult res;
  res.n = n;
  res.r = (cxx > 0 && cyy > 0) ? cxy / std::sqrt(cxx * cyy) : 0.0;
  res.stderr = (1.0 - res.r * res.r) / std::sqrt(static_cast<double>(n) - 1.0);
  return res;
}

// ---- empirical distribution of one exchangeable row ----

struct EmpiricalDf {
  std::vector<double> breakpoints;
  std::vector<double> values;  // value on [breakpoints[i], breakpoints[i+1])

  double operator()(double t) const {
    std::size_t i = std::upper_bound(breakpoints.begin(), breakpoints.end(), t) - breakpoints.begin();
    return i == 0 ? 0.0 : values[i - 1];
  }
};

inline EmpiricalDf empirical_H(std::span<const double> row) {
  require(!row.empty(), "empirical_H needs d >= 1");
  auto s = num::sorted({row.begin(), row.end()});
  EmpiricalDf h;
  double d = static_cast<double>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 1 < s.size() && s[i + 1] == s[i]) continue;
    h.breakpoints.push_back(s[i]);
    h.values.push_back((i + 1) / d);
  }
  return h;
}

// sup_t |H_emp(t) - F(t)| for continuous F, checked at both sides of every jump.
template <class F>
double sup_distance(const EmpiricalDf& h, F&& cdf) {
  double sup = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < h.breakpoints.size(); ++i) {
    double f = cdf(h.breakpoints[i]);
    sup = std::max({sup, std::abs(f - prev), std::abs(f - h.values[i])});
    prev = h.values[i];
  }
  return sup;
}

// ---- majorization of order statistics ----

// h_{n,d}(p) = E[min(Bin(d,p), n)].
inline double majorization_bound(int n, int d, double p) {
  double s = 0.0;
  for (int i = 0; i <= d; ++i) {
    double w = num::binom(d, i) * std::pow(p, i) * std::pow(1.0 - p, d - i);
    s += w * std::min(i, n);
  }
  return s;
}

struct MajorizationResult {
  bool pass = true;
  double x = 0.0;
  double p = 0.0;  // F_1(x)
  std::vector<double> lhs, rhs, stderr;
};

using CdfFn = std::function<double(double)>;

// For n = 1..d-1: sum_{k<=n} P(X_[k] <= x) <= h_{n,d}(F_1(x)) + 3 stderr.
inline MajorizationResult majorization_report(const SampleMatrix& s, double x, const std::optional<CdfFn>& ref_marginal = std::nullopt) {
  require(s.n >= 2 && s.d >= 2, "majorization needs n >= 2 rows and d >= 2");
  MajorizationResult r;
  r.x = x;
  std::vector<int> N(s.n);
  std::size_t below = 0;
  for (std::size_t i = 0; i < s.n; ++i) {
    int c = 0;
    for (std::size_t j = 0; j < s.d; ++j) c += s(i, j) <= x;
    N[i] = c;
    below += c;
  }
  r.p = ref_marginal ? (*ref_marginal)(x) : static_cast<double>(below) / static_cast<double>(s.n * s.d);
  int d = static_cast<int>(s.d);
  for (int n = 1; n < d; ++n) {
    double m = 0, q = 0;
    for (int c : N) {
      double v = std::min(c, n);
      m += v;
      q += v * v;
    }
    m /= s.n;
    double var = std::max(0.0, q / s.n - m * m);
    double se = std::sqrt(var / s.n);
    double h = majorization_bound(n, d, r.p);
    r.lhs.push_back(m);
    r.rhs.push_back(h);
    r.stderr.push_back(se);
    if (m > h + 3.0 * se) r.pass = false;
  }
  return r;
}

inline bool majorization_check(const SampleMatrix& s, double x, const std::optional<CdfFn>& ref_marginal = std::nullopt) {
  return majorization_report(s, x, ref_marginal).pass;
}

// ---- radial symmetry ----

struct RadialResult {
  bool pass = true;
  double max_abs_z = 0.0;
  double critical = 0.0;
  int tests = 0;
};

// Paired z-tests of P(X - mu in A) = P(mu - X in A) for marginal half-lines and
// joint lower/upper orthants at radii given by quantiles of |X - mu|;
// Bonferroni-corrected at level alpha.
inline RadialResult radial_symmetry_report(const SampleMatrix& s, double mu, double alpha = 0.01) {
  require(s.n >= 2, "radial symmetry needs n >= 2");
  std::vector<double> dev;
  for (double v : s.data)
    if (std::isfinite(v)) dev.push_back(std::abs(v - mu));
  std::sort(dev.begin(), dev.end());
  std::vector<double> radii;
  for (double q : {0.2, 0.4, 0.6, 0.8}) {
    if (dev.empty()) break;
    radii.push_back(dev[static_cast<std::size_t>(q * (dev.size() - 1))]);
  }
  std::vector<double> zs;
  auto ztest = [&](auto&& lower, auto&& upper) {
    double m = 0, q = 0;
    for (std::size_t i = 0; i < s.n; ++i) {
      double v = static_cast<double>(lower(i)) - static_cast<double>(upper(i));
      m += v;
      q += v * v;
    }
    m /= s.n;
    double var = q / s.n - m * m;
    if (var <= 0.0) {
      if (m != 0.0) zs.push_back(kInf);
      return;
    }
    zs.push_back(m / std::sqrt(var / s.n));
  };
  for (double t : radii) {
    if (!(t > 0.0)) continue;
    for (std::size_t k = 0; k < s.d; ++k)
      ztest([&](std::size_t i) { return s(i, k) - mu <= -t; }, [&](std::size_t i) { return s(i, k) - mu >= t; });
    if (s.d >= 2)
      ztest(
          [&](std::size_t i) {
            for (std::size_t k = 0; k < s.d; ++k)
              if (!(s(i, k) - mu <= -t)) return false;
            return true;
          },
          [&](std::size_t i) {
            for (std::size_t k = 0; k < s.d; ++k)
              if (!(s(i, k) - mu >= t)) return false;
            return true;
          });
  }
  RadialResult r;
  r.tests = static_cast<int>(zs.size());
  if (zs.empty()) return r;
  boost::math::normal_distribution<double> nd;
  r.critical = boost::math::quantile(boost::math::complement(nd, alpha / (2.0 * zs.size())));
  for (double z : zs) r.max_abs_z = std::max(r.max_abs_z, std::abs(z));
  r.pass = r.max_abs_z <= r.critical;
  return r;
}

inline bool radial_symmetry_test(const SampleMatrix& s, double mu) { return radial_symmetry_report(s, mu).pass; }

inline double tie_frequency(const SampleMatrix& s) {
  require(s.d >= 2, "tie frequency needs d >= 2");
  if (s.n == 0) return 0.0;
  std::size_t ties = 0;
  std::vector<double> r(s.d);
  for (std::size_t i = 0; i < s.n; ++i) {
    auto row = s.row(i);
    std::copy(row.begin(), row.end(), r.begin());
    std::sort(r.begin(), r.end());
    if (std::adjacent_find(r.begin(), r.end()) != r.end()) ++ties;
  }
  return static_cast<double>(ties) / static_cast<double>(s.n);
}

// ---- Scarsini's counterexample ----

// M ~ U[0,1/2]; given M, X_k iid on {1/2 - M, 1/2 + M} with equal weights.
inline RowSampler scarsini_sampler() {
  return {2,
          [](Rng& rng, std::span<double> x) {
            double m = 0.5 * rng.uniform();
            for (double& v : x) v = rng.uniform() < 0.5 ? 0.5 - m : 0.5 + m;
          },
          "scarsini"};
}

inline SampleMatrix scarsini_model(std::size_t n, Rng& rng) { return draw_matrix(scarsini_sampler(), n, rng); }

inline double scarsini_cdf(double x1, double x2) {
  x1 = std::clamp(x1, 0.0, 1.0);
  x2 = std::clamp(x2, 0.0, 1.0);
  return 0.5 * std::min(x1, x2) + 0.5 * std::max(0.0, x1 + x2 - 1.0);
}

// ---- generic sampler for closed-form survival functions on [0, inf)^d ----

using Evaluator = std::function<double(std::span<const double>)>;

struct InversionOptions {
  double h_rel = 1e-5;
  // the mixed partial divides by h^2, so it needs a coarser step
  double h_mixed_rel = 1e-3;
  double tol = 1e-10;
};

namespace detail {

// Bisection for inf{y >= 0 : c(y) <= u} of a conditional survival c with
// c(0) = 1, checking monotonicity along the way.
template <class C>
double invert_conditional(C&& c, double u, double tol) {
  double lo = 0.0, clo = 1.0, hi = 1.0, chi = c(hi);
  while (chi > u) {
    if (chi > clo + 1e-6) throw NumericalError("non-monotone conditional survival function");
    lo = hi;
    clo = chi;
    hi *= 2.0;
    if (hi > 1e300) throw NumericalError("conditional inversion bracket overflow");
    chi = c(hi);
  }
  while (hi - lo > tol * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double cm = c(mid);
    if (cm > clo + 1e-6 || cm < chi - 1e-6) throw NumericalError("non-monotone conditional survival function");
    if (cm <= u) {
      hi = mid;
      chi = cm;
    } else {
      lo = mid;
      clo = cm;
    }
  }
  return hi;
}

inline double partial(const Evaluator& S, std::vector<double> x, std::size_t k, double h) {
  double x0 = x[k];
  if (x0 >= h) {
    x[k] = x0 + h;
    double a = S(x);
    x[k] = x0 - h;
    double b = S(x);
    return (a - b) / (2.0 * h);
  }
  x[k] = x0 + h;
  double a = S(x);
  x[k] = x0;
  return (a - S(x)) / h;
}

inline double mixed_partial(const Evaluator& S, std::vector<double> x, double h) {
  double x0 = x[0], x1 = x[1], h0 = std::min(h, x0), h1 = std::min(h, x1);
  auto at = [&](double a, double b) {
    x[0] = a;
    x[1] = b;
    return S(x);
  };
  double lo0 = x0 - h0, lo1 = x1 - h1;
  return (at(x0 + h, x1 + h) - at(x0 + h, lo1) - at(lo0, x1 + h) + at(lo0, lo1)) / ((h + h0) * (h + h1));
}

}  // namespace detail

// Sequential inversion: X_1 from the marginal, X_2 from the conditional given
// X_1 via finite-difference partials, X_3 from the conditional given (X_1,X_2)
// (jump ratio when X_2 ties with X_1).
inline RowSampler conditional_inversion_sampler(Evaluator S, int d, InversionOptions opt = {}) {
  require(d >= 1 && d <= 3, "conditional inversion sampler supports d <= 3");
  return {static_cast<std::size_t>(d),
          [S, d, opt](Rng& rng, std::span<double> out) {
            std::vector<double> z(d, 0.0);
            auto marg = [&](double y) {
              std::vector<double> v(d, 0.0);
              v[0] = y;
              return S(v);
            };
            double x1 = detail::invert_conditional(marg, rng.uniform(), opt.tol);
            out[0] = x1;
            if (d == 1) return;
            double h1 = opt.h_rel * std::max(1.0, x1);
            std::vector<double> base(d, 0.0);
            base[0] = x1;
            double den = -detail::partial(S, base, 0, h1);
            if (!(den > 0.0)) throw NumericalError("vanishing marginal density in conditional inversion");
            auto c1 = [&](double y2, double y3) {
              std::vector<double> v(d, 0.0);
              v[0] = x1;
              v[1] = y2;
              if (d == 3) v[2] = y3;
              return -detail::partial(S, v, 0, h1) / den;
            };
            double x2 = detail::invert_conditional([&](double y) { return c1(y, 0.0); }, rng.uniform(), opt.tol);
            double w = 20.0 * h1;
            double jump = c1(std::max(0.0, x1 - w), 0.0) - c1(x1 + w, 0.0);
            bool tie = std::abs(x2 - x1) <= w && jump > 1e-6;
            if (tie) x2 = x1;
            out[1] = x2;
            if (d == 2) return;
            double u3 = rng.uniform();
            double x3;
            if (tie) {
              auto c2 = [&](double y) { return (c1(std::max(0.0, x1 - w), y) - c1(x1 + w, y)) / jump; };
              x3 = detail::invert_conditional(c2, u3, opt.tol);
            } else {
              double h = opt.h_mixed_rel * std::max(1.0, std::min(x1, x2));
              std::vector<double> v{x1, x2, 0.0};
              double den2 = detail::mixed_partial(S, v, h);
              if (!(den2 > 0.0)) throw NumericalError("vanishing conditional density in conditional inversion");
              auto c2 = [&](double y) {
                std::vector<double> vv{x1, x2, y};
                return detail::mixed_partial(S, vv, h) / den2;
              };
              x3 = detail::invert_conditional(c2, u3, opt.tol);
            }
            out[2] = x3;
          },
          "conditional inversion"};
}

inline SampleMatrix sample_conditional_inversion(Evaluator S, int d, std::size_t n, Rng& rng, InversionOptions opt = {}) {
  return draw_matrix(conditional_inversion_sampler(std::move(S), d, opt), n, rng);
}

// ---- Monte Carlo oracle harness ----

enum class ProbabilityKind { survival, cdf };

inline constexpr double kMcAbsFloor = 1e-3;
inline constexpr double kMcSigmas = 3.0;

using Grid = std::vector<std::vector<double>>;

struct McReport {
  Grid grid;
  std::vector<double> closed;
  std::vector<double> empirical;
  std::vector<double> stderr;
  bool pass = true;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  ProbabilityKind kind = ProbabilityKind::survival;
};

// Fraction of rows with X > g (survival) or X <= g (cdf) componentwise.
inline double empirical_probability(const SampleMatrix& s, std::span<const double> g, ProbabilityKind kind) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < s.n; ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < s.d && ok; ++j) ok = kind == ProbabilityKind::survival ? s(i, j) > g[j] : s(i, j) <= g[j];
    hit += ok;
  }
  return static_cast<double>(hit) / static_cast<double>(s.n);
}

inline McReport mc_report(const SampleMatrix& s, const Evaluator& closed, const Grid& grid,
                          ProbabilityKind kind = ProbabilityKind::survival) {
  McReport r;
  r.grid = grid;
  r.n = s.n;
  r.seed = s.seed;
  r.kind = kind;
  for (const auto& g : grid) {
    require(g.size() == s.d, "grid point dimension mismatch");
    double e = empirical_probability(s, g, kind), c = closed(g);
    double se = std::sqrt(e * (1.0 - e) / static_cast<double>(s.n));
    r.closed.push_back(c);
    r.empirical.push_back(e);
    r.stderr.push_back(se);
    if (!(std::abs(e - c) <= kMcSigmas * se + kMcAbsFloor)) r.pass = false;
  }
  return r;
}

// Deterministic given seed; rows fan out over seeded streams.
inline McReport mc_verify(const RowSampler& sampler, const Evaluator& closed, const Grid& grid, std::size_t n,
                          std::uint64_t seed, ProbabilityKind kind = ProbabilityKind::survival, unsigned threads = 1) {
  auto s = draw_matrix_parallel(sampler, n, seed, threads);
  return mc_report(s, closed, grid, kind);
}

// Two-sample grid comparison; "closed" holds the second sample's frequencies
// and stderr the combined standard error.
inline McReport compare_samples(const SampleMatrix& a, const SampleMatrix& b, const Grid& grid,
                                ProbabilityKind kind = ProbabilityKind::survival) {
  require(a.d == b.d, "samples must have equal dimension");
  McReport r;
  r.grid = grid;
  r.n = a.n;
  r.seed = a.seed;
  r.kind = kind;
  for (const auto& g : grid) {
    double pa = empirical_probability(a, g, kind), pb = empirical_probability(b, g, kind);
    double se = std::sqrt(pa * (1 - pa) / a.n + pb * (1 - pb) / b.n);
    r.empirical.push_back(pa);
    r.closed.push_back(pb);
    r.stderr.push_back(se);
    if (!(std::abs(pa - pb) <= kMcSigmas * se + kMcAbsFloor)) r.pass = false;
  }
  return r;
}

inline const std::vector<double>& grid_levels() {
  static const std::vector<double> q{0.1, 0.25, 0.5, 0.75, 0.9};
  return q;
}

// Ten points from marginal quantiles: five diagonal points and five cyclic
// shifts (q_i, q_{i+1}, ..., q_{i+d-1}).
inline Grid quantile_grid(const std::function<double(double)>& quantile, int d) {
  const auto& q = grid_levels();
  std::vector<double> v;
  for (double p : q) v.push_back(quantile(p));
  Grid g;
  for (std::size_t i = 0; i < v.size(); ++i) g.push_back(std::vector<double>(d, v[i]));
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::vector<double> p(d);
    for (int k = 0; k < d; ++k) p[k] = v[(i + k) % v.size()];
    g.push_back(p);
  }
  return g;
}

// Pooled empirical quantile of all finite entries.
inline std::function<double(double)> pooled_quantile(const SampleMatrix& s) {
  std::vector<double> v;
  for (double x : s.data)
    if (std::isfinite(x)) v.push_back(x);
  std::sort(v.begin(), v.end());
  require(!v.empty(), "sample has no finite entries");
  return [v](double p) { return v[static_cast<std::size_t>(std::clamp(p, 0.0, 1.0) * (v.size() - 1))]; };
}

inline Grid empirical_quantile_grid(const SampleMatrix& s) { return quantile_grid(pooled_quantile(s), static_cast<int>(s.d)); }

}  // namespace ciid
