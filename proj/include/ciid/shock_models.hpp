#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "ciid/errors.hpp"
#include "ciid/lack_of_memory.hpp"
#include "ciid/numerics.hpp"
#include "ciid/rng.hpp"

// One-dimensional shock survival functions on [0, inf).
namespace ciid::shock {

struct Exponential {
  double rate = 1.0;  // 0 means the shock never arrives
};
// exp(-(x/scale)^shape)
struct Weibull {
  double scale = 1.0;
  double shape = 1.0;
};
// (1 + x)^-alpha
struct Pareto {
  double alpha = 1.0;
};
// values[0] on [0, t_1), values[i] on [t_i, t_{i+1}); non-increasing.
struct Step {
  std::vector<double> points;
  std::vector<double> values;
};

}  // namespace ciid::shock

// Base distribution functions for the Dirichlet prior.
namespace ciid::base {
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};
struct Exponential {
  double rate = 1.0;
};
struct Normal {
  double mu = 0.0;
  double sigma = 1.0;
};
}  // namespace ciid::base

namespace ciid {

using ShockLaw = std::variant<shock::Exponential, shock::Weibull, shock::Pareto, shock::Step>;
using BaseDf = std::variant<base::Uniform, base::Exponential, base::Normal>;

// Survival functions Hbar_1..Hbar_d indexed by shock cardinality.
struct ShockSurvivalSpec {
  std::vector<ShockLaw> hbar;
  int d() const { return static_cast<int>(hbar.size()); }
};

inline double survival(const ShockLaw& h, double x) {
  if (x < 0.0) return 1.0;
  return std::visit(detail::overloaded{
                        [&](const shock::Exponential& e) { return e.rate == 0.0 ? 1.0 : std::exp(-e.rate * x); },
                        [&](const shock::Weibull& w) { return std::exp(-std::pow(x / w.scale, w.shape)); },
                        [&](const shock::Pareto& p) { return std::pow(1.0 + x, -p.alpha); },
                        [&](const shock::Step& s) {
                          std::size_t i = std::upper_bound(s.points.begin(), s.points.end(), x) - s.points.begin();
                          return s.values[i];
                        },
                    },
                    h);
}

inline bool never_arrives(const ShockLaw& h) {
  if (auto* e = std::get_if<shock::Exponential>(&h)) return e->rate == 0.0;
  if (auto* s = std::get_if<shock::Step>(&h))
    return std::all_of(s->values.begin(), s->values.end(), [](double v) { return v == 1.0; });
  return false;
}

// Inversion: inf{x : Hbar(x) <= u}; +inf when the law has mass at infinity.
inline double sample(const ShockLaw& h, Rng& rng) {
  double u = rng.uniform();
  return std::visit(detail::overloaded{
                        [&](const shock::Exponential& e) { return e.rate == 0.0 ? kInf : -std::log(u) / e.rate; },
                        [&](const shock::Weibull& w) { return w.scale * std::pow(-std::log(u), 1.0 / w.shape); },
                        [&](const shock::Pareto& p) { return std::pow(u, -1.0 / p.alpha) - 1.0; },
                        [&](const shock::Step& s) {
                          if (s.values[0] <= u) return 0.0;
                          for (std::size_t i = 0; i < s.points.size(); ++i)
                            if (s.values[i + 1] <= u) return s.points[i];
                          return kInf;
                        },
                    },
                    h);
}

inline void validate(const ShockLaw& h) {
  std::visit(detail::overloaded{
                 [](const shock::Exponential& e) { require(std::isfinite(e.rate) && e.rate >= 0.0, "shock rate must be >= 0"); },
                 [](const shock::Weibull& w) {
                   require(w.scale > 0.0 && w.shape > 0.0 && std::isfinite(w.scale) && std::isfinite(w.shape),
                           "Weibull shock needs scale, shape > 0");
                 },
                 [](const shock::Pareto& p) { require(p.alpha > 0.0 && std::isfinite(p.alpha), "Pareto shock needs alpha > 0"); },
                 [](const shock::Step& s) {
                   require(s.values.size() == s.points.size() + 1, "step survival needs one more value than points");
                   for (std::size_t i = 0; i < s.points.size(); ++i) {
                     require(s.points[i] > 0.0, "step points must be > 0");
                     if (i) require(s.points[i] > s.points[i - 1], "step points must increase");
                   }
                   for (std::size_t i = 0; i < s.values.size(); ++i) {
                     require(s.values[i] >= 0.0 && s.values[i] <= 1.0, "survival values must lie in [0,1]");
                     if (i) require(s.values[i] <= s.values[i - 1], "survival values must be non-increasing");
                   }
                 },
             },
             h);
}

inline void validate(const ShockSurvivalSpec& s) {
  require(s.d() >= 1 && s.d() <= kMaxShockDim, "shock models need 1 <= d <= 20");
  bool any = false;
  for (const auto& h : s.hbar) {
    validate(h);
    any = any || !never_arrives(h);
  }
  require(any, "at least one shock cardinality must be active");
}

// Fbar_1(x) = prod_m Hbar_m(x)^C(d-1, m-1).
inline double exshock_marginal_survival(const ShockSurvivalSpec& s, double x) {
  int d = s.d();
  double lp = 0.0;
  for (int m = 1; m <= d; ++m) {
    if (never_arrives(s.hbar[m - 1])) continue;
    double h = survival(s.hbar[m - 1], x);
    if (h <= 0.0) return 0.0;
    lp += num::binom(d - 1, m - 1) * std::log(h);
  }
  return std::exp(lp);
}

// Fbar(x) = prod_I Hbar_|I|(max_{k in I} x_k), grouped by order statistics.
inline double exshock_survival(const ShockSurvivalSpec& s, std::span<const double> x) {
  int d = s.d();
  require(static_cast<int>(x.size()) == d, "dimension mismatch");
  auto xs = num::sorted({x.begin(), x.end()});
  double lp = 0.0;
  for (int j = 1; j <= d; ++j)
    for (int m = 1; m <= j; ++m) {
      if (never_arrives(s.hbar[m - 1])) continue;
      double h = survival(s.hbar[m - 1], xs[j - 1]);
      if (h <= 0.0) return 0.0;
      lp += num::binom(j - 1, m - 1) * std::log(h);
    }
  return std::exp(lp);
}

inline RowSampler exshock_sampler(const ShockSurvivalSpec& spec) {
  validate(spec);
  int d = spec.d();
  return {static_cast<std::size_t>(d),
          [spec, d](Rng& rng, std::span<double> x) {
            std::fill(x.begin(), x.end(), kInf);
            for (SubsetMask I = 1; I < (SubsetMask(1) << d); ++I) {
              const auto& h = spec.hbar[popcount(I) - 1];
              if (never_arrives(h)) continue;
              double e = sample(h, rng);
              for (int k = 0; k < d; ++k)
                if (I >> k & 1u) x[k] = std::min(x[k], e);
            }
          },
          "exogenous shocks"};
}

inline SampleMatrix exshock_sample(const ShockSurvivalSpec& spec, int d, std::size_t n, Rng& rng) {
  require(spec.d() == d, "dimension mismatch");
  return draw_matrix(exshock_sampler(spec), n, rng);
}

// Survival copula u_[1] prod_{k>=2} g_k(u_[k]).
inline double exshock_copula_eval(const ShockSurvivalSpec& spec, std::span<const double> u) {
  validate(spec);
  int d = spec.d();
  require(static_cast<int>(u.size()) == d, "dimension mismatch");
  for (double v : u) require(v >= 0.0 && v <= 1.0, "copula arguments must lie in [0,1]");
  auto us = num::sorted({u.begin(), u.end()});
  if (us[0] == 0.0) return 0.0;
  std::map<double, double> cache;
  auto inv = [&](double v) {
    auto it = cache.find(v);
    if (it != cache.end()) return it->second;
    double x = num::inverse_decreasing([&](double t) { return exshock_marginal_survival(spec, t); }, v, 1e-12);
    cache.emplace(v, x);
    return x;
  };
  double c = us[0];
  for (int k = 2; k <= d; ++k) {
    double v = us[k - 1];
    if (v >= 1.0) continue;
    double x = inv(v), lg = 0.0;
    for (int m = 1; m <= d - k + 1; ++m) {
      if (never_arrives(spec.hbar[m - 1])) continue;
      double h = survival(spec.hbar[m - 1], x);
      if (h <= 0.0) return 0.0;
      lg += num::binom(d - k, m - 1) * std::log(h);
    }
    c *= std::exp(lg);
  }
  return c;
}

// ---- additive subordinators ----

inline double base_cdf(const BaseDf& g, double x) {
  return std::visit(detail::overloaded{
                        [&](const base::Uniform& u) { return std::clamp((x - u.lo) / (u.hi - u.lo), 0.0, 1.0); },
                        [&](const base::Exponential& e) { return x <= 0.0 ? 0.0 : -std::expm1(-e.rate * x); },
                        [&](const base::Normal& n) { return num::normal_cdf((x - n.mu) / n.sigma); },
                    },
                    g);
}

inline double base_sample(const BaseDf& g, Rng& rng) {
  return std::visit(detail::overloaded{
                        [&](const base::Uniform& u) { return u.lo + (u.hi - u.lo) * rng.uniform(); },
                        [&](const base::Exponential& e) { return rng.exponential() / e.rate; },
                        [&](const base::Normal& n) { return n.mu + n.sigma * rng.normal(); },
                    },
                    g);
}

inline double base_quantile(const BaseDf& g, double p) {
  return std::visit(detail::overloaded{
                        [&](const base::Uniform& u) { return u.lo + (u.hi - u.lo) * p; },
                        [&](const base::Exponential& e) { return -std::log1p(-p) / e.rate; },
                        [&](const base::Normal& n) {
                          return n.mu + n.sigma * std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
                        },
                    },
                    g);
}

inline void validate(const BaseDf& g) {
  std::visit(detail::overloaded{
                 [](const base::Uniform& u) { require(u.hi > u.lo && std::isfinite(u.lo) && std::isfinite(u.hi), "uniform base needs lo < hi"); },
                 [](const base::Exponential& e) { require(e.rate > 0.0 && std::isfinite(e.rate), "exponential base needs rate > 0"); },
                 [](const base::Normal& n) { require(n.sigma > 0.0 && std::isfinite(n.mu), "normal base needs sigma > 0"); },
             },
             g);
}

namespace additive {
// Levy pieces on [t_{i-1}, t_i) with t_0 = 0; pieces.size() == breakpoints.size() + 1.
struct PiecewiseLevy {
  std::vector<double> breakpoints;
  std::vector<CompoundPoissonSubordinatorSpec> pieces;
};
struct DirichletPrior {
  double c = 1.0;
  BaseDf G = base::Uniform{};
};
// Psi_t(x) = alpha log(1 + x t).
struct Sato {
  double alpha = 1.0;
};
}  // namespace additive

using AdditiveFamilySpec = std::variant<additive::PiecewiseLevy, additive::DirichletPrior, additive::Sato>;

inline void validate(const AdditiveFamilySpec& s) {
  std::visit(detail::overloaded{
                 [](const additive::PiecewiseLevy& p) {
                   require(p.pieces.size() == p.breakpoints.size() + 1, "need one Levy piece per interval");
                   for (std::size_t i = 0; i < p.breakpoints.size(); ++i) {
                     require(p.breakpoints[i] > 0.0, "breakpoints must be > 0");
                     if (i) require(p.breakpoints[i] > p.breakpoints[i - 1], "breakpoints must increase");
                   }
                   for (const auto& q : p.pieces) validate(q);
                 },
                 [](const additive::DirichletPrior& p) {
                   require(p.c > 0.0 && std::isfinite(p.c), "Dirichlet prior needs c > 0");
                   validate(p.G);
                 },
                 [](const additive::Sato& s) { require(s.alpha > 0.0 && std::isfinite(s.alpha), "Sato needs alpha > 0"); },
             },
             s);
}

inline double dp_laplace_exponent_integral(double c, double Gt, double x) {
  if (x <= 0.0) return 0.0;
  if (Gt >= 1.0) return kInf;
  double a = c * (1.0 - Gt);
  auto f = [&](double u) {
    if (u <= 0.0) return x * c * Gt;
    return -std::expm1(-x * u) * (std::exp(-u * a) - std::exp(-u * c)) / (u * -std::expm1(-u));
  };
  return num::integrate(f, 0.0, kInf, 1e-12);
}

// Laplace exponent of the Dirichlet-prior increment Z_t: integer k in closed
// form, real x by quadrature.
inline double dp_laplace_exponent(double c, double Gt, double x) {
  if (x <= 0.0) return 0.0;
  if (Gt >= 1.0) return kInf;
  double r = std::round(x);
  if (std::abs(x - r) < 1e-15) {
    double s = 0.0;
    for (int i = 0; i < static_cast<int>(r); ++i) s -= std::log((c * (1.0 - Gt) + i) / (c + i));
    return s;
  }
  return dp_laplace_exponent_integral(c, Gt, x);
}

// Psi_t(x) of the additive family.
inline double additive_exponent(const AdditiveFamilySpec& s, double t, double x) {
  if (t <= 0.0 || x <= 0.0) return 0.0;
  return std::visit(detail::overloaded{
                        [&](const additive::PiecewiseLevy& p) {
                          double acc = 0.0, lo = 0.0;
                          for (std::size_t i = 0; i < p.pieces.size(); ++i) {
                            double hi = i < p.breakpoints.size() ? p.breakpoints[i] : kInf;
                            double len = std::min(t, hi) - lo;
                            if (len <= 0.0) break;
                            acc += len * p.pieces[i].laplace_exponent(x);
                            lo = hi;
                          }
                          return acc;
                        },
                        [&](const additive::DirichletPrior& p) { return dp_laplace_exponent(p.c, base_cdf(p.G, t), x); },
                        [&](const additive::Sato& s) { return s.alpha * std::log1p(x * t); },
                    },
                    s);
}

// prod_k exp(-[Psi_{x_[d-k+1]}(k) - Psi_{x_[d-k+1]}(k-1)]).
inline double additive_survival(const AdditiveFamilySpec& spec, std::span<const double> x) {
  validate(spec);
  auto xs = num::sorted({x.begin(), x.end()});
  int d = static_cast<int>(xs.size());
  double e = 0.0;
  for (int k = 1; k <= d; ++k) {
    double t = xs[d - k];
    require(t >= 0.0, "coordinates must be >= 0");
    double hi = additive_exponent(spec, t, k), lo = additive_exponent(spec, t, k - 1);
    if (std::isinf(hi)) return 0.0;
    e += hi - lo;
  }
  return std::exp(-e);
}

// Predictive urn: X_1 ~ G; X_{k+1} repeats a uniformly chosen earlier value
// with probability k/(c+k), else a fresh G draw.
inline RowSampler dp_sampler(double c, const BaseDf& G, int d) {
  require(c > 0.0 && std::isfinite(c), "c must be > 0");
  validate(G);
  require(d >= 1, "d must be >= 1");
  return {static_cast<std::size_t>(d),
          [c, G](Rng& rng, std::span<double> x) {
            for (std::size_t k = 0; k < x.size(); ++k) {
              if (k > 0 && rng.uniform() * (c + k) < k)
                x[k] = x[rng.below(k)];
              else
                x[k] = base_sample(G, rng);
            }
          },
          "dirichlet_prior urn"};
}

inline SampleMatrix sample_dp(double c, const BaseDf& G, int d, std::size_t n, Rng& rng) {
  return draw_matrix(dp_sampler(c, G, d), n, rng);
}

// u_[1] prod_{k>=2} (c u_[k] + k - 1) / (c + k - 1).
inline double dp_copula_eval(double c, std::span<const double> u) {
  require(c > 0.0, "c must be > 0");
  for (double v : u) require(v >= 0.0 && v <= 1.0, "copula arguments must lie in [0,1]");
  auto us = num::sorted({u.begin(), u.end()});
  double r = us.empty() ? 1.0 : us[0];
  for (std::size_t k = 2; k <= us.size(); ++k) r *= (c * us[k - 1] + k - 1) / (c + k - 1);
  return r;
}

// (prod_k ((d-k) x_[k] + 1) / ((d-k+1) x_[k] + 1))^alpha.
inline double sato_survival(double alpha, std::span<const double> x) {
  require(alpha > 0.0, "alpha must be > 0");
  auto xs = num::sorted({x.begin(), x.end()});
  int d = static_cast<int>(xs.size());
  double lr = 0.0;
  for (int k = 1; k <= d; ++k) {
    require(xs[k - 1] >= 0.0, "coordinates must be >= 0");
    lr += std::log1p((d - k) * xs[k - 1]) - std::log1p((d - k + 1) * xs[k - 1]);
  }
  return std::exp(alpha * lr);
}

// ---- Bernstein functions and self-decomposability ----

namespace bernstein {
struct Gamma {
  double alpha = 1.0;  // alpha log(1 + x)
};
struct Stable {
  double theta = 0.5;  // x^theta
};
}  // namespace bernstein

using BernsteinSpec = std::variant<CompoundPoissonSubordinatorSpec, bernstein::Gamma, bernstein::Stable>;

inline double bernstein_eval(const BernsteinSpec& s, double x) {
  if (x <= 0.0) return 0.0;
  return std::visit(detail::overloaded{
                        [&](const CompoundPoissonSubordinatorSpec& c) { return c.laplace_exponent(x); },
                        [&](const bernstein::Gamma& g) { return g.alpha * std::log1p(x); },
                        [&](const bernstein::Stable& g) { return std::pow(x, g.theta); },
                    },
                    s);
}

namespace detail {
// Sixth-order central difference of order 1, 2 or 3 with step h.
template <class F>
double central_diff(F&& f, double x, double h, int order) {
  static const double w1[] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
  static const double w2[] = {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
  static const double w3[] = {-7.0 / 240, 3.0 / 10, -169.0 / 120, 61.0 / 30, 0.0, -61.0 / 30, 169.0 / 120, -3.0 / 10, 7.0 / 240};
  double s = 0.0;
  if (order == 1) {
    for (int i = -3; i <= 3; ++i) s += w1[i + 3] * f(x + i * h);
    return s / h;
  }
  if (order == 2) {
    for (int i = -3; i <= 3; ++i) s += w2[i + 3] * f(x + i * h);
    return s / (h * h);
  }
  for (int i = -4; i <= 4; ++i) s += w3[i + 4] * f(x + i * h);
  return s / (h * h * h);
}
}  // namespace detail

// Probes whether f(x) = x Psi'(x) is a Bernstein function: f >= 0, f' >= 0,
// f'' <= 0, f''' >= 0 at 20 log-spaced points, plus Psi(0+) = 0.
inline bool check_self_decomposable(const BernsteinSpec& s) {
  auto psi = [&](double x) { return bernstein_eval(s, x); };
  if (!(psi(1e-12) < 0.5 * psi(1e-4))) return false;
  auto f = [&](double x) { return x * detail::central_diff(psi, x, x * 1e-2, 1); };
  bool nonzero = false;
  for (int i = 0; i < 20; ++i) {
    double x = std::pow(10.0, -2.0 + 4.0 * i / 19.0);
    double h = x * 1e-2;
    double fx = f(x);
    double scale = std::max(std::abs(fx), 1e-300);
    if (fx < -1e-8 * scale) return false;
    if (std::abs(fx) > 1e-14) nonzero = true;
    double d1 = detail::central_diff(f, x, h, 1), d2 = detail::central_diff(f, x, h, 2);
    double d3 = detail::central_diff(f, x, h, 3);
    if (d1 < -1e-8 * scale / x) return false;
    if (d2 > 1e-8 * scale / (x * x)) return false;
    if (d3 < -1e-6 * scale / (x * x * x)) return false;
  }
  return nonzero;
}

}  // namespace ciid
