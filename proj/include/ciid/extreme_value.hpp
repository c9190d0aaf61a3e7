#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ciid/errors.hpp"
#include "ciid/mixing_law.hpp"
#include "ciid/numerics.hpp"
#include "ciid/rng.hpp"

// Unit-mean distribution functions on [0, inf].
namespace ciid::gspec {

// G(x) = exp(-(Gamma(1-theta) x)^(-1/theta)), theta in (0,1).
struct Frechet {
  double theta = 0.5;
};
// G(x) = 1 - exp(-(Gamma(1+theta) x)^(1/theta)).
struct Weibull {
  double theta = 1.0;
};
// Random G_t = e^-M + (1 - e^-M) 1{t >= 1/(1 - e^-M)} with M drawn from the law.
struct MOAtom {
  MixingLawSpec M;
};
// values[0] on [0, t_1), values[i] on [t_i, t_{i+1}); the last value is 1.
struct StepFunction {
  std::vector<double> breakpoints;
  std::vector<double> values;
};

}  // namespace ciid::gspec

namespace ciid {

using GSpec = std::variant<gspec::Frechet, gspec::Weibull, gspec::MOAtom, gspec::StepFunction>;

namespace stdf {
struct Independence {};
struct Logistic {
  double theta = 0.5;  // (0,1]
};
struct NegativeLogistic {
  double theta = 1.0;  // > 0
};
struct LF {
  GSpec G;
};
struct Triplet {
  double b = 0.0;
  double c = 1.0;
  std::vector<std::pair<GSpec, double>> atoms;
};
}  // namespace stdf

using StdfSpec = std::variant<stdf::Independence, stdf::Logistic, stdf::NegativeLogistic, stdf::LF, stdf::Triplet>;

inline double g_eval(const gspec::StepFunction& g, double x) {
  std::size_t i = std::upper_bound(g.breakpoints.begin(), g.breakpoints.end(), x) - g.breakpoints.begin();
  return g.values[i];
}

// Left limit G(x-).
inline double g_eval_left(const gspec::StepFunction& g, double x) {
  std::size_t i = std::lower_bound(g.breakpoints.begin(), g.breakpoints.end(), x) - g.breakpoints.begin();
  return g.values[i];
}

inline double frechet_scale(double theta) { return std::pow(std::tgamma(1.0 - theta), -1.0 / theta); }

// G(x) for deterministic specs; MOAtom needs a realized M.
inline double g_eval(const GSpec& G, double x, double m = kInf) {
  if (x < 0.0) return 0.0;
  return std::visit(detail::overloaded{
                        [&](const gspec::Frechet& g) {
                          if (x == 0.0) return 0.0;
                          if (std::isinf(x)) return 1.0;
                          return std::exp(-std::pow(std::tgamma(1.0 - g.theta) * x, -1.0 / g.theta));
                        },
                        [&](const gspec::Weibull& g) {
                          if (std::isinf(x)) return 1.0;
                          return -std::expm1(-std::pow(std::tgamma(1.0 + g.theta) * x, 1.0 / g.theta));
                        },
                        [&](const gspec::MOAtom&) {
                          double p = std::isinf(m) ? 1.0 : -std::expm1(-m);
                          return x >= 1.0 / p ? 1.0 : std::exp(-m);
                        },
                        [&](const gspec::StepFunction& g) { return g_eval(g, x); },
                    },
                    G);
}

// log G(x), accurate where G is close to 1.
inline double log_g_eval(const GSpec& G, double x) {
  if (x <= 0.0 && !std::holds_alternative<gspec::StepFunction>(G)) return -kInf;
  if (auto* f = std::get_if<gspec::Frechet>(&G)) return std::isinf(x) ? 0.0 : -std::pow(std::tgamma(1.0 - f->theta) * x, -1.0 / f->theta);
  if (auto* w = std::get_if<gspec::Weibull>(&G)) return std::isinf(x) ? 0.0 : std::log1p(-std::exp(-std::pow(std::tgamma(1.0 + w->theta) * x, 1.0 / w->theta)));
  double g = g_eval(G, x);
  return g <= 0.0 ? -kInf : std::log(g);
}

inline void validate(const GSpec& G) {
  std::visit(detail::overloaded{
                 [](const gspec::Frechet& g) { require(g.theta > 0.0 && g.theta < 1.0, "Frechet theta must lie in (0,1)"); },
                 [](const gspec::Weibull& g) { require(g.theta > 0.0 && std::isfinite(g.theta), "Weibull theta must be > 0"); },
                 [](const gspec::MOAtom& g) {
                   validate(g.M);
                   require(lower_support(g.M) > 0.0 || std::holds_alternative<law::Gamma>(g.M) ||
                               std::holds_alternative<law::Beta>(g.M) || std::holds_alternative<law::PositiveStable>(g.M),
                           "MOAtom needs M > 0 almost surely");
                 },
                 [](const gspec::StepFunction& g) {
                   require(g.values.size() == g.breakpoints.size() + 1, "step function needs one more value than breakpoints");
                   require(!g.breakpoints.empty() && g.breakpoints.front() > 0.0, "breakpoints must be > 0");
                   for (std::size_t i = 1; i < g.breakpoints.size(); ++i)
                     require(g.breakpoints[i] > g.breakpoints[i - 1], "breakpoints must increase");
                   for (std::size_t i = 0; i < g.values.size(); ++i) {
                     require(g.values[i] >= 0.0 && g.values[i] <= 1.0, "step values must lie in [0,1]");
                     if (i) require(g.values[i] >= g.values[i - 1], "step values must be non-decreasing");
                   }
                   require(g.values.back() == 1.0, "step function must reach 1");
                   double mean = g.breakpoints[0] * (1.0 - g.values[0]);
                   for (std::size_t i = 1; i < g.breakpoints.size(); ++i)
                     mean += (g.breakpoints[i] - g.breakpoints[i - 1]) * (1.0 - g.values[i]);
                   require(std::abs(mean - 1.0) <= 1e-8, "G must have unit mean");
                 },
             },
             G);
}

inline void validate(const StdfSpec& s) {
  std::visit(detail::overloaded{
                 [](const stdf::Independence&) {},
                 [](const stdf::Logistic& l) { require(l.theta > 0.0 && l.theta <= 1.0, "logistic theta must lie in (0,1]"); },
                 [](const stdf::NegativeLogistic& l) {
                   require(l.theta > 0.0 && std::isfinite(l.theta), "negative logistic theta must be > 0");
                 },
                 [](const stdf::LF& l) { validate(l.G); },
                 [](const stdf::Triplet& t) {
                   require(t.b >= 0.0 && std::isfinite(t.b), "triplet b must be >= 0");
                   require(t.c > 0.0 && std::isfinite(t.c), "triplet c must be > 0");
                   require(!t.atoms.empty(), "triplet needs at least one atom");
                   double s = 0.0;
                   for (const auto& [g, w] : t.atoms) {
                     validate(g);
                     require(w >= 0.0, "atom weights must be >= 0");
                     s += w;
                   }
                   require(std::abs(s - 1.0) <= 1e-12, "atom weights must sum to 1");
                 },
             },
             s);
}

namespace detail {

inline std::vector<double> positive_part(std::span<const double> x) {
  std::vector<double> v;
  for (double a : x) {
    require(a >= 0.0, "stdf arguments must be >= 0");
    if (a > 0.0) v.push_back(a);
  }
  return v;
}

// sum_j (x_[j] - x_[j-1]) (1 - e^{-m (d-j+1)}) / (1 - e^{-m}).
inline double mo_atom_ell(const std::vector<double>& xs, double m) {
  int d = static_cast<int>(xs.size());
  double s = 0.0, prev = 0.0;
  for (int j = 1; j <= d; ++j) {
    double w = std::isinf(m) ? 1.0 : -std::expm1(-m * (d - j + 1)) / -std::expm1(-m);
    s += (xs[j - 1] - prev) * w;
    prev = xs[j - 1];
  }
  return s;
}

inline double step_ell(const gspec::StepFunction& g, const std::vector<double>& xs) {
  std::vector<double> cuts{0.0};
  for (double x : xs)
    for (double t : g.breakpoints) cuts.push_back(x * t);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i], hi = cuts[i + 1];
    if (hi <= lo) continue;
    double mid = 0.5 * (lo + hi), prod = 1.0;
    for (double x : xs) prod *= g_eval(g, mid / x);
    s += (hi - lo) * (1.0 - prod);
  }
  return s;
}

}  // namespace detail

// ell_G(x) = int_0^inf 1 - prod_k G(u / x_k) du.
inline double ell_G(const GSpec& G, std::span<const double> x) {
  auto xs = detail::positive_part(x);
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  return std::visit(detail::overloaded{
                        [&](const gspec::MOAtom& g) {
                          return expect(g.M, [&](double m) { return detail::mo_atom_ell(xs, m); });
                        },
                        [&](const gspec::StepFunction& g) { return detail::step_ell(g, xs); },
                        [&](const auto&) {
                          auto tail = [&](double u) {
                            double lp = 0.0;
                            for (double xk : xs) lp += log_g_eval(G, u / xk);
                            return -std::expm1(lp);
                          };
                          // [0, U] directly, [U, inf) through u = U r^-q; q flattens a u^(-1/theta) tail
                          double U = xs.back(), q = 1.0;
                          if (auto* f = std::get_if<gspec::Frechet>(&G)) q = std::max(1.0, 2.0 * f->theta / (1.0 - f->theta));
                          double head = num::integrate_finite(tail, 0.0, U, 1e-13);
                          double rest = num::integrate_finite(
                              [&](double r) {
                                if (r <= 0.0) return 0.0;
                                double u = U * std::pow(r, -q);
                                if (std::isinf(u)) return 0.0;
                                double w = tail(u) * u;
                                return w == 0.0 ? 0.0 : w * q / r;
                              },
                              0.0, 1.0, 1e-13);
                          return head + rest;
                        },
                    },
                    G);
}

inline double stdf_eval(const StdfSpec& spec, std::span<const double> x) {
  auto xs = detail::positive_part(x);
  return std::visit(detail::overloaded{
                        [&](const stdf::Independence&) {
                          double s = 0.0;
                          for (double v : xs) s += v;
                          return s;
                        },
                        [&](const stdf::Logistic& l) {
                          if (xs.empty()) return 0.0;
                          double mx = *std::max_element(xs.begin(), xs.end()), s = 0.0;
                          for (double v : xs) s += std::pow(v / mx, 1.0 / l.theta);
                          return mx * std::pow(s, l.theta);
                        },
                        [&](const stdf::NegativeLogistic& l) {
                          // zero coordinates make every term containing them vanish
                          int m = static_cast<int>(xs.size());
                          require(m <= 25, "negative logistic evaluation limited to 25 positive coordinates");
                          double s = 0.0;
                          for (std::uint32_t I = 1; I < (std::uint32_t(1) << m); ++I) {
                            double t = 0.0;
                            for (int i = 0; i < m; ++i)
                              if (I >> i & 1u) t += std::pow(xs[i], -l.theta);
                            s += (__builtin_popcount(I) % 2 ? 1.0 : -1.0) * std::pow(t, -1.0 / l.theta);
                          }
                          return s;
                        },
                        [&](const stdf::LF& l) { return ell_G(l.G, x); },
                        [&](const stdf::Triplet& t) {
                          double s1 = 0.0;
                          for (double v : xs) s1 += v;
                          double mix = 0.0;
                          for (const auto& [g, w] : t.atoms)
                            if (w > 0.0) mix += w * ell_G(g, x);
                          return (t.b * s1 + t.c * mix) / (t.b + t.c);
                        },
                    },
                    spec);
}

inline double minstable_survival(const StdfSpec& spec, double rate, std::span<const double> x) {
  require(rate > 0.0, "rate must be > 0");
  return std::exp(-rate * stdf_eval(spec, x));
}

inline double extreme_value_copula_eval(const StdfSpec& spec, std::span<const double> u) {
  std::vector<double> x;
  for (double v : u) {
    require(v >= 0.0 && v <= 1.0, "copula arguments must lie in [0,1]");
    if (v == 0.0) return 0.0;
    x.push_back(-std::log(v));
  }
  return std::exp(-stdf_eval(spec, x));
}

// Equivalent triplet (b, c, atoms) of a spec, for the series sampler.
inline stdf::Triplet as_triplet(const StdfSpec& spec) {
  return std::visit(detail::overloaded{
                        [](const stdf::Independence&) -> stdf::Triplet {
                          throw UnsupportedError("independence has no series part (c = 0); sample iid exponentials");
                        },
                        [](const stdf::Logistic& l) {
                          if (l.theta >= 1.0) throw UnsupportedError("logistic theta = 1 is independence");
                          return stdf::Triplet{0.0, 1.0, {{gspec::Frechet{l.theta}, 1.0}}};
                        },
                        [](const stdf::NegativeLogistic& l) {
                          return stdf::Triplet{0.0, 1.0, {{gspec::Weibull{1.0 / l.theta}, 1.0}}};
                        },
                        [](const stdf::LF& l) { return stdf::Triplet{0.0, 1.0, {{l.G, 1.0}}}; },
                        [](const stdf::Triplet& t) { return t; },
                    },
                    spec);
}

struct SeriesOptions {
  // standard deviation budget of the omitted series tail (power-tailed atoms)
  double tail_tol = 1e-4;
  // first-passage tolerance in t
  double time_tol = 1e-10;
};

namespace detail {

// One realization of Z_t = b t + sum_n -log G^(n)((Gamma_n / (c t))-),
// extended lazily in the arrival index.
class StrongIdtPath {
 public:
  struct Term {
    double gamma;
    int atom;
    double m;
  };

  StrongIdtPath(const stdf::Triplet& t, const SeriesOptions& opt, Rng& rng) : t_(t), opt_(opt), rng_(rng) {
    double c = 0.0;
    for (const auto& [g, w] : t_.atoms) cum_.push_back(c += w);
    frechet_sum_.assign(t_.atoms.size(), 0.0);
  }

  // Horizon in arrival time needed for accuracy at time t.
  double horizon(double t, bool frechet = true) const {
    double ct = t_.c * t, v = 0.0;
    for (std::size_t i = 0; i < t_.atoms.size(); ++i) {
      const auto& [g, w] = t_.atoms[i];
      if (w <= 0.0) continue;
      if (!frechet && std::holds_alternative<gspec::Frechet>(g)) continue;
      v = std::max(v, std::visit(overloaded{
                                     [&](const gspec::Frechet& f) {
                                       double a = frechet_scale(f.theta), e = 1.0 - 2.0 / f.theta;
                                       double rhs = opt_.tail_tol * opt_.tail_tol * (2.0 / f.theta - 1.0) / (ct * w * a * a);
                                       return std::pow(rhs, 1.0 / e);
                                     },
                                     [&](const gspec::Weibull& f) {
                                       return std::pow(30.0, f.theta) / std::tgamma(1.0 + f.theta);
                                     },
                                     [&](const gspec::MOAtom& f) {
                                       double m = lower_support(f.M);
                                       if (!(m > 0.0)) throw UnsupportedError("series sampler needs MOAtom laws bounded away from 0");
                                       return std::isinf(m) ? 1.0 : 1.0 / -std::expm1(-m);
                                     },
                                     [&](const gspec::StepFunction& f) {
                                       std::size_t j = 0;
                                       while (f.values[j] < 1.0) ++j;
                                       return f.breakpoints[j - 1];
                                     },
                                 },
                                 g));
    }
    return ct * v;
  }

  void fix_horizon(double S) {
    S_ = S;
    while (last_ <= S_) {
      if (terms_.size() > 50000000) throw NumericalError("series truncation horizon overflow");
      last_ += rng_.exponential();
      double u = rng_.uniform() * cum_.back();
      int a = static_cast<int>(std::lower_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
      a = std::min<int>(a, static_cast<int>(cum_.size()) - 1);
      double m = 0.0;
      if (auto* mo = std::get_if<gspec::MOAtom>(&t_.atoms[a].first)) m = sample(mo->M, rng_);
      // Weibull: y = m t^(-1/theta)
      if (auto* wb = std::get_if<gspec::Weibull>(&t_.atoms[a].first))
        m = std::pow(std::tgamma(1.0 + wb->theta) * last_ / t_.c, 1.0 / wb->theta);
      terms_.push_back({last_, a, m});
    }
    std::fill(frechet_sum_.begin(), frechet_sum_.end(), 0.0);
    active_.clear();
    for (const auto& tm : terms_) {
      if (tm.gamma > S_) break;
      if (auto* f = std::get_if<gspec::Frechet>(&t_.atoms[tm.atom].first))
        frechet_sum_[tm.atom] += std::pow(tm.gamma, -1.0 / f->theta);
      else
        active_.push_back(tm);
    }
  }

  double operator()(double t) const {
    if (t <= 0.0) return 0.0;
    double ct = t_.c * t, z = t_.b * t;
    for (std::size_t i = 0; i < t_.atoms.size(); ++i)
      if (auto* f = std::get_if<gspec::Frechet>(&t_.atoms[i].first)) {
        double a = frechet_scale(f->theta), w = t_.atoms[i].second;
        z += a * std::pow(ct, 1.0 / f->theta) * frechet_sum_[i];
        double v = S_ / ct;
        z += ct * w * a * std::pow(v, 1.0 - 1.0 / f->theta) / (1.0 / f->theta - 1.0);
      }
    std::vector<double> tp(t_.atoms.size(), 0.0);
    for (std::size_t i = 0; i < t_.atoms.size(); ++i)
      if (auto* wb = std::get_if<gspec::Weibull>(&t_.atoms[i].first)) tp[i] = std::pow(t, -1.0 / wb->theta);
    // later arrivals contribute nothing (or below e^-30) at this t
    double cut = horizon(t, false);
    for (const auto& tm : active_) {
      if (tm.gamma > cut) break;
      double s = tm.gamma / ct;
      z += std::visit(overloaded{
                          [&](const gspec::Frechet&) { return 0.0; },
                          [&](const gspec::Weibull&) { return -std::log(-std::expm1(-tm.m * tp[tm.atom])); },
                          [&](const gspec::MOAtom&) {
                            double p = std::isinf(tm.m) ? 1.0 : -std::expm1(-tm.m);
                            return s <= 1.0 / p ? tm.m : 0.0;
                          },
                          [&](const gspec::StepFunction& g) {
                            double v = g_eval_left(g, s);
                            return v <= 0.0 ? kInf : -std::log(v);
                          },
                      },
                      t_.atoms[tm.atom].first);
      if (std::isinf(z)) return z;
    }
    return z;
  }

 private:
  const stdf::Triplet& t_;
  SeriesOptions opt_;
  Rng& rng_;
  std::vector<double> cum_;
  std::vector<Term> terms_;
  std::vector<Term> active_;
  std::vector<double> frechet_sum_;
  double last_ = 0.0;
  double S_ = 0.0;
};

}  // namespace detail

// Series sampler: X_k = inf{t >= 0 : Z_t > eps_k}; marginal rate b + c.
inline RowSampler minstable_sampler(const StdfSpec& spec, int d, SeriesOptions opt = {}) {
  validate(spec);
  require(d >= 1, "d must be >= 1");
  auto* lg = std::get_if<stdf::Logistic>(&spec);
  if (std::holds_alternative<stdf::Independence>(spec) || (lg && lg->theta >= 1.0))
    return {static_cast<std::size_t>(d),
            [](Rng& rng, std::span<double> x) {
              for (double& v : x) v = rng.exponential();
            },
            "minstable independence"};
  auto trip = as_triplet(spec);
  validate(StdfSpec{trip});
  // horizon() rejects unsupported atoms up front
  {
    Rng probe(0);
    detail::StrongIdtPath path(trip, opt, probe);
    path.horizon(1.0);
  }
  return {static_cast<std::size_t>(d),
          [trip, opt](Rng& rng, std::span<double> x) {
            std::vector<double> eps(x.size());
            double emax = 0.0;
            for (double& e : eps) emax = std::max(emax, e = rng.exponential());
            detail::StrongIdtPath path(trip, opt, rng);
            double hi = 1.0;
            for (;;) {
              path.fix_horizon(path.horizon(hi));
              if (path(hi) > emax) break;
              hi *= 2.0;
              if (hi > 1e12) throw NumericalError("first passage beyond time horizon");
            }
            for (std::size_t k = 0; k < x.size(); ++k)
              x[k] = num::bisect([&](double t) { return path(t) > eps[k]; }, 0.0, hi, opt.time_tol);
          },
          "minstable series"};
}

inline SampleMatrix sample_minstable(const StdfSpec& spec, int d, std::size_t n, Rng& rng, SeriesOptions opt = {}) {
  return draw_matrix(minstable_sampler(spec, d, opt), n, rng);
}

// X_k = (eps_k / S)^theta / rate with S positive theta-stable.
inline RowSampler logistic_direct_sampler(double theta, double rate, int d) {
  require(theta > 0.0 && theta < 1.0, "theta must lie in (0,1)");
  require(rate > 0.0, "rate must be > 0");
  MixingLawSpec S = law::PositiveStable{theta};
  return {static_cast<std::size_t>(d),
          [S, theta, rate](Rng& rng, std::span<double> x) {
            double s = sample(S, rng);
            for (double& v : x) v = std::pow(rng.exponential() / s, theta) / rate;
          },
          "logistic direct"};
}

inline SampleMatrix sample_logistic_direct(double theta, double rate, int d, std::size_t n, Rng& rng) {
  return draw_matrix(logistic_direct_sampler(theta, rate, d), n, rng);
}

}  // namespace ciid
