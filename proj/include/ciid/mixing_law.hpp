#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>

#include "ciid/errors.hpp"
#include "ciid/numerics.hpp"
#include "ciid/rng.hpp"

// Laws of a scalar mixing variable M >= 0.
namespace ciid::law {

struct PointMass {
  double m = 1.0;  // may be +inf
};
struct FiniteDiscrete {
  std::vector<double> atoms;
  std::vector<double> weights;
};
struct Gamma {
  double shape = 1.0;  // unit scale
};
struct Beta {
  double p = 1.0;
  double q = 1.0;
};
struct Pareto {
  double alpha = 1.0;  // P(M > x) = min(1, x^-alpha)
};
struct PositiveStable {
  double theta = 0.5;  // E exp(-x M) = exp(-x^theta)
};
struct LogSeries {
  double theta = 1.0;  // P(M = m) = (1 - e^-theta)^m / (m theta)
};

}  // namespace ciid::law

namespace ciid {

using MixingLawSpec = std::variant<law::PointMass, law::FiniteDiscrete, law::Gamma, law::Beta,
                                   law::Pareto, law::PositiveStable, law::LogSeries>;

namespace detail {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

// Kanter's function for the positive stable law.
inline double kanter_a(double theta, double u) {
  const double pi = std::numbers::pi;
  double s1 = std::sin(theta * pi * u), s2 = std::sin((1.0 - theta) * pi * u), s = std::sin(pi * u);
  return std::pow(s1, theta / (1.0 - theta)) * s2 / std::pow(s, 1.0 / (1.0 - theta));
}
}  // namespace detail

inline void validate(const MixingLawSpec& M) {
  std::visit(detail::overloaded{
                 [](const law::PointMass& l) { require(l.m >= 0.0, "point mass location must be >= 0"); },
                 [](const law::FiniteDiscrete& l) {
                   require(!l.atoms.empty() && l.atoms.size() == l.weights.size(),
                           "finite discrete law needs matching non-empty atoms and weights");
                   double s = 0.0;
                   for (std::size_t i = 0; i < l.atoms.size(); ++i) {
                     require(l.atoms[i] >= 0.0, "atoms must be >= 0");
                     require(l.weights[i] >= 0.0 && std::isfinite(l.weights[i]), "weights must be >= 0");
                     s += l.weights[i];
                   }
                   require(std::abs(s - 1.0) <= 1e-12, "weights must sum to 1");
                 },
                 [](const law::Gamma& l) { require(detail::positive_finite(l.shape), "gamma shape must be > 0"); },
                 [](const law::Beta& l) {
                   require(detail::positive_finite(l.p) && detail::positive_finite(l.q), "beta parameters must be > 0");
                 },
                 [](const law::Pareto& l) { require(detail::positive_finite(l.alpha), "pareto alpha must be > 0"); },
                 [](const law::PositiveStable& l) {
                   require(l.theta > 0.0 && l.theta < 1.0, "stable index must lie in (0,1)");
                 },
                 [](const law::LogSeries& l) { require(detail::positive_finite(l.theta), "log-series theta must be > 0"); },
             },
             M);
}

inline std::string describe(const MixingLawSpec& M) {
  std::ostringstream os;
  os.precision(12);
  std::visit(detail::overloaded{
                 [&](const law::PointMass& l) { os << "point_mass(" << l.m << ")"; },
                 [&](const law::FiniteDiscrete& l) { os << "finite_discrete(" << l.atoms.size() << " atoms)"; },
                 [&](const law::Gamma& l) { os << "gamma(" << l.shape << ")"; },
                 [&](const law::Beta& l) { os << "beta(" << l.p << "," << l.q << ")"; },
                 [&](const law::Pareto& l) { os << "pareto(" << l.alpha << ")"; },
                 [&](const law::PositiveStable& l) { os << "positive_stable(" << l.theta << ")"; },
                 [&](const law::LogSeries& l) { os << "log_series(" << l.theta << ")"; },
             },
             M);
  return os.str();
}

inline double lower_support(const MixingLawSpec& M) {
  return std::visit(detail::overloaded{
                        [](const law::PointMass& l) { return l.m; },
                        [](const law::FiniteDiscrete& l) {
                          double lo = kInf;
                          for (std::size_t i = 0; i < l.atoms.size(); ++i)
                            if (l.weights[i] > 0.0) lo = std::min(lo, l.atoms[i]);
                          return lo;
                        },
                        [](const law::Pareto&) { return 1.0; },
                        [](const law::LogSeries&) { return 1.0; },
                        [](const auto&) { return 0.0; },
                    },
                    M);
}

inline double upper_support(const MixingLawSpec& M) {
  return std::visit(detail::overloaded{
                        [](const law::PointMass& l) { return l.m; },
                        [](const law::FiniteDiscrete& l) {
                          double hi = 0.0;
                          for (std::size_t i = 0; i < l.atoms.size(); ++i)
                            if (l.weights[i] > 0.0) hi = std::max(hi, l.atoms[i]);
                          return hi;
                        },
                        [](const law::Beta&) { return 1.0; },
                        [](const auto&) { return kInf; },
                    },
                    M);
}

inline double sample(const MixingLawSpec& M, Rng& rng) {
  return std::visit(
      detail::overloaded{
          [](const law::PointMass& l) { return l.m; },
          [&](const law::FiniteDiscrete& l) {
            double u = rng.uniform(), c = 0.0;
            for (std::size_t i = 0; i < l.atoms.size(); ++i) {
              c += l.weights[i];
              if (u <= c) return l.atoms[i];
            }
            return l.atoms.back();
          },
          [&](const law::Gamma& l) { return rng.gamma(l.shape); },
          [&](const law::Beta& l) { return rng.beta(l.p, l.q); },
          [&](const law::Pareto& l) { return std::pow(rng.uniform(), -1.0 / l.alpha); },
          [&](const law::PositiveStable& l) {
            double a = detail::kanter_a(l.theta, rng.uniform());
            return std::pow(a / rng.exponential(), (1.0 - l.theta) / l.theta);
          },
          [&](const law::LogSeries& l) {
            // Kemp's LK algorithm with p = 1 - e^-theta.
            double p = -std::expm1(-l.theta);
            double v = rng.uniform();
            if (v >= p) return 1.0;
            double q = -std::expm1(-l.theta * rng.uniform());
            if (v <= q * q) return std::floor(1.0 + std::log(v) / std::log(q));
            return v <= q ? 2.0 : 1.0;
          },
      },
      M);
}

// E[f(M) 1{M > t}] by closed sums or quadrature.
template <class F>
double expect_above(const MixingLawSpec& M, double t, F&& f) {
  using namespace ciid::num;
  return std::visit(
      detail::overloaded{
          [&](const law::PointMass& l) { return l.m > t ? f(l.m) : 0.0; },
          [&](const law::FiniteDiscrete& l) {
            double s = 0.0;
            for (std::size_t i = 0; i < l.atoms.size(); ++i)
              if (l.atoms[i] > t && l.weights[i] > 0.0) s += l.weights[i] * f(l.atoms[i]);
            return s;
          },
          [&](const law::Gamma& l) {
            double th = l.shape, lo = std::max(t, 0.0);
            if (th < 1.0) {
              // v = m^theta removes the singularity at 0.
              double g = std::tgamma(th + 1.0);
              auto h = [&](double v) {
                double m = std::pow(v, 1.0 / th);
                return f(m) * std::exp(-m) / g;
              };
              return integrate(h, std::pow(lo, th), kInf);
            }
            double lg = std::lgamma(th);
            auto h = [&](double m) {
              if (m <= 0.0) return 0.0;
              return f(m) * std::exp((th - 1.0) * std::log(m) - m - lg);
            };
            double mid = std::max(lo, th + 10.0 * std::sqrt(th));
            return integrate(h, lo, mid) + integrate(h, mid, kInf);
          },
          [&](const law::Beta& l) {
            double lo = std::max(t, 0.0);
            if (lo >= 1.0) return 0.0;
            double lb = std::lgamma(l.p) + std::lgamma(l.q) - std::lgamma(l.p + l.q);
            auto h = [&](double m) {
              if (m <= 0.0 || m >= 1.0) return 0.0;
              return f(m) * std::exp((l.p - 1.0) * std::log(m) + (l.q - 1.0) * std::log1p(-m) - lb);
            };
            return integrate_finite(h, lo, 1.0);
          },
          [&](const law::Pareto& l) {
            // u = m^-alpha is uniform on (0,1].
            double lo = std::max(t, 1.0);
            double top = std::pow(lo, -l.alpha);
            auto h = [&](double u) { return u <= 0.0 ? 0.0 : f(std::pow(u, -1.0 / l.alpha)); };
            if (t < 1.0) return integrate_finite(h, 0.0, 1.0);
            return integrate_finite(h, 0.0, top);
          },
          [&](const law::PositiveStable& l) {
            double th = l.theta;
            double cut = t > 0.0 ? std::pow(t, -th / (1.0 - th)) : kInf;
            auto outer = [&](double u) {
              double a = detail::kanter_a(th, u);
              if (!(a > 0.0) || !std::isfinite(a)) return 0.0;
              auto inner = [&](double e) {
                if (e <= 0.0) return 0.0;
                return f(std::pow(a / e, (1.0 - th) / th)) * std::exp(-e);
              };
              double emax = a * cut;
              if (std::isfinite(emax)) return integrate(inner, 0.0, emax, 1e-9);
              return integrate(inner, 0.0, kInf, 1e-9);
            };
            return integrate(outer, 0.0, 1.0, 1e-9);
          },
          [&](const law::LogSeries& l) {
            double p = -std::expm1(-l.theta);
            double s = 0.0;
            for (long m = 1; m < 50000000; ++m) {
              double w = std::exp(m * std::log(p) - std::log(static_cast<double>(m)) - std::log(l.theta));
              if (m > t) s += w * f(static_cast<double>(m));
              if (w / (1.0 - p) < 1e-17) break;
            }
            return s;
          },
      },
      M);
}

template <class F>
double expect(const MixingLawSpec& M, F&& f) {
  return expect_above(M, -kInf, std::forward<F>(f));
}

// Laplace transform E[exp(-x M)], x >= 0.
inline double laplace_transform(const MixingLawSpec& M, double x) {
  if (x <= 0.0) return 1.0;
  return std::visit(detail::overloaded{
                        [&](const law::PointMass& l) { return std::isinf(l.m) ? 0.0 : std::exp(-x * l.m); },
                        [&](const law::Gamma& l) { return std::pow(1.0 + x, -l.shape); },
                        [&](const law::Beta& l) { return boost::math::hypergeometric_1F1(l.p, l.p + l.q, -x); },
                        [&](const law::PositiveStable& l) { return std::exp(-std::pow(x, l.theta)); },
                        [&](const law::LogSeries& l) {
                          double p = -std::expm1(-l.theta);
                          return -std::log1p(-p * std::exp(-x)) / l.theta;
                        },
                        [&](const auto&) {
                          return expect(M, [x](double m) { return std::isinf(m) ? 0.0 : std::exp(-x * m); });
                        },
                    },
                    M);
}

// Generalized inverse of the Laplace transform: inf{x >= 0 : phi(x) <= u}.
inline double laplace_inverse(const MixingLawSpec& M, double u) {
  if (u >= 1.0) return 0.0;
  if (u <= 0.0) return kInf;
  return std::visit(detail::overloaded{
                        [&](const law::PointMass& l) { return -std::log(u) / l.m; },
                        [&](const law::Gamma& l) { return std::pow(u, -1.0 / l.shape) - 1.0; },
                        [&](const law::PositiveStable& l) { return std::pow(-std::log(u), 1.0 / l.theta); },
                        [&](const law::LogSeries& l) {
                          double p = -std::expm1(-l.theta);
                          return -std::log(-std::expm1(-l.theta * u) / p);
                        },
                        [&](const auto&) {
                          return num::inverse_decreasing([&](double x) { return laplace_transform(M, x); }, u);
                        },
                    },
                    M);
}

// E[M^k]; +inf when the moment diverges.
inline double moment(const MixingLawSpec& M, int k) {
  if (k == 0) return 1.0;
  return std::visit(
      detail::overloaded{
          [&](const law::PointMass& l) { return std::pow(l.m, k); },
          [&](const law::FiniteDiscrete& l) {
            double s = 0.0;
            for (std::size_t i = 0; i < l.atoms.size(); ++i) s += l.weights[i] * std::pow(l.atoms[i], k);
            return s;
          },
          [&](const law::Gamma& l) { return std::exp(std::lgamma(l.shape + k) - std::lgamma(l.shape)); },
          [&](const law::Beta& l) {
            double r = 1.0;
            for (int i = 0; i < k; ++i) r *= (l.p + i) / (l.p + l.q + i);
            return r;
          },
          [&](const law::Pareto& l) { return l.alpha > k ? l.alpha / (l.alpha - k) : kInf; },
          [&](const law::PositiveStable&) { return kInf; },
          [&](const law::LogSeries&) { return expect(M, [k](double m) { return std::pow(m, k); }); },
      },
      M);
}

}  // namespace ciid
