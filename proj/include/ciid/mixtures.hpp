#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ciid/errors.hpp"
#include "ciid/mixing_law.hpp"
#include "ciid/numerics.hpp"
#include "ciid/rng.hpp"

namespace ciid {

// X = mu + sigma (sqrt(rho) M + sqrt(1-rho) M_k) with iid standard normals.
inline RowSampler exch_normal_sampler(double mu, double sigma, double rho, int d) {
  require(rho >= 0.0 && rho <= 1.0, "rho must lie in [0,1] for a conditionally iid normal law");
  require(sigma > 0.0 && std::isfinite(sigma) && std::isfinite(mu), "sigma must be > 0");
  require(d >= 1, "d must be >= 1");
  double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
  return {static_cast<std::size_t>(d),
          [=](Rng& rng, std::span<double> x) {
            double m = rng.normal();
            for (double& v : x) v = mu + sigma * (a * m + b * rng.normal());
          },
          "exch_normal"};
}

inline SampleMatrix sample_exch_normal(double mu, double sigma, double rho, int d, std::size_t n, Rng& rng) {
  return draw_matrix(exch_normal_sampler(mu, sigma, rho, d), n, rng);
}

// P(X > x) for the exchangeable normal law, one-dimensional quadrature over M.
inline double exch_normal_survival(double mu, double sigma, double rho, std::span<const double> x) {
  if (rho >= 1.0) {
    double mx = *std::max_element(x.begin(), x.end());
    return 1.0 - num::normal_cdf((mx - mu) / sigma);
  }
  double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
  auto f = [&](double z) {
    double p = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    for (double xk : x) p *= num::normal_cdf(-((xk - mu) / sigma - a * z) / b);
    return p;
  };
  if (rho == 0.0) return f(0.0) * std::sqrt(2.0 * std::numbers::pi);
  return num::integrate(f, -12.0, 12.0);
}

inline RowSampler uniform_sphere_sampler(int d) {
  require(d >= 1, "d must be >= 1");
  return {static_cast<std::size_t>(d),
          [](Rng& rng, std::span<double> x) {
            double s;
            do {
              s = 0.0;
              for (double& v : x) {
                v = rng.normal();
                s += v * v;
              }
            } while (s == 0.0);
            s = std::sqrt(s);
            for (double& v : x) v /= s;
          },
          "uniform_sphere"};
}

inline SampleMatrix sample_uniform_sphere(int d, std::size_t n, Rng& rng) {
  return draw_matrix(uniform_sphere_sampler(d), n, rng);
}

// X = M (Y_1, ..., Y_d), Y iid standard normal.
inline RowSampler spherical_ciid_sampler(const MixingLawSpec& M, int d) {
  validate(M);
  require(d >= 1, "d must be >= 1");
  return {static_cast<std::size_t>(d),
          [M](Rng& rng, std::span<double> x) {
            double m = sample(M, rng);
            for (double& v : x) v = m * rng.normal();
          },
          "spherical " + describe(M)};
}

inline SampleMatrix sample_spherical_ciid(const MixingLawSpec& M, int d, std::size_t n, Rng& rng) {
  return draw_matrix(spherical_ciid_sampler(M, d), n, rng);
}

inline double spherical_survival(const MixingLawSpec& M, std::span<const double> x) {
  return expect(M, [&](double m) {
    double p = 1.0;
    for (double xk : x) p *= m > 0.0 ? num::normal_cdf(-xk / m) : (xk < 0.0 ? 1.0 : 0.0);
    return p;
  });
}

// phi_{d,R}(x) = E[(1 - x/R)_+^(d-1)].
inline double williamson_transform(const MixingLawSpec& R, int d, double x) {
  validate(R);
  require(d >= 1, "d must be >= 1");
  if (x <= 0.0) return 1.0;
  return expect_above(R, x, [&](double r) {
    if (std::isinf(r)) return 1.0;
    return d == 1 ? 1.0 : std::pow(1.0 - x / r, d - 1);
  });
}

// R (E_1, ..., E_d) / ||E||_1.
inline RowSampler l1_symmetric_sampler(const MixingLawSpec& R, int d) {
  validate(R);
  require(d >= 1, "d must be >= 1");
  return {static_cast<std::size_t>(d),
          [R](Rng& rng, std::span<double> x) {
            double r = sample(R, rng), s = 0.0;
            for (double& v : x) s += (v = rng.exponential());
            for (double& v : x) v = r * v / s;
          },
          "l1_symmetric " + describe(R)};
}

inline SampleMatrix sample_l1_symmetric(const MixingLawSpec& R, int d, std::size_t n, Rng& rng) {
  return draw_matrix(l1_symmetric_sampler(R, d), n, rng);
}

inline double l1_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::max(v, 0.0);
  return s;
}

// X = E / M with E iid unit exponential.
inline RowSampler l1_ciid_sampler(const MixingLawSpec& M, int d) {
  validate(M);
  require(d >= 1, "d must be >= 1");
  return {static_cast<std::size_t>(d),
          [M](Rng& rng, std::span<double> x) {
            double m = sample(M, rng);
            for (double& v : x) v = m > 0.0 ? rng.exponential() / m : kInf;
          },
          "l1_ciid " + describe(M)};
}

inline SampleMatrix sample_l1_ciid(const MixingLawSpec& M, int d, std::size_t n, Rng& rng) {
  return draw_matrix(l1_ciid_sampler(M, d), n, rng);
}

inline double l1_ciid_survival(const MixingLawSpec& M, std::span<const double> x) {
  return laplace_transform(M, l1_norm(x));
}

// Laplace transform of a mixing law used as an Archimedean generator.
struct ArchimedeanGeneratorSpec {
  MixingLawSpec M;

  double phi(double x) const { return laplace_transform(M, x); }
  double phi_inverse(double u) const { return laplace_inverse(M, u); }
};

inline double archimedean_copula_eval(const ArchimedeanGeneratorSpec& gen, std::span<const double> u) {
  double s = 0.0;
  for (double v : u) {
    require(v >= 0.0 && v <= 1.0, "copula arguments must lie in [0,1]");
    if (v == 0.0) return 0.0;
  }
  int ones = 0;
  for (double v : u) {
    if (v == 1.0) {
      ++ones;
      continue;
    }
    s += gen.phi_inverse(v);
  }
  if (ones == static_cast<int>(u.size())) return 1.0;
  if (ones == static_cast<int>(u.size()) - 1)
    for (double v : u)
      if (v < 1.0) return v;
  return std::clamp(gen.phi(s), 0.0, 1.0);
}

// U_k = phi(X_k) for X from the l1 conditionally iid sampler.
inline RowSampler archimedean_sampler(const ArchimedeanGeneratorSpec& gen, int d) {
  auto base = l1_ciid_sampler(gen.M, d);
  return {static_cast<std::size_t>(d),
          [base, gen](Rng& rng, std::span<double> x) {
            base.draw(rng, x);
            for (double& v : x) v = gen.phi(v);
          },
          "archimedean " + describe(gen.M)};
}

// g_d(x) = E[1{M > x} M^-d].
inline double gnedin_g(const MixingLawSpec& M, int d, double x) {
  validate(M);
  return expect_above(M, std::max(x, 0.0), [d](double m) { return std::isinf(m) ? 0.0 : std::pow(m, -d); });
}

// X = M (U_1, ..., U_d) with iid uniforms.
inline RowSampler linf_ciid_sampler(const MixingLawSpec& M, int d) {
  validate(M);
  require(d >= 1, "d must be >= 1");
  return {static_cast<std::size_t>(d),
          [M](Rng& rng, std::span<double> x) {
            double m = sample(M, rng);
            for (double& v : x) v = m * rng.uniform();
          },
          "linf_ciid " + describe(M)};
}

inline SampleMatrix sample_linf_ciid(const MixingLawSpec& M, int d, std::size_t n, Rng& rng) {
  return draw_matrix(linf_ciid_sampler(M, d), n, rng);
}

// One row together with the realized mixing value.
struct LinfRow {
  double m = 0.0;
  std::vector<double> x;
};

inline LinfRow sample_linf_row(const MixingLawSpec& M, int d, Rng& rng) {
  validate(M);
  LinfRow r;
  r.m = sample(M, rng);
  r.x.resize(static_cast<std::size_t>(d));
  for (double& v : r.x) v = r.m * rng.uniform();
  return r;
}

// P(X > x) = E[prod (1 - x_k/M)_+].
inline double linf_survival(const MixingLawSpec& M, std::span<const double> x) {
  double mx = 0.0;
  for (double v : x) mx = std::max(mx, v);
  return expect_above(M, mx, [&](double m) {
    double p = 1.0;
    for (double v : x) p *= 1.0 - std::max(v, 0.0) / m;
    return p;
  });
}

// Marginal distribution function of X = M U for Pareto(alpha) M.
inline double pareto_uniform_marginal(double alpha, double x) {
  if (x <= 0.0) return 0.0;
  if (x < 1.0) return alpha * x / (1.0 + alpha);
  return 1.0 - std::pow(x, -alpha) / (1.0 + alpha);
}

// Copula of (M U_1, M U_2) with Pareto(alpha) M.
inline double pareto_uniform_copula(double alpha, double u1, double u2) {
  require(alpha > 0.0, "alpha must be > 0");
  require(u1 >= 0.0 && u1 <= 1.0 && u2 >= 0.0 && u2 <= 1.0, "copula arguments must lie in [0,1]");
  double lo = std::min(u1, u2), hi = std::max(u1, u2);
  if (lo == 0.0) return 0.0;
  if (hi == 1.0) return lo;
  double k = alpha / (1.0 + alpha);
  if (hi <= k) return (1.0 + alpha) * (1.0 + alpha) / (alpha * (alpha + 2.0)) * lo * hi;
  double e = 1.0 + 1.0 / alpha;
  if (lo <= k)
    return lo - std::pow(1.0 + alpha, e) / (2.0 + alpha) * lo * std::pow(1.0 - hi, e);
  return lo - alpha / (2.0 + alpha) * std::pow(1.0 - lo, -1.0 / alpha) * std::pow(1.0 - hi, e);
}

}  // namespace ciid
