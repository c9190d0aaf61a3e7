#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "ciid/diagnostics.hpp"
#include "ciid/extreme_value.hpp"
#include "ciid/lack_of_memory.hpp"
#include "support.hpp"

using namespace ciid;
using namespace testing_support;

namespace {

// brute force: integrand 1 - prod G(u / x_k) is piecewise constant for step G
double step_ell_oracle(const gspec::StepFunction& g, const std::vector<double>& x) {
  std::vector<double> cuts{0.0};
  for (double xk : x)
    for (double b : g.breakpoints) cuts.push_back(xk * b);
  std::sort(cuts.begin(), cuts.end());
  double s = 0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    double mid = 0.5 * (cuts[i - 1] + cuts[i]), p = 1;
    for (double xk : x) p *= g_eval(GSpec{g}, mid / xk);
    s += (cuts[i] - cuts[i - 1]) * (1 - p);
  }
  return s;
}

double weibull_ell_oracle(double theta, const std::vector<double>& x) {
  boost::math::quadrature::tanh_sinh<double> ts;
  double g = std::tgamma(1 + theta);
  // 1 - prod (1 - exp(-(g u / x_k)^{1/theta}))
  auto f = [&](double u) {
    double p = 1;
    for (double xk : x) p *= -std::expm1(-std::pow(g * u / xk, 1 / theta));
    return 1 - p;
  };
  return ts.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

// E over M ~ Gamma(k) of the MO-atom integral, with a plain double loop
double mo_atom_gamma_oracle(double shape, const std::vector<double>& x) {
  auto inner = [&](double m) {
    double p = -std::expm1(-m);
    std::vector<double> c{0.0};
    for (double xk : x) c.push_back(xk / p);
    std::sort(c.begin(), c.end());
    double s = 0;
    for (std::size_t i = 1; i < c.size(); ++i) {
      double alive = static_cast<double>(c.size() - i);
      s += (c[i] - c[i - 1]) * -std::expm1(-m * alive);
    }
    return s;
  };
  auto dens = [&](double m) { return std::pow(m, shape - 1) * std::exp(-m) / std::tgamma(shape); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double m) { return m <= 0 ? 0.0 : inner(m) * dens(m); }, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-12);
}

gspec::StepFunction step_g() { return {{0.5, 2.0}, {0.2, 0.6, 1.0}}; }

std::vector<StdfSpec> spec_zoo() {
  return {stdf::Independence{},
          stdf::Logistic{0.3},
          stdf::Logistic{0.8},
          stdf::NegativeLogistic{0.7},
          stdf::NegativeLogistic{2.5},
          stdf::LF{gspec::Frechet{0.4}},
          stdf::LF{gspec::Weibull{1.5}},
          stdf::LF{gspec::MOAtom{law::Gamma{2.0}}},
          stdf::LF{gspec::MOAtom{law::PointMass{0.7}}},
          stdf::LF{step_g()},
          stdf::Triplet{0.4, 1.3, {{gspec::Frechet{0.6}, 0.3}, {step_g(), 0.7}}}};
}

}  // namespace

TEST(Stdf, LogisticExamples) {
  std::vector<double> x{0.3, 1.2, 0.7};
  EXPECT_NEAR(stdf_eval(stdf::Logistic{1.0}, x), 2.2, 1e-14);
  std::vector<double> one{1, 1};
  EXPECT_NEAR(stdf_eval(stdf::Logistic{0.5}, one), std::sqrt(2.0), 1e-14);
}

TEST(Stdf, MoAtomInfinityIsMarshallOlkin) {
  StdfSpec s = stdf::LF{gspec::MOAtom{law::PointMass{kInf}}};
  auto mo = make_lom({1, std::exp(-1.0), std::exp(-1.0)}, LomFlavor::continuous);
  for (double a : {0.0, 0.3, 1.0, 2.5})
    for (double b : {0.1, 0.9, 1.7}) {
      std::vector<double> x{a, b};
      EXPECT_NEAR(stdf_eval(s, x), std::max(a, b), 1e-14);
      EXPECT_NEAR(minstable_survival(s, 1.0, x), mo_survival(mo, x), 1e-14);
    }
}

TEST(Stdf, MoAtomPointMassMatchesSubordinator) {
  double m = 0.8;
  StdfSpec s = stdf::LF{gspec::MOAtom{law::PointMass{m}}};
  CompoundPoissonSubordinatorSpec sub{0, 0, {{m, 1 / -std::expm1(-m)}}};
  auto mo = lom_from_subordinator(sub, 3);
  Rng rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x{2 * rng.uniform(), 2 * rng.uniform(), 2 * rng.uniform()};
    EXPECT_NEAR(minstable_survival(s, 1.0, x), mo_survival(mo, x), 1e-12);
  }
}

TEST(Stdf, QuadratureOracles) {
  for (auto x : std::initializer_list<std::vector<double>>{{1, 1}, {0.2, 1.5, 0.7}, {3, 0.1}}) {
    EXPECT_NEAR(ell_G(gspec::Weibull{1.5}, x), weibull_ell_oracle(1.5, x), 1e-8);
    EXPECT_NEAR(ell_G(gspec::Weibull{0.4}, x), weibull_ell_oracle(0.4, x), 1e-8);
    EXPECT_NEAR(ell_G(step_g(), x), step_ell_oracle(step_g(), x), 1e-12);
    EXPECT_NEAR(ell_G(gspec::MOAtom{law::Gamma{2.0}}, x), mo_atom_gamma_oracle(2.0, x), 1e-8);
  }
}

TEST(Stdf, FrechetMatchesLogistic) {
  Rng rng(42);
  for (double th : {0.2, 0.5, 0.85})
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> x{rng.uniform() + 0.01, 2 * rng.uniform(), 0.5 * rng.uniform() + 0.1};
      EXPECT_NEAR(stdf_eval(stdf::LF{gspec::Frechet{th}}, x), stdf_eval(stdf::Logistic{th}, x), 1e-6);
    }
}

TEST(Stdf, NegativeLogisticBivariate) {
  for (double th : {0.5, 1.0, 3.0})
    for (double a : {0.2, 1.0, 2.0})
      for (double b : {0.5, 1.5}) {
        std::vector<double> x{a, b};
        EXPECT_NEAR(stdf_eval(stdf::NegativeLogistic{th}, x),
                    a + b - std::pow(std::pow(a, -th) + std::pow(b, -th), -1 / th), 1e-13);
      }
  std::vector<double> x{0.0, 1.3};
  EXPECT_NEAR(stdf_eval(stdf::NegativeLogistic{2.0}, x), 1.3, 1e-14);
}

TEST(Stdf, HomogeneityAndBounds) {
  auto zoo = spec_zoo();
  Rng rng(43);
  for (int rep = 0; rep < 200; ++rep) {
    const auto& s = zoo[rep % zoo.size()];
    int d = 1 + rep % 4;
    std::vector<double> x(d), tx(d);
    double t = 0.1 + 5 * rng.uniform();
    for (int k = 0; k < d; ++k) {
      x[k] = rng.uniform() < 0.1 ? 0.0 : 3 * rng.uniform();
      tx[k] = t * x[k];
    }
    double l = stdf_eval(s, x), lt = stdf_eval(s, tx);
    EXPECT_LE(std::abs(lt - t * l), 1e-9 * std::max(lt, 1e-300)) << rep;
    double mx = *std::max_element(x.begin(), x.end()), sum = 0;
    for (double v : x) sum += v;
    EXPECT_GE(l, mx * (1 - 1e-9)) << rep;
    EXPECT_LE(l, sum * (1 + 1e-9)) << rep;
  }
}

TEST(Stdf, UnitMargins) {
  for (const auto& s : spec_zoo()) {
    std::vector<double> e{0, 1.0, 0};
    EXPECT_NEAR(stdf_eval(s, e), 1.0, 1e-8);
  }
}

TEST(MinstableSurvival, Examples) {
  std::vector<double> one{1, 1}, x1{0.7};
  EXPECT_NEAR(minstable_survival(stdf::Logistic{0.3}, 2.0, x1), std::exp(-1.4), 1e-14);
  EXPECT_NEAR(minstable_survival(stdf::Independence{}, 1.0, one), std::exp(-2.0), 1e-14);
  EXPECT_NEAR(minstable_survival(stdf::Logistic{0.5}, 1.0, one), std::exp(-std::sqrt(2.0)), 1e-14);
}

TEST(MinstableSurvival, MinStability) {
  Rng rng(44);
  for (const auto& s : spec_zoo()) {
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> x{rng.uniform(), 2 * rng.uniform()}, tx(2);
      double t = 0.2 + 3 * rng.uniform();
      for (int k = 0; k < 2; ++k) tx[k] = t * x[k];
      EXPECT_NEAR(std::pow(minstable_survival(s, 1.0, x), t), minstable_survival(s, 1.0, tx), 1e-9);
    }
  }
  StdfSpec lg = stdf::Logistic{0.4};
  std::vector<double> x{0.3, 0.8, 1.1}, tx{0.6, 1.6, 2.2};
  EXPECT_NEAR(std::pow(minstable_survival(lg, 1.0, x), 2), minstable_survival(lg, 1.0, tx), 1e-12);
}

TEST(EvCopula, Examples) {
  std::vector<double> u{std::exp(-1.0), std::exp(-1.0)};
  EXPECT_NEAR(extreme_value_copula_eval(stdf::Logistic{0.5}, u), std::exp(-std::sqrt(2.0)), 1e-14);
  std::vector<double> v{0.3, 0.6, 0.9};
  EXPECT_NEAR(extreme_value_copula_eval(stdf::Independence{}, v), 0.3 * 0.6 * 0.9, 1e-14);
  for (const auto& s : spec_zoo()) {
    std::vector<double> w{0.35, 1, 1};
    EXPECT_NEAR(extreme_value_copula_eval(s, w), 0.35, 1e-8);
    std::vector<double> z{0.5, 0, 0.2};
    EXPECT_EQ(extreme_value_copula_eval(s, z), 0.0);
  }
}

TEST(EvCopula, PowerIdentity) {
  Rng rng(45);
  for (StdfSpec s : {StdfSpec{stdf::Logistic{0.6}}, StdfSpec{stdf::NegativeLogistic{1.2}}, StdfSpec{stdf::LF{step_g()}}}) {
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> u{rng.uniform(), rng.uniform(), rng.uniform()}, ut(3);
      double t = 0.1 + 4 * rng.uniform();
      for (int k = 0; k < 3; ++k) ut[k] = std::pow(u[k], t);
      EXPECT_NEAR(std::pow(extreme_value_copula_eval(s, u), t), extreme_value_copula_eval(s, ut), 1e-12);
    }
  }
}

TEST(SeriesSampler, SmallCIsIid) {
  StdfSpec s = stdf::Triplet{2.0, 1e-9, {{gspec::Frechet{0.5}, 1.0}}};
  Rng rng(46);
  std::size_t n = 20000;
  auto m = sample_minstable(s, 2, n, rng);
  for (int k = 0; k < 2; ++k)
    EXPECT_LT(ks_distance(m.column(k), [](double x) { return 1 - std::exp(-2 * x); }), ks_crit(n));
  EXPECT_LT(std::abs(empirical_kendall_tau(m.column(0), m.column(1))), 3 * kendall_tau_stderr(n));
}

TEST(SeriesSampler, LogisticMatchesDirect) {
  double th = 0.5;
  auto a = draw_matrix_parallel(minstable_sampler(stdf::Logistic{th}, 3), 50000, 47, 1);
  auto b = draw_matrix_parallel(logistic_direct_sampler(th, 1.0, 3), 50000, 48, 1);
  EXPECT_TRUE(compare_samples(a, b, empirical_quantile_grid(b)).pass);
  auto r = mc_report(a, [&](std::span<const double> x) { return minstable_survival(stdf::Logistic{th}, 1.0, x); },
                     empirical_quantile_grid(a));
  EXPECT_TRUE(r.pass);
}

TEST(SeriesSampler, MoAtomMatchesSubordinator) {
  double m = 0.8;
  StdfSpec s = stdf::LF{gspec::MOAtom{law::PointMass{m}}};
  CompoundPoissonSubordinatorSpec sub{0, 0, {{m, 1 / -std::expm1(-m)}}};
  auto a = draw_matrix_parallel(minstable_sampler(s, 3), 50000, 49, 1);
  auto b = draw_matrix_parallel(mo_ciid_sampler(sub, 3), 50000, 50, 1);
  EXPECT_TRUE(compare_samples(a, b, empirical_quantile_grid(b)).pass);
}

TEST(SeriesSampler, TripletMatchesSurvivalAndMargins) {
  StdfSpec s = stdf::Triplet{0.5, 1.0, {{gspec::Weibull{2.0}, 0.5}, {step_g(), 0.5}}};
  std::size_t n = 50000;
  auto m = draw_matrix_parallel(minstable_sampler(s, 2), n, 51, 1);
  for (int k = 0; k < 2; ++k)
    EXPECT_LT(ks_distance(m.column(k), [](double x) { return 1 - std::exp(-1.5 * x); }), ks_crit(n));
  auto r = mc_report(m, [&](std::span<const double> x) { return minstable_survival(s, 1.5, x); }, empirical_quantile_grid(m));
  EXPECT_TRUE(r.pass);
}

TEST(SeriesSampler, IndependenceShortcut) {
  Rng rng(52);
  std::size_t n = 20000;
  auto m = sample_minstable(stdf::Independence{}, 2, n, rng);
  EXPECT_LT(ks_distance(m.column(1), [](double x) { return 1 - std::exp(-x); }), ks_crit(n));
}

TEST(LogisticDirect, BivariateSurvivalAndMinimum) {
  double th = 0.5;
  Rng rng(53);
  std::size_t n = 100000;
  auto m = sample_logistic_direct(th, 1.0, 2, n, rng);
  double p11 = surv(m, {1, 1});
  EXPECT_MC(p11, std::exp(-std::pow(2.0, th)), n);
  std::vector<double> mn(n);
  for (std::size_t i = 0; i < n; ++i) mn[i] = std::min(m(i, 0), m(i, 1));
  double rate = std::pow(2.0, th);
  EXPECT_LT(ks_distance(mn, [&](double x) { return 1 - std::exp(-rate * x); }), ks_crit(n));
  EXPECT_THROW(logistic_direct_sampler(1.0, 1.0, 2), ValidationError);
}

TEST(LogisticDirect, RateScaling) {
  Rng rng(54);
  std::size_t n = 20000;
  auto m = sample_logistic_direct(0.3, 2.5, 2, n, rng);
  EXPECT_LT(ks_distance(m.column(0), [](double x) { return 1 - std::exp(-2.5 * x); }), ks_crit(n));
}

TEST(LogisticDirect, ApproachesIndependence) {
  Rng rng(55);
  std::size_t n = 20000;
  double prev = 2;
  for (double th : {0.3, 0.7, 0.97}) {
    auto m = sample_logistic_direct(th, 1.0, 2, n, rng);
    double tau = empirical_kendall_tau(m.column(0), m.column(1));
    EXPECT_NEAR(tau, 1 - th, 3 * kendall_tau_stderr(n) + 0.01);
    EXPECT_LT(tau, prev);
    prev = tau;
  }
}

TEST(GSpec, Validation) {
  EXPECT_THROW(validate(GSpec{gspec::Frechet{1.0}}), ValidationError);
  EXPECT_THROW(validate(GSpec{gspec::StepFunction{{0.5, 2.0}, {0.2, 0.5, 1.0}}}), ValidationError);
  EXPECT_NO_THROW(validate(GSpec{step_g()}));
  EXPECT_THROW(validate(StdfSpec{stdf::Triplet{0.5, 1.0, {{step_g(), 0.4}}}}), ValidationError);
}
