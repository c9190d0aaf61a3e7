#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ciid/diagnostics.hpp"
#include "ciid/lack_of_memory.hpp"
#include "ciid/shock_models.hpp"
#include "support.hpp"

using namespace ciid;
using namespace testing_support;

namespace {

ShockSurvivalSpec exp_shocks(std::vector<double> rates) {
  ShockSurvivalSpec s;
  for (double r : rates) s.hbar.push_back(shock::Exponential{r});
  return s;
}

SampleMatrix to_uniform(SampleMatrix s, const std::function<double(double)>& f) {
  for (double& v : s.data) v = f(v);
  return s;
}

Grid copula_grid() {
  return {{0.5, 0.5, 0.5}, {0.2, 0.7, 0.9}, {0.9, 0.9, 0.3}, {0.1, 0.4, 0.6}, {0.75, 0.25, 0.5},
          {0.3, 0.3, 0.8}, {0.6, 0.95, 0.6}, {0.8, 0.8, 0.8}, {0.4, 0.2, 0.95}, {0.15, 0.85, 0.5}};
}

}  // namespace

TEST(ExshockCopula, IdiosyncraticIsIndependence) {
  ShockSurvivalSpec s{{shock::Weibull{1.0, 2.0}, shock::Exponential{0}, shock::Exponential{0}}};
  std::vector<double> u{0.3, 0.8, 0.5};
  EXPECT_NEAR(exshock_copula_eval(s, u), 0.12, 1e-12);
}

TEST(ExshockCopula, GlobalIsComonotone) {
  ShockSurvivalSpec s{{shock::Exponential{0}, shock::Exponential{0}, shock::Pareto{2.0}}};
  std::vector<double> u{0.3, 0.8, 0.5};
  EXPECT_NEAR(exshock_copula_eval(s, u), 0.3, 1e-12);
}

TEST(ExshockCopula, ExponentialShocksGiveMarshallOlkin) {
  std::vector<double> r{0.4, 0.2, 0.3};
  auto spec = exp_shocks(r);
  ShockRateSpec rs;
  rs.d = 3;
  rs.cardinality_rates = r;
  auto mo = b_from_lambda(rs);
  double lb1 = std::log(mo.b[1]);
  for (const auto& u : copula_grid()) {
    std::vector<double> x;
    for (double v : u) x.push_back(std::log(v) / lb1);
    EXPECT_NEAR(exshock_copula_eval(spec, u), mo_survival(mo, x), 1e-10);
  }
}

TEST(ExshockCopula, SamplerMatchesCopula) {
  ShockSurvivalSpec spec{{shock::Weibull{1.0, 0.7}, shock::Pareto{1.5}, shock::Exponential{0.5}}};
  std::size_t n = 100000;
  auto s = draw_matrix_parallel(exshock_sampler(spec), n, 61, 1);
  auto u = to_uniform(s, [&](double x) { return exshock_marginal_survival(spec, x); });
  auto r = mc_report(u, [&](std::span<const double> v) { return exshock_copula_eval(spec, v); }, copula_grid(),
                     ProbabilityKind::cdf);
  EXPECT_TRUE(r.pass);
  auto surv_r = mc_report(s, [&](std::span<const double> x) { return exshock_survival(spec, x); }, empirical_quantile_grid(s));
  EXPECT_TRUE(surv_r.pass);
}

TEST(ExshockCopula, Diagonal) {
  ShockSurvivalSpec spec{{shock::Exponential{1.0}, shock::Weibull{2.0, 1.5}, shock::Pareto{1.0}}};
  std::size_t n = 100000;
  auto s = draw_matrix_parallel(exshock_sampler(spec), n, 62, 1);
  auto u = to_uniform(s, [&](double x) { return exshock_marginal_survival(spec, x); });
  for (double v : {0.2, 0.5, 0.8}) {
    std::vector<double> g{v, v, v};
    double c = exshock_copula_eval(spec, g);
    EXPECT_MC(cdf(u, g), c, n);
  }
}

TEST(ExshockSampler, DimensionCap) {
  ShockSurvivalSpec big;
  big.hbar.assign(21, shock::Exponential{1.0});
  EXPECT_THROW(exshock_sampler(big), ValidationError);
}

TEST(Additive, LevyReduction) {
  CompoundPoissonSubordinatorSpec sub{0.5, 0.1, {{1.0, 0.7}}};
  AdditiveFamilySpec a = additive::PiecewiseLevy{{}, {sub}};
  auto mo = lom_from_subordinator(sub, 3);
  Rng rng(63);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x{2 * rng.uniform(), 2 * rng.uniform(), 2 * rng.uniform()};
    EXPECT_NEAR(additive_survival(a, x), mo_survival(mo, x), 1e-12);
  }
}

TEST(Additive, TrivialCases) {
  AdditiveFamilySpec a = additive::Sato{2.0};
  std::vector<double> z{0, 0, 0}, one{0.7};
  EXPECT_EQ(additive_survival(a, z), 1.0);
  EXPECT_NEAR(additive_survival(a, one), std::exp(-additive_exponent(a, 0.7, 1.0)), 1e-15);
  EXPECT_NEAR(additive_survival(a, one), std::pow(1.7, -2.0), 1e-12);
}

TEST(Additive, MonotoneAndExchangeable) {
  CompoundPoissonSubordinatorSpec p1{1.0, 0.0, {}}, p2{0.2, 0.0, {{0.5, 2.0}}};
  std::vector<AdditiveFamilySpec> specs{additive::PiecewiseLevy{{1.0}, {p1, p2}}, additive::DirichletPrior{2.0, base::Normal{}},
                                        additive::Sato{1.5}};
  Rng rng(64);
  for (const auto& a : specs)
    for (int rep = 0; rep < 30; ++rep) {
      std::vector<double> x{2 * rng.uniform(), 2 * rng.uniform(), 2 * rng.uniform()};
      double f = additive_survival(a, x);
      auto y = x;
      std::next_permutation(y.begin(), y.end());
      EXPECT_NEAR(additive_survival(a, y), f, 1e-12);
      y = x;
      y[rep % 3] += 0.3;
      EXPECT_LE(additive_survival(a, y), f + 1e-12);
    }
}

TEST(DirichletPrior, LargeCIsIid) {
  Rng rng(65);
  std::size_t n = 20000;
  auto s = sample_dp(1e6, base::Uniform{}, 2, n, rng);
  for (int k = 0; k < 2; ++k) EXPECT_LT(ks_distance(s.column(k), [](double x) { return x; }), ks_crit(n));
  EXPECT_LT(std::abs(empirical_kendall_tau(s.column(0), s.column(1))), 3 * kendall_tau_stderr(n));
}

TEST(DirichletPrior, SmallCIsComonotone) {
  Rng rng(66);
  auto s = sample_dp(1e-6, base::Exponential{2.0}, 4, 10000, rng);
  std::size_t same = 0;
  for (std::size_t i = 0; i < s.n; ++i) same += s(i, 0) == s(i, 1) && s(i, 1) == s(i, 2) && s(i, 2) == s(i, 3);
  EXPECT_GE(same, s.n - 1);
}

TEST(DirichletPrior, BivariateDiagonal) {
  Rng rng(67);
  std::size_t n = 100000;
  auto s = sample_dp(1.0, base::Uniform{}, 2, n, rng);
  for (double x : {0.2, 0.5, 0.8}) {
    double p = cdf(s, {x, x});
    EXPECT_MC(p, x * (x + 1) / 2, n);
  }
}

TEST(DirichletPrior, CopulaExamples) {
  std::vector<double> h{0.5, 0.5}, z{0.3, 0.0, 0.9}, u{0.3, 0.6, 0.9};
  EXPECT_NEAR(dp_copula_eval(1.0, h), 0.375, 1e-15);
  EXPECT_EQ(dp_copula_eval(3.0, z), 0.0);
  EXPECT_NEAR(dp_copula_eval(1e8, u), 0.3 * 0.6 * 0.9, 1e-6);
}

TEST(DirichletPrior, SamplerMatchesCopula) {
  for (double c : {0.5, 2.0}) {
    auto r = mc_verify(dp_sampler(c, base::Uniform{}, 3), [&](std::span<const double> u) { return dp_copula_eval(c, u); },
                       copula_grid(), 100000, 68, ProbabilityKind::cdf);
    EXPECT_TRUE(r.pass) << c;
  }
}

TEST(DirichletPrior, AdditiveSurvivalMatchesSampler) {
  AdditiveFamilySpec a = additive::DirichletPrior{2.0, base::Exponential{1.0}};
  std::size_t n = 100000;
  auto s = draw_matrix_parallel(dp_sampler(2.0, base::Exponential{1.0}, 3), n, 69, 1);
  auto r = mc_report(s, [&](std::span<const double> x) { return additive_survival(a, x); }, empirical_quantile_grid(s));
  EXPECT_TRUE(r.pass);
}

TEST(Sato, Examples) {
  for (double x : {0.0, 0.4, 3.0}) {
    std::vector<double> v{x};
    EXPECT_NEAR(sato_survival(2.5, v), std::pow(1 + x, -2.5), 1e-14);
  }
  std::vector<double> z{0, 0};
  EXPECT_EQ(sato_survival(1.0, z), 1.0);
  std::vector<double> bad{-0.1, 1.0};
  EXPECT_THROW(sato_survival(1.0, bad), ValidationError);
}

TEST(Sato, AgreesWithAdditive) {
  Rng rng(70);
  for (double al : {0.5, 1.0, 3.0})
    for (int rep = 0; rep < 20; ++rep) {
      int d = 1 + rep % 4;
      std::vector<double> x(d);
      for (auto& v : x) v = 3 * rng.uniform();
      EXPECT_NEAR(sato_survival(al, x), additive_survival(additive::Sato{al}, x), 1e-12);
    }
}

TEST(SelfDecomposable, Probes) {
  EXPECT_TRUE(check_self_decomposable(bernstein::Gamma{1.0}));
  EXPECT_TRUE(check_self_decomposable(bernstein::Gamma{3.0}));
  EXPECT_TRUE(check_self_decomposable(bernstein::Stable{0.5}));
  EXPECT_FALSE(check_self_decomposable(CompoundPoissonSubordinatorSpec{0, 1.0, {}}));
  EXPECT_FALSE(check_self_decomposable(CompoundPoissonSubordinatorSpec{0, 0, {{1.0, 1.0}}}));
}

TEST(RadialSymmetry, DirichletPassesShocksFail) {
  std::size_t n = 50000;
  auto dp = draw_matrix_parallel(dp_sampler(2.0, base::Normal{}, 3), n, 71, 1);
  EXPECT_TRUE(radial_symmetry_test(dp, 0.0));
  auto mo = draw_matrix_parallel(exshock_sampler(exp_shocks({0.4, 0.2, 0.3})), n, 72, 1);
  double med = pooled_quantile(mo)(0.5);
  EXPECT_FALSE(radial_symmetry_test(mo, med));
}
