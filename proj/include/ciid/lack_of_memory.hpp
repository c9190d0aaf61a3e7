#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ciid/errors.hpp"
#include "ciid/mixing_law.hpp"
#include "ciid/moments.hpp"
#include "ciid/numerics.hpp"
#include "ciid/rng.hpp"

namespace ciid {

enum class LomFlavor { continuous, discrete };

// b-sequence of a Marshall-Olkin (continuous) or wide-sense geometric
// (discrete) law.
struct LomParameterSeq {
  MonotoneSequence b;
  LomFlavor flavor = LomFlavor::continuous;

  LomParameterSeq() = default;
  LomParameterSeq(MonotoneSequence seq, LomFlavor f) : b(std::move(seq)), flavor(f) {
    if (b.d() >= 1) require(b[1] < 1.0, "b_1 must be < 1 (every component must be able to fail)");
    if (flavor == LomFlavor::continuous) {
      for (double v : b.values) require(v > 0.0, "Marshall-Olkin b-sequence must be strictly positive");
      require(is_log_d_monotone(b), "Marshall-Olkin b-sequence must be log-d-monotone");
    } else {
      require(is_d_monotone(b), "geometric b-sequence must be d-monotone");
    }
  }
  int d() const { return b.d(); }
};

inline LomParameterSeq make_lom(std::vector<double> b, LomFlavor flavor) {
  return LomParameterSeq(MonotoneSequence(std::move(b)), flavor);
}

using SubsetMask = std::uint32_t;
inline constexpr int kMaxShockDim = 20;

inline int popcount(SubsetMask m) { return __builtin_popcount(m); }

// Exponential shock rates: either per cardinality (lambda_1..lambda_d, the
// rate of one fixed subset of that size) or a full subset map.
struct ShockRateSpec {
  int d = 0;
  std::vector<double> cardinality_rates;
  std::map<SubsetMask, double> subsets;

  bool full_map() const { return !subsets.empty(); }
  double rate(SubsetMask I) const {
    if (full_map()) {
      auto it = subsets.find(I);
      return it == subsets.end() ? 0.0 : it->second;
    }
    return cardinality_rates[popcount(I) - 1];
  }
  bool exchangeable() const {
    if (!full_map()) return true;
    std::vector<double> by(d + 1, -1.0);
    for (SubsetMask I = 1; I < (SubsetMask(1) << d); ++I) {
      double r = rate(I);
      int c = popcount(I);
      if (by[c] < 0.0) by[c] = r;
      else if (std::abs(by[c] - r) > 1e-12 * std::max(1.0, r)) return false;
    }
    return true;
  }
  std::vector<double> exchangeable_rates() const {
    if (!exchangeable()) throw ValidationError("shock rates are not exchangeable");
    if (!full_map()) return cardinality_rates;
    std::vector<double> r(d);
    for (int c = 1; c <= d; ++c) r[c - 1] = rate((SubsetMask(1) << c) - 1);
    return r;
  }
};

// Geometric shock probabilities: per cardinality p_0..p_d (probability of one
// fixed subset of that size in one period) or a full map including the empty set.
struct ShockProbSpec {
  int d = 0;
  std::vector<double> cardinality_probs;
  std::map<SubsetMask, double> subsets;

  bool full_map() const { return !subsets.empty(); }
  double prob(SubsetMask I) const {
    if (full_map()) {
      auto it = subsets.find(I);
      return it == subsets.end() ? 0.0 : it->second;
    }
    return cardinality_probs[popcount(I)];
  }
  bool exchangeable() const {
    if (!full_map()) return true;
    std::vector<double> by(d + 1, -1.0);
    for (SubsetMask I = 0; I < (SubsetMask(1) << d); ++I) {
      double r = prob(I);
      int c = popcount(I);
      if (by[c] < 0.0) by[c] = r;
      else if (std::abs(by[c] - r) > 1e-12) return false;
    }
    return true;
  }
  std::vector<double> exchangeable_probs() const {
    if (!exchangeable()) throw ValidationError("shock probabilities are not exchangeable");
    if (!full_map()) return cardinality_probs;
    std::vector<double> p(d + 1);
    for (int c = 0; c <= d; ++c) p[c] = prob((SubsetMask(1) << c) - 1);
    return p;
  }
};

inline void validate(const ShockRateSpec& s) {
  require(s.d >= 1 && s.d <= kMaxShockDim, "shock models need 1 <= d <= 20");
  if (!s.full_map()) {
    require(static_cast<int>(s.cardinality_rates.size()) == s.d, "need one rate per cardinality 1..d");
    for (double r : s.cardinality_rates) require(std::isfinite(r) && r >= 0.0, "shock rates must be finite and >= 0");
  } else {
    for (auto [I, r] : s.subsets) {
      require(I != 0 && I < (SubsetMask(1) << s.d), "subset outside {1..d}");
      require(std::isfinite(r) && r >= 0.0, "shock rates must be finite and >= 0");
    }
  }
  for (int k = 0; k < s.d; ++k) {
    double tot = 0.0;
    if (!s.full_map()) {
      for (int c = 1; c <= s.d; ++c) tot += num::binom(s.d - 1, c - 1) * s.cardinality_rates[c - 1];
    } else {
      for (auto [I, r] : s.subsets)
        if (I >> k & 1u) tot += r;
    }
    require(tot > 0.0, "every component needs a positive total shock rate");
  }
}

inline void validate(const ShockProbSpec& s) {
  require(s.d >= 1 && s.d <= kMaxShockDim, "shock models need 1 <= d <= 20");
  double tot = 0.0;
  if (!s.full_map()) {
    require(static_cast<int>(s.cardinality_probs.size()) == s.d + 1, "need one probability per cardinality 0..d");
    for (int c = 0; c <= s.d; ++c) {
      require(std::isfinite(s.cardinality_probs[c]) && s.cardinality_probs[c] >= 0.0, "probabilities must be >= 0");
      tot += num::binom(s.d, c) * s.cardinality_probs[c];
    }
  } else {
    for (auto [I, p] : s.subsets) {
      require(I < (SubsetMask(1) << s.d), "subset outside {1..d}");
      require(std::isfinite(p) && p >= 0.0, "probabilities must be >= 0");
      tot += p;
    }
  }
  require(std::abs(tot - 1.0) <= 1e-12, "subset probabilities must sum to 1");
  for (int k = 0; k < s.d; ++k) {
    double miss = 0.0;
    for (SubsetMask I = 0; I < (SubsetMask(1) << s.d); ++I)
      if (!(I >> k & 1u)) miss += s.prob(I);
    require(miss < 1.0 - 1e-15, "every component needs a positive probability of being hit");
  }
}

// Laplace exponent a 1{x>0} + mu x + sum beta_j (1 - exp(-m_j x)).
struct CompoundPoissonSubordinatorSpec {
  struct Jump {
    double size = 1.0;
    double rate = 1.0;
  };
  double drift = 0.0;
  double kill = 0.0;
  std::vector<Jump> jumps;

  double laplace_exponent(double x) const {
    if (x <= 0.0) return 0.0;
    double s = kill + drift * x;
    for (const auto& j : jumps) s += j.rate * (std::isinf(j.size) ? 1.0 : -std::expm1(-j.size * x));
    return s;
  }
  double jump_intensity() const {
    double s = 0.0;
    for (const auto& j : jumps) s += j.rate;
    return s;
  }
};

inline void validate(const CompoundPoissonSubordinatorSpec& s) {
  require(std::isfinite(s.drift) && s.drift >= 0.0, "drift must be >= 0");
  require(std::isfinite(s.kill) && s.kill >= 0.0, "kill rate must be >= 0");
  for (const auto& j : s.jumps) {
    require(j.size > 0.0, "jump sizes must be > 0");
    require(std::isfinite(j.rate) && j.rate > 0.0, "jump rates must be > 0");
  }
  require(s.laplace_exponent(1.0) > 0.0, "subordinator must be non-degenerate");
}

namespace detail {
// prod_k b_k^(x_[d-k+1] - x_[d-k]) with 0^0 = 1.
inline double lom_product(const std::vector<double>& b, std::vector<double> x) {
  std::sort(x.begin(), x.end());
  int d = static_cast<int>(x.size());
  double logs = 0.0;
  for (int k = 1; k <= d; ++k) {
    double hi = x[d - k], lo = d - k - 1 >= 0 ? x[d - k - 1] : 0.0;
    double e = hi - lo;
    if (e == 0.0) continue;
    if (b[k] == 0.0) return 0.0;
    logs += e * std::log(b[k]);
  }
  return std::exp(logs);
}
}  // namespace detail

inline double mo_survival(const LomParameterSeq& params, std::span<const double> x) {
  require(params.flavor == LomFlavor::continuous, "mo_survival needs a continuous-flavour sequence");
  require(static_cast<int>(x.size()) == params.d(), "dimension mismatch");
  for (double v : x) require(v >= 0.0, "coordinates must be >= 0");
  return detail::lom_product(params.b.values, {x.begin(), x.end()});
}

inline double geo_survival(const LomParameterSeq& params, std::span<const long> nvec) {
  require(params.flavor == LomFlavor::discrete, "geo_survival needs a discrete-flavour sequence");
  require(static_cast<int>(nvec.size()) == params.d(), "dimension mismatch");
  std::vector<double> x;
  for (long v : nvec) {
    require(v >= 0, "coordinates must be >= 0");
    x.push_back(static_cast<double>(v));
  }
  return detail::lom_product(params.b.values, std::move(x));
}

// P(X > x) for real x: integer-valued X so only floor(x) matters.
inline double geo_survival_real(const LomParameterSeq& params, std::span<const double> x) {
  std::vector<long> n;
  for (double v : x) n.push_back(v < 0.0 ? 0L : static_cast<long>(std::floor(v)));
  for (double v : x) require(v >= 0.0, "coordinates must be >= 0");
  return geo_survival(params, n);
}

inline LomParameterSeq b_from_lambda(const ShockRateSpec& lam) {
  validate(lam);
  auto r = lam.exchangeable_rates();
  int d = lam.d;
  std::vector<double> b(d + 1, 1.0);
  double acc = 0.0;
  for (int i = 1; i <= d; ++i) {
    double s = 0.0;
    for (int j = 0; j <= d - i; ++j) s += num::binom(d - i, j) * r[j];
    acc += s;
    b[i] = std::exp(-acc);
  }
  return make_lom(std::move(b), LomFlavor::continuous);
}

inline LomParameterSeq b_from_p(const ShockProbSpec& ps) {
  validate(ps);
  auto p = ps.exchangeable_probs();
  int d = ps.d;
  std::vector<double> b(d + 1);
  for (int k = 0; k <= d; ++k) {
    double s = 0.0;
    for (int i = 0; i <= d - k; ++i) s += num::binom(d - k, i) * p[i];
    b[k] = std::max(s, 0.0);
  }
  b[0] = 1.0;
  return make_lom(std::move(b), LomFlavor::discrete);
}

// Exchangeable shock rates reproducing a continuous-flavour sequence.
inline ShockRateSpec shock_rates_from_lom(const LomParameterSeq& params) {
  require(params.flavor == LomFlavor::continuous, "shock rates need a continuous-flavour sequence");
  int d = params.d();
  std::vector<double> c(d);
  for (int k = 0; k < d; ++k) c[k] = -std::log(params.b[k + 1] / params.b[k]);
  ShockRateSpec s;
  s.d = d;
  s.cardinality_rates.resize(d);
  for (int i = 0; i < d; ++i) s.cardinality_rates[i] = std::max(0.0, detail::backward_difference(c, i, d - 1 - i));
  return s;
}

inline ShockProbSpec shock_probs_from_lom(const LomParameterSeq& params) {
  require(params.flavor == LomFlavor::discrete, "shock probabilities need a discrete-flavour sequence");
  int d = params.d();
  ShockProbSpec s;
  s.d = d;
  s.cardinality_probs.resize(d + 1);
  for (int i = 0; i <= d; ++i)
    s.cardinality_probs[i] = std::max(0.0, detail::backward_difference(params.b.values, i, d - i));
  return s;
}

inline RowSampler mo_shock_sampler(const ShockRateSpec& spec) {
  validate(spec);
  int d = spec.d;
  std::vector<double> rates(std::size_t(1) << d, 0.0);
  for (SubsetMask I = 1; I < (SubsetMask(1) << d); ++I) rates[I] = spec.rate(I);
  return {static_cast<std::size_t>(d),
          [rates, d](Rng& rng, std::span<double> x) {
            std::fill(x.begin(), x.end(), kInf);
            for (SubsetMask I = 1; I < (SubsetMask(1) << d); ++I) {
              if (rates[I] <= 0.0) continue;
              double e = rng.exponential() / rates[I];
              for (int k = 0; k < d; ++k)
                if (I >> k & 1u) x[k] = std::min(x[k], e);
            }
          },
          "marshall_olkin shocks"};
}

inline SampleMatrix sample_mo_shocks(const ShockRateSpec& spec, int d, std::size_t n, Rng& rng) {
  require(spec.d == d, "dimension mismatch");
  return draw_matrix(mo_shock_sampler(spec), n, rng);
}

inline RowSampler geo_shock_sampler(const ShockProbSpec& spec) {
  validate(spec);
  int d = spec.d;
  std::vector<double> cum;
  std::vector<SubsetMask> masks;
  double c = 0.0;
  if (spec.full_map()) {
    for (auto [I, p] : spec.subsets)
      if (p > 0.0) {
        c += p;
        cum.push_back(c);
        masks.push_back(I);
      }
  } else {
    for (int k = 0; k <= d; ++k) {
      c += num::binom(d, k) * spec.cardinality_probs[k];
      cum.push_back(c);
    }
  }
  bool full = spec.full_map();
  return {static_cast<std::size_t>(d),
          [cum, masks, full, d](Rng& rng, std::span<double> x) {
            std::fill(x.begin(), x.end(), 0.0);
            int left = d;
            std::vector<int> idx(d);
            for (long t = 1; left > 0; ++t) {
              if (t > 1000000000L) throw NumericalError("geometric shock walk did not terminate");
              double u = rng.uniform() * cum.back();
              std::size_t j = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
              j = std::min(j, cum.size() - 1);
              SubsetMask I = 0;
              if (full) {
                I = masks[j];
              } else {
                std::iota(idx.begin(), idx.end(), 0);
                for (std::size_t s = 0; s < j; ++s) {
                  std::size_t r = s + rng.below(d - s);
                  std::swap(idx[s], idx[r]);
                  I |= SubsetMask(1) << idx[s];
                }
              }
              for (int k = 0; k < d; ++k)
                if ((I >> k & 1u) && x[k] == 0.0) {
                  x[k] = static_cast<double>(t);
                  --left;
                }
            }
          },
          "geometric shocks"};
}

inline SampleMatrix sample_geo_shocks(const ShockProbSpec& spec, int d, std::size_t n, Rng& rng) {
  require(spec.d == d, "dimension mismatch");
  return draw_matrix(geo_shock_sampler(spec), n, rng);
}

inline LomParameterSeq lom_from_subordinator(const CompoundPoissonSubordinatorSpec& sub, int d) {
  validate(sub);
  std::vector<double> b(d + 1);
  for (int k = 0; k <= d; ++k) b[k] = std::exp(-sub.laplace_exponent(k));
  return make_lom(std::move(b), LomFlavor::continuous);
}

// X_k = inf{t : Z_t > eps_k} for the compound Poisson path, simulated event by event.
inline RowSampler mo_ciid_sampler(const CompoundPoissonSubordinatorSpec& sub, int d) {
  validate(sub);
  require(d >= 1, "d must be >= 1");
  return {static_cast<std::size_t>(d),
          [sub, d](Rng& rng, std::span<double> x) {
            std::vector<std::pair<double, int>> eps(d);
            for (int k = 0; k < d; ++k) eps[k] = {rng.exponential(), k};
            std::sort(eps.begin(), eps.end());
            double lam = sub.jump_intensity(), mu = sub.drift, t = 0.0, z = 0.0;
            int next = 0;
            while (next < d) {
              double wj = lam > 0.0 ? rng.exponential() / lam : kInf;
              double wk = sub.kill > 0.0 ? rng.exponential() / sub.kill : kInf;
              double tau = std::min(wj, wk);
              while (next < d && mu > 0.0 && z + mu * tau >= eps[next].first) {
                x[eps[next].second] = t + (eps[next].first - z) / mu;
                ++next;
              }
              if (next == d) break;
              if (std::isinf(tau)) throw NumericalError("subordinator path never crosses the threshold");
              t += tau;
              z += mu * tau;
              if (wk <= wj) {
                while (next < d) x[eps[next++].second] = t;
                break;
              }
              double u = rng.uniform() * lam, c = 0.0;
              double m = sub.jumps.back().size;
              for (const auto& j : sub.jumps) {
                c += j.rate;
                if (u <= c) {
                  m = j.size;
                  break;
                }
              }
              z += m;
              while (next < d && eps[next].first < z) x[eps[next++].second] = t;
            }
          },
          "marshall_olkin subordinator"};
}

inline SampleMatrix sample_mo_ciid(const CompoundPoissonSubordinatorSpec& sub, int d, std::size_t n, Rng& rng) {
  return draw_matrix(mo_ciid_sampler(sub, d), n, rng);
}

// Increment law of the integer-time random walk: Y = M, or Y = -log M when
// negative_log is set (M on [0,1], M = 0 meaning Y = +inf).
struct GeoWalkLaw {
  MixingLawSpec law;
  bool negative_log = false;

  double laplace(int k) const {
    if (negative_log) return moment(law, k);
    return laplace_transform(law, k);
  }
  double draw(Rng& rng) const {
    double m = sample(law, rng);
    if (!negative_log) return m;
    return m <= 0.0 ? kInf : -std::log(m);
  }
};

inline LomParameterSeq lom_from_walk(const GeoWalkLaw& Y, int d) {
  validate(Y.law);
  if (Y.negative_log) require(upper_support(Y.law) <= 1.0, "negative_log walk needs a law on [0,1]");
  std::vector<double> b(d + 1);
  b[0] = 1.0;
  for (int k = 1; k <= d; ++k) b[k] = Y.laplace(k);
  return make_lom(std::move(b), LomFlavor::discrete);
}

// X_k = inf{n : Y_1 + ... + Y_n > eps_k}; the walk is capped where the
// probability of still running is below 1e-12.
inline RowSampler geo_ciid_sampler(const GeoWalkLaw& Y, int d) {
  auto lom = lom_from_walk(Y, d);
  double b1 = lom.b[1];
  long cap = b1 <= 0.0 ? 1L : static_cast<long>(std::ceil(std::log(1e-12 / d) / std::log(b1))) + 1;
  return {static_cast<std::size_t>(d),
          [Y, d, cap](Rng& rng, std::span<double> x) {
            std::vector<std::pair<double, int>> eps(d);
            for (int k = 0; k < d; ++k) eps[k] = {rng.exponential(), k};
            std::sort(eps.begin(), eps.end());
            double z = 0.0;
            int next = 0;
            for (long t = 1; next < d; ++t) {
              if (t > cap) throw NumericalError("geometric walk exceeded its iteration cap");
              z += Y.draw(rng);
              while (next < d && eps[next].first < z) x[eps[next++].second] = static_cast<double>(t);
            }
          },
          "geometric walk " + describe(Y.law)};
}

inline SampleMatrix sample_geo_ciid(const GeoWalkLaw& Y, int d, std::size_t n, Rng& rng) {
  return draw_matrix(geo_ciid_sampler(Y, d), n, rng);
}

inline ExtendibilityVerdict is_ciid_extendible(const LomParameterSeq& params) {
  if (params.flavor == LomFlavor::discrete) return hausdorff_extendible(params.b);
  int d = params.d();
  if (d == 0) return hausdorff_extendible(params.b);
  std::vector<double> c(d);
  for (int k = 0; k < d; ++k) c[k] = -std::log(params.b[k + 1] / params.b[k]);
  double c0 = c[0];
  for (double& v : c) v = std::max(0.0, v / c0);
  c[0] = 1.0;
  return hausdorff_extendible(MonotoneSequence(std::move(c)));
}

// b_k = Gamma(p+k) Gamma(p+q) / (Gamma(p) Gamma(p+q+k)).
inline LomParameterSeq beta_family_bseq(double p, double q, int d) {
  require(p > 0.0 && q > 0.0, "beta parameters must be > 0");
  require(d >= 0, "d must be >= 0");
  std::vector<double> b(d + 1, 1.0);
  for (int k = 1; k <= d; ++k) b[k] = b[k - 1] * (p + k - 1) / (p + q + k - 1);
  return make_lom(std::move(b), LomFlavor::discrete);
}

}  // namespace ciid
