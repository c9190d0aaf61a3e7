#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ciid/errors.hpp"
#include "ciid/mixing_law.hpp"
#include "ciid/numerics.hpp"
#include "ciid/rng.hpp"

namespace ciid {

// (b_0, ..., b_d) with b_0 = 1 and non-negative entries.
struct MonotoneSequence {
  std::vector<double> values;

  MonotoneSequence() : values{1.0} {}
  explicit MonotoneSequence(std::vector<double> v) : values(std::move(v)) {
    require(!values.empty(), "sequence must contain b_0");
    require(values[0] == 1.0, "sequence must start with b_0 = 1");
    for (double b : values) require(std::isfinite(b) && b >= 0.0, "sequence entries must be finite and >= 0");
  }
  int d() const { return static_cast<int>(values.size()) - 1; }
  double operator[](int k) const { return values[static_cast<std::size_t>(k)]; }
};

// Probabilities p_k of one fixed binary pattern with k ones.
struct BinaryExchangeableLaw {
  std::vector<double> p;

  BinaryExchangeableLaw() = default;
  explicit BinaryExchangeableLaw(std::vector<double> v) : p(std::move(v)) {
    require(!p.empty(), "pattern probabilities must be non-empty");
    int d = this->d();
    double s = 0.0;
    for (int k = 0; k <= d; ++k) {
      require(std::isfinite(p[k]) && p[k] >= 0.0, "pattern probabilities must be >= 0");
      s += num::binom(d, k) * p[k];
    }
    require(std::abs(s - 1.0) <= 1e-12, "pattern probabilities must sum to 1 over all patterns");
  }
  int d() const { return static_cast<int>(p.size()) - 1; }
};

struct ExtendibilityVerdict {
  bool extendible = false;
  std::vector<double> hankel_values;
  double min_hankel = kInf;
  std::optional<law::FiniteDiscrete> witness;
};

inline constexpr double kMonotoneTol = 1e-12;
inline constexpr double kHankelTol = 1e-9;

namespace detail {
inline double backward_difference(const std::vector<double>& b, int j, int k) {
  double s = 0.0;
  for (int i = 0; i <= j; ++i) s += (i % 2 ? -1.0 : 1.0) * num::binom(j, i) * b[k + i];
  return s;
}
}  // namespace detail

inline double backward_difference(const MonotoneSequence& seq, int j, int k) {
  if (j < 0 || k < 0 || j + k > seq.d()) throw IndexError("backward difference index out of range");
  return detail::backward_difference(seq.values, j, k);
}

inline bool is_d_monotone(const MonotoneSequence& seq) {
  int d = seq.d();
  for (int k = 0; k <= d; ++k)
    if (detail::backward_difference(seq.values, d - k, k) < -kMonotoneTol) return false;
  return true;
}

inline bool is_log_d_monotone(const MonotoneSequence& seq) {
  int d = seq.d();
  std::vector<double> lb(seq.values.size());
  for (int k = 0; k <= d; ++k) {
    if (!(seq[k] > 0.0)) throw PreconditionError("log-d-monotonicity needs strictly positive entries");
    lb[k] = std::log(seq[k]);
  }
  for (int k = 0; k < d; ++k)
    if (detail::backward_difference(lb, d - k, k) < -kMonotoneTol) return false;
  return true;
}

namespace detail {

// Hankel matrix [v(i+j+shift)]_{i,j<size}.
template <class V>
double hankel_det(V&& v, int size, int shift, double& scale) {
  std::vector<double> a(static_cast<std::size_t>(size * size));
  scale = 0.0;
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      a[i * size + j] = v(i + j + shift);
      scale = std::max(scale, std::abs(a[i * size + j]));
    }
  return num::lu_determinant(std::move(a), static_cast<std::size_t>(size));
}

inline std::vector<double> roots_upto_quadratic(const std::vector<double>& c) {
  // monic polynomial x^n + c[n-1] x^(n-1) + ... + c[0], n <= 2
  if (c.size() == 1) return {-c[0]};
  double b = c[1], q = c[0];
  double disc = b * b - 4.0 * q;
  if (disc < 0.0) {
    if (disc > -1e-12) disc = 0.0; else return {};
  }
  double s = std::sqrt(disc);
  return {(-b - s) / 2.0, (-b + s) / 2.0};
}

// Zeros of the monic orthogonal polynomial of the largest non-singular degree
// <= n with respect to the moment functional m(0..2n-1).
template <class V>
std::vector<double> orthogonal_zeros(V&& m, int n) {
  for (int deg = n; deg >= 1; --deg) {
    double scale;
    double det = hankel_det(m, deg, 0, scale);
    if (std::abs(det) <= 1e-12 * std::pow(std::max(scale, 1e-300), deg)) continue;
    std::vector<double> a(deg * deg), rhs(deg);
    for (int i = 0; i < deg; ++i) {
      for (int j = 0; j < deg; ++j) a[i * deg + j] = m(i + j);
      rhs[i] = -m(i + deg);
    }
    auto coef = num::solve_linear(a, rhs, deg);
    return roots_upto_quadratic(coef);
  }
  return {};
}

inline std::optional<law::FiniteDiscrete> moment_witness(const MonotoneSequence& seq) {
  int d = seq.d();
  if (d < 1 || d > 4) return std::nullopt;
  const auto& b = seq.values;
  std::vector<double> atoms;
  if (d % 2 == 1) {
    int n = (d + 1) / 2;
    atoms = orthogonal_zeros([&](int k) { return b[k]; }, n);
  } else {
    int n = d / 2;
    atoms = orthogonal_zeros([&](int k) { return b[k] - b[k + 1]; }, n);
    atoms.push_back(1.0);
  }
  if (atoms.empty()) atoms.push_back(b[1]);
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }),
              atoms.end());
  for (double& x : atoms) {
    if (x < -1e-9 || x > 1.0 + 1e-9) return std::nullopt;
    x = std::clamp(x, 0.0, 1.0);
  }
  std::size_t m = atoms.size();
  std::vector<double> v(m * m), rhs(m);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < m; ++i) v[k * m + i] = std::pow(atoms[i], static_cast<double>(k));
    rhs[k] = b[k];
  }
  std::vector<double> w;
  try {
    w = num::solve_linear(v, rhs, m);
  } catch (const NumericalError&) {
    return std::nullopt;
  }
  for (double& x : w) {
    if (x < -1e-9) return std::nullopt;
    x = std::max(x, 0.0);
  }
  for (int k = 0; k <= d; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += w[i] * std::pow(atoms[i], static_cast<double>(k));
    if (std::abs(s - b[k]) > 1e-8) return std::nullopt;
  }
  double tot = 0.0;
  for (double x : w) tot += x;
  for (double& x : w) x /= tot;
  return law::FiniteDiscrete{atoms, w};
}

}  // namespace detail

// Truncated Hausdorff moment problem: Hankel determinants of orders 1..d.
inline ExtendibilityVerdict hausdorff_extendible(const MonotoneSequence& seq) {
  if (!is_d_monotone(seq)) throw PreconditionError("sequence is not d-monotone");
  const auto& b = seq.values;
  int d = seq.d();
  auto bv = [&](int k) { return b[k]; };
  auto nb = [&](int k) { return b[k] - b[k + 1]; };
  ExtendibilityVerdict v;
  v.extendible = true;
  auto push = [&](double det, double scale, int size) {
    v.hankel_values.push_back(det);
    v.min_hankel = std::min(v.min_hankel, det);
    if (det < -kHankelTol * std::pow(std::max(scale, 1e-300), size)) v.extendible = false;
  };
  for (int n = 1; n <= d; ++n) {
    double s1, s2;
    if (n % 2 == 0) {
      int l = n / 2;
      double hat = detail::hankel_det(bv, l + 1, 0, s1);
      push(hat, s1, l + 1);
      double check = detail::hankel_det(nb, l, 1, s2);
      push(check, s2, l);
    } else {
      int l = (n - 1) / 2;
      double hat = detail::hankel_det(bv, l + 1, 1, s1);
      push(hat, s1, l + 1);
      double check = detail::hankel_det(nb, l + 1, 0, s2);
      push(check, s2, l + 1);
    }
  }
  if (v.extendible) v.witness = detail::moment_witness(seq);
  return v;
}

inline MonotoneSequence b_from_p(const BinaryExchangeableLaw& law) {
  int d = law.d();
  std::vector<double> b(d + 1);
  for (int k = 0; k <= d; ++k) {
    double s = 0.0;
    for (int i = 0; i <= d - k; ++i) s += num::binom(d - k, i) * law.p[d - i];
    b[k] = s;
  }
  b[0] = 1.0;
  for (double& x : b) x = std::max(x, 0.0);
  return MonotoneSequence(std::move(b));
}

inline BinaryExchangeableLaw p_from_b(const MonotoneSequence& seq) {
  if (!is_d_monotone(seq)) throw PreconditionError("sequence is not d-monotone");
  int d = seq.d();
  std::vector<double> p(d + 1);
  for (int k = 0; k <= d; ++k) p[k] = std::max(0.0, detail::backward_difference(seq.values, d - k, k));
  return BinaryExchangeableLaw(std::move(p));
}

inline MonotoneSequence moment_sequence(const MixingLawSpec& M, int d) {
  validate(M);
  if (d < 0) throw ValidationError("d must be >= 0");
  bool ok = std::holds_alternative<law::PointMass>(M) || std::holds_alternative<law::FiniteDiscrete>(M) ||
            std::holds_alternative<law::Beta>(M);
  if (!ok || upper_support(M) > 1.0) throw UnsupportedError("moment sequence needs a law on [0,1] with closed-form moments");
  std::vector<double> b(d + 1);
  b[0] = 1.0;
  for (int k = 1; k <= d; ++k) b[k] = moment(M, k);
  return MonotoneSequence(std::move(b));
}

// Probability of a fixed binary pattern with k ones.
inline double pattern_probability(const BinaryExchangeableLaw& law, int ones) { return law.p.at(ones); }

// Closed form of the Polya urn: rising factorials of r and b over r+b.
inline double polya_pattern_probability(int r, int b, int d, int ones) {
  double lp = 0.0;
  for (int k = 0; k < ones; ++k) lp += std::log(r + k);
  for (int k = 0; k < d - ones; ++k) lp += std::log(b + k);
  for (int k = 0; k < d; ++k) lp -= std::log(r + b + k);
  return std::exp(lp);
}

inline RowSampler binary_mixture_sampler(const MixingLawSpec& M, int d) {
  validate(M);
  if (upper_support(M) > 1.0) throw ValidationError("binary mixing law must live on [0,1]");
  return {static_cast<std::size_t>(d),
          [M](Rng& rng, std::span<double> x) {
            double m = sample(M, rng);
            for (double& v : x) v = rng.uniform() <= m ? 1.0 : 0.0;
          },
          "binary_mixture " + describe(M)};
}

inline SampleMatrix sample_binary_mixture(const MixingLawSpec& M, int d, std::size_t n, Rng& rng) {
  return draw_matrix(binary_mixture_sampler(M, d), n, rng);
}

inline RowSampler polya_urn_sampler(int r, int b, int d) {
  require(r >= 1 && b >= 1, "urn needs r, b >= 1");
  return {static_cast<std::size_t>(d),
          [r, b](Rng& rng, std::span<double> x) {
            double red = r, black = b;
            for (double& v : x) {
              bool is_red = rng.uniform() * (red + black) < red;
              v = is_red ? 1.0 : 0.0;
              (is_red ? red : black) += 1.0;
            }
          },
          "polya_urn"};
}

inline SampleMatrix sample_polya_urn(int r, int b, int d, std::size_t n, Rng& rng) {
  return draw_matrix(polya_urn_sampler(r, b, d), n, rng);
}

}  // namespace ciid
