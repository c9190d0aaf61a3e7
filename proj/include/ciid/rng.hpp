#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ciid/errors.hpp"

namespace ciid {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Seeded random stream. Uniforms come from the top 53 bits of mt19937_64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), eng_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return eng_; }

  // Uniform on the open interval (0,1).
  double uniform() {
    for (;;) {
      double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }
  double exponential() { return -std::log(uniform()); }
  double normal() { return normal_(eng_); }
  double gamma(double shape) {
    return std::gamma_distribution<double>(shape, 1.0)(eng_);
  }
  double beta(double p, double q) {
    double x = gamma(p), y = gamma(q);
    if (x + y == 0.0) return p >= q ? 1.0 : 0.0;
    return x / (x + y);
  }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
  }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// n x d samples, row-major; rows are iid replications.
struct SampleMatrix {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> data;
  std::uint64_t seed = 0;
  std::string meta;

  SampleMatrix() = default;
  SampleMatrix(std::size_t n_, std::size_t d_, std::uint64_t seed_ = 0, std::string meta_ = {})
      : n(n_), d(d_), data(n_ * d_, 0.0), seed(seed_), meta(std::move(meta_)) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * d + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * d + j]; }
  std::span<double> row(std::size_t i) { return {data.data() + i * d, d}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * d, d}; }
  std::vector<double> column(std::size_t j) const {
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = (*this)(i, j);
    return c;
  }
};

using RowFn = std::function<void(Rng&, std::span<double>)>;

// Type-erased row generator of a d-variate law. draw must be safe to call
// concurrently with distinct Rng objects.
struct RowSampler {
  std::size_t d = 0;
  RowFn draw;
  std::string meta;
};

inline SampleMatrix draw_matrix(const RowSampler& s, std::size_t n, Rng& rng) {
  SampleMatrix m(n, s.d, rng.seed(), s.meta);
  for (std::size_t i = 0; i < n; ++i) s.draw(rng, m.row(i));
  return m;
}

// Rows are produced in blocks of kStreamBlock; block b uses the stream
// seeded with seed + b, so the output does not depend on the thread count.
inline constexpr std::size_t kStreamBlock = 4096;

inline SampleMatrix draw_matrix_parallel(const RowSampler& s, std::size_t n, std::uint64_t seed,
                                         unsigned threads = 1) {
  SampleMatrix m(n, s.d, seed, s.meta);
  std::size_t blocks = (n + kStreamBlock - 1) / kStreamBlock;
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t b = first; b < blocks; b += stride) {
      Rng rng(seed + b);
      std::size_t hi = std::min(n, (b + 1) * kStreamBlock);
      for (std::size_t i = b * kStreamBlock; i < hi; ++i) s.draw(rng, m.row(i));
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(blocks, 1))));
  if (threads == 1) {
    work(0, 1);
    return m;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        work(t, threads);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return m;
}

}  // namespace ciid
