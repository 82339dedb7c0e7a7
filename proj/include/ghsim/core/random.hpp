#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "ghsim/core/error.hpp"
#include "ghsim/core/hash.hpp"

namespace ghsim {

// Small-state generator (8 bytes) so every agent can own its stream. All
// distribution transforms below are written out so that sampled values do not
// depend on the standard library's implementation-defined distributions.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

using Rng = SplitMix64;

inline std::uint64_t mix64(std::uint64_t x) {
  SplitMix64 g(x);
  return g();
}

/// Independent stream seed for (run seed, entity key, stream tag).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view key, std::uint64_t stream = 0) {
  return mix64(mix64(seed ^ 0x5851f42d4c957f2dULL) ^ fnv1a64(key) ^ mix64(stream + 0x2545f4914f6cdd1dULL));
}

/// Uniform in [0, 1) with 53 random bits.
template <class G>
double uniform01(G& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n).
template <class G>
std::uint64_t uniform_index(G& g, std::uint64_t n) {
  if (n == 0) return 0;
  // Lemire-style multiply; bias below 2^-64 * n is irrelevant here.
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(g()) * n) >> 64);
}

template <class G>
double exponential(G& g, double rate) {
  return -std::log1p(-uniform01(g)) / rate;
}

template <class G>
double standard_normal(G& g) {
  const double u1 = 1.0 - uniform01(g);
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Geometric on {1, 2, ...} with success probability p: P(L = 1) = p.
template <class G>
std::uint32_t geometric(G& g, double p) {
  if (p >= 1.0) return 1;
  const double u = 1.0 - uniform01(g);  // (0, 1]
  return 1 + static_cast<std::uint32_t>(std::floor(std::log(u) / std::log1p(-p)));
}

/// Poisson sample (inversion for small means, normal approximation above 500).
template <class G>
std::uint64_t poisson(G& g, double mean) {
  if (mean <= 0) return 0;
  if (mean > 500) {
    const double x = std::round(mean + std::sqrt(mean) * standard_normal(g));
    return x < 0 ? 0 : static_cast<std::uint64_t>(x);
  }
  double p = std::exp(-mean), cdf = p, u = uniform01(g);
  std::uint64_t k = 0;
  while (u > cdf && k < 100000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

template <class G, class T>
void shuffle(G& g, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(g, i)]);
}

/// Inverse-CDF sampler over a fixed weight vector.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> weights) { assign(weights); }

  void assign(std::span<const double> weights) {
    cumulative_.resize(weights.size());
    double acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] >= 0) || !std::isfinite(weights[i]))
        fail(ErrorCode::InvalidArgument, "sampler weights must be finite and non-negative");
      acc += weights[i];
      cumulative_[i] = acc;
    }
  }

  bool empty() const { return cumulative_.empty() || total() <= 0; }
  std::size_t size() const { return cumulative_.size(); }
  double total() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  double probability(std::size_t i) const {
    const double lo = i == 0 ? 0.0 : cumulative_[i - 1];
    return (cumulative_[i] - lo) / total();
  }

  template <class G>
  std::size_t sample(G& g) const {
    if (empty()) fail(ErrorCode::EmptyRank, "sampling from an empty distribution");
    const double target = uniform01(g) * total();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
    // upper_bound never lands on a zero-weight entry; the clamp covers rounding at the top.
    return i < cumulative_.size() ? i : cumulative_.size() - 1;
  }

  const std::vector<double>& cumulative() const { return cumulative_; }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(cumulative_);
  }

 private:
  std::vector<double> cumulative_;
};

/// Samples k in {1..n} with P(k) proportional to k^(-exponent), exponent > 0,
/// in O(1) expected time via rejection-inversion (Hoermann & Derflinger).
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t n, double exponent) : n_(n), exponent_(exponent) {
    if (n == 0) fail(ErrorCode::EmptyRank, "zipf over zero items");
    if (!(exponent > 0)) fail(ErrorCode::InvalidArgument, "zipf exponent must be positive");
    h_integral_x1_ = h_integral(1.5) - 1.0;
    h_integral_n_ = h_integral(static_cast<double>(n_) + 0.5);
    s_ = 2.0 - h_integral_inverse(h_integral(2.5) - h(2.0));
  }

  template <class G>
  std::uint64_t sample(G& g) const {
    for (;;) {
      const double u = h_integral_n_ + uniform01(g) * (h_integral_x1_ - h_integral_n_);
      const double x = h_integral_inverse(u);
      double kd = std::floor(x + 0.5);
      if (kd < 1) kd = 1;
      if (kd > static_cast<double>(n_)) kd = static_cast<double>(n_);
      if (kd - x <= s_ || u >= h_integral(kd + 0.5) - h(kd)) return static_cast<std::uint64_t>(kd);
    }
  }

 private:
  double h(double x) const { return std::exp(-exponent_ * std::log(x)); }
  double h_integral(double x) const {
    const double lx = std::log(x);
    return helper2((1.0 - exponent_) * lx) * lx;
  }
  double h_integral_inverse(double x) const {
    double t = x * (1.0 - exponent_);
    if (t < -1.0) t = -1.0;
    return std::exp(helper1(t) * x);
  }
  static double helper1(double x) {
    return std::abs(x) > 1e-8 ? std::log1p(x) / x : 1.0 - x * (0.5 - x * (1.0 / 3.0 - 0.25 * x));
  }
  static double helper2(double x) {
    return std::abs(x) > 1e-8 ? std::expm1(x) / x : 1.0 + x * 0.5 * (1.0 + x / 3.0 * (1.0 + 0.25 * x));
  }

  std::uint64_t n_;
  double exponent_;
  double h_integral_x1_ = 0, h_integral_n_ = 0, s_ = 0;
};

}  // namespace ghsim
