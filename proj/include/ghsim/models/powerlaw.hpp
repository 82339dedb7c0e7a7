#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ghsim/core/error.hpp"
#include "ghsim/core/random.hpp"
#include "ghsim/core/state.hpp"

namespace ghsim {

/// Hurwitz zeta  sum_{k>=0} (k + q)^-s  for s > 1, q > 0 (Euler-Maclaurin).
inline double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0) || !(q > 0.0)) fail(ErrorCode::InvalidArgument, "hurwitz_zeta needs s > 1 and q > 0");
  constexpr int kDirect = 24;
  // B_{2j} / (2j)!
  static constexpr std::array<double, 8> kB = {1.0 / 12,        -1.0 / 720,          1.0 / 30240,
                                               -1.0 / 1209600,  1.0 / 47900160,      -691.0 / 1307674368000.0,
                                               1.0 / 74724249600.0, -3617.0 / 10670622842880000.0};
  double sum = 0;
  for (int k = 0; k < kDirect; ++k) sum += std::pow(q + k, -s);
  const double a = q + kDirect;
  sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
  double rising = s;                 // s (s+1) ... (s + 2j - 2)
  double power = std::pow(a, -s - 1);  // a^(-s - 2j + 1)
  for (std::size_t j = 0; j < kB.size(); ++j) {
    const double term = kB[j] * rising * power;
    sum += term;
    if (std::abs(term) < 1e-17 * sum) break;
    rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
    power /= a * a;
  }
  return sum;
}

struct PowerLawFit {
  double gamma = 0;
  std::uint64_t xmin = 1;
  std::size_t n_tail = 0;
  double ks = 0;
};

struct PowerLawOptions {
  std::size_t min_tail = 50;       // fewest points a candidate xmin must leave
  std::size_t max_candidates = 200;
  double gamma_lo = 1.0 + 1e-6;
  double gamma_hi = 8.0;
};

namespace detail {

// Golden-section minimum of a unimodal function on [lo, hi].
template <class F>
double golden_min(F&& f, double lo, double hi, double tol = 1e-9) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2;
}

}  // namespace detail

/// Discrete power-law MLE for a fixed xmin: maximizes
///   -n ln zeta(gamma, xmin) - gamma sum ln x_i  over x_i >= xmin.
inline PowerLawFit fit_power_law_fixed(std::span<const std::uint64_t> data, std::uint64_t xmin,
                                       const PowerLawOptions& opts = {}) {
  if (xmin < 1) fail(ErrorCode::InvalidArgument, "xmin must be >= 1");
  std::vector<std::uint64_t> tail;
  for (auto x : data)
    if (x >= xmin) tail.push_back(x);
  if (tail.size() < 2) fail(ErrorCode::InsufficientData, "power-law fit needs at least two tail points");
  std::sort(tail.begin(), tail.end());
  double sum_log = 0;
  for (auto x : tail) sum_log += std::log(static_cast<double>(x));
  const double n = static_cast<double>(tail.size());
  const double q = static_cast<double>(xmin);
  auto nll = [&](double g) { return n * std::log(hurwitz_zeta(g, q)) + g * sum_log; };
  PowerLawFit fit;
  fit.gamma = detail::golden_min(nll, opts.gamma_lo, opts.gamma_hi);
  fit.xmin = xmin;
  fit.n_tail = tail.size();

  // KS distance between the empirical and fitted tail CDFs.
  const double z0 = hurwitz_zeta(fit.gamma, q);
  double ks = 0;
  for (std::size_t i = 0; i < tail.size();) {
    std::size_t j = i;
    while (j < tail.size() && tail[j] == tail[i]) ++j;
    const double emp_hi = static_cast<double>(j) / n;
    const double emp_lo = static_cast<double>(i) / n;
    const double model = 1.0 - hurwitz_zeta(fit.gamma, static_cast<double>(tail[i]) + 1.0) / z0;
    const double model_lo = 1.0 - hurwitz_zeta(fit.gamma, static_cast<double>(tail[i])) / z0;
    ks = std::max({ks, std::abs(emp_hi - model), std::abs(emp_lo - model_lo)});
    i = j;
  }
  fit.ks = ks;
  return fit;
}

/// MLE over candidate xmin values, keeping the one with the smallest KS distance.
inline PowerLawFit fit_power_law(std::span<const std::uint64_t> data, const PowerLawOptions& opts = {}) {
  std::vector<std::uint64_t> values;
  for (auto x : data)
    if (x >= 1) values.push_back(x);
  if (values.size() < std::max<std::size_t>(opts.min_tail, 2))
    fail(ErrorCode::InsufficientData, "power-law fit needs at least " + std::to_string(opts.min_tail) + " points");
  std::sort(values.begin(), values.end());
  std::vector<std::uint64_t> candidates;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0 && values[i] == values[i - 1]) continue;
    if (values.size() - i < opts.min_tail) break;
    candidates.push_back(values[i]);
    if (candidates.size() >= opts.max_candidates) break;
  }
  PowerLawFit best;
  bool have = false;
  for (auto xmin : candidates) {
    auto f = fit_power_law_fixed(values, xmin, opts);
    if (!have || f.ks < best.ks) {
      best = f;
      have = true;
    }
  }
  return best;
}

enum class RankPurpose : std::uint8_t { Watch, Fork, PullRequest };

/// Repository selection by popularity rank: P(rank k) proportional to
/// k^(-1 / (gamma - 1)), the rank form of a degree power law with exponent gamma.
struct PowerLawRank {
  double gamma = 1.81;
  std::uint64_t xmin = 3;
  RankPurpose purpose = RankPurpose::Watch;
  bool fitted = false;  // false when the parameters are defaults

  double rank_exponent() const { return 1.0 / (gamma - 1.0); }

  /// Index into `order` (most popular first).
  template <class G>
  std::size_t sample_rank(G& g, std::size_t n) const {
    if (n == 0) fail(ErrorCode::EmptyRank, "no repositories to rank");
    return static_cast<std::size_t>(ZipfSampler(n, rank_exponent()).sample(g) - 1);
  }

  template <class G>
  RepoIndex sample(G& g, std::span<const RepoIndex> order) const {
    return order[sample_rank(g, order.size())];
  }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(gamma, xmin, purpose, fitted);
  }
};

}  // namespace ghsim
