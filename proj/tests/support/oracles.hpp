#pragma once

// Independent reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ghsim/core/random.hpp"
#include "ghsim/engine/partition.hpp"
#include "ghsim/models/embedding.hpp"

namespace oracles {

/// Exact discrete power law P(x) = x^-gamma / Z on x >= xmin, by table
/// inversion up to `table_max` and a continuous Pareto tail beyond it.
class DiscretePowerLaw {
 public:
  DiscretePowerLaw(double gamma, std::uint64_t xmin, std::uint64_t table_max = 1'000'000) : gamma_(gamma), xmin_(xmin) {
    double acc = 0;
    for (std::uint64_t x = xmin; x <= table_max; ++x) {
      acc += std::pow(static_cast<double>(x), -gamma);
      cum_.push_back(acc);
    }
    edge_ = static_cast<double>(table_max) + 0.5;
    tail_ = std::pow(edge_, 1 - gamma) / (gamma - 1);
    total_ = acc + tail_;
  }

  template <class G>
  std::uint64_t operator()(G& g) const {
    const double u = ghsim::uniform01(g) * total_;
    if (u < cum_.back()) {
      auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
      return xmin_ + static_cast<std::uint64_t>(it - cum_.begin());
    }
    // Pareto above the table edge, rounded to the nearest integer.
    const double v = 1.0 - ghsim::uniform01(g);
    return static_cast<std::uint64_t>(std::llround(edge_ * std::pow(v, -1.0 / (gamma_ - 1))));
  }

 private:
  double gamma_;
  std::uint64_t xmin_;
  std::vector<double> cum_;
  double edge_ = 0, tail_ = 0, total_ = 0;
};

/// sum_{k=0}^{terms-1} (q + k)^-s plus the integral tail from q + terms - 1/2.
inline double zeta_by_sum(double s, double q, std::uint64_t terms = 2'000'000) {
  double sum = 0;
  for (std::uint64_t k = terms; k-- > 0;) sum += std::pow(q + static_cast<double>(k), -s);
  const double edge = q + static_cast<double>(terms) - 0.5;
  return sum + std::pow(edge, 1 - s) / (s - 1);
}

// Two planted communities of n/2 vertices each.
inline ghsim::WeightedGraph planted(std::uint64_t seed, std::uint32_t n, double p_in, double p_out) {
  ghsim::Rng g(seed);
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  for (std::uint32_t u = 0; u < n; ++u)
    for (std::uint32_t v = u + 1; v < n; ++v) {
      const bool same = (u < n / 2) == (v < n / 2);
      if (ghsim::uniform01(g) < (same ? p_in : p_out)) edges.emplace_back(u, v, 1.0);
    }
  return ghsim::WeightedGraph::from_edges(n, edges);
}

// Mean cut of uniformly random balanced bisections.
inline double random_bisection_cut(const ghsim::WeightedGraph& g, std::uint64_t seed, int trials) {
  ghsim::Rng rng(seed);
  double total = 0;
  std::vector<std::uint32_t> part(g.size());
  for (int t = 0; t < trials; ++t) {
    for (std::size_t v = 0; v < g.size(); ++v) part[v] = v < g.size() / 2 ? 0 : 1;
    ghsim::shuffle(rng, part);
    total += ghsim::edge_cut(g, part);
  }
  return total / trials;
}

// Average precision straight from the definition: for each k, the precision of
// the first k predictions, summed where the k-th prediction is a hit.
inline double brute_ap(const std::vector<std::uint32_t>& ranked, const std::set<std::uint32_t>& obs, std::size_t k_max) {
  double sum = 0;
  int hits = 0;
  for (std::size_t k = 1; k <= std::min(k_max, ranked.size()); ++k) {
    std::set<std::uint32_t> prefix(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
    std::size_t inter = 0;
    for (auto x : prefix) inter += obs.count(x);
    if (obs.count(ranked[k - 1])) {
      sum += static_cast<double>(inter) / static_cast<double>(k);
      ++hits;
    }
  }
  return hits ? sum / hits : 0.0;
}

inline double brute_map(const ghsim::Embedding& e, const ghsim::BipartiteGraph& held, std::size_t k_max, const ghsim::BipartiteGraph* train) {
  const auto nu = e.user_ids.size(), nr = e.repo_ids.size();
  double total = 0;
  for (std::size_t i = 0; i < nu + nr; ++i) {
    const bool user = i < nu;
    std::set<std::uint32_t> obs;
    std::vector<std::pair<double, std::uint32_t>> cands;
    for (std::uint32_t c = 0; c < (user ? nr : nu); ++c) {
      const auto& uid = e.user_ids[user ? i : c];
      const auto& rid = e.repo_ids[user ? c : i - nu];
      if (train && train->weight(uid, rid) > 0) continue;
      if (held.weight(uid, rid) > 0) obs.insert(c);
      const double s = user ? e.score(static_cast<Eigen::Index>(i), c) : e.score(c, static_cast<Eigen::Index>(i - nu));
      cands.emplace_back(-s, c);
    }
    if (obs.empty()) continue;
    std::sort(cands.begin(), cands.end());
    std::vector<std::uint32_t> ranked;
    for (auto& [s, c] : cands) ranked.push_back(c);
    total += brute_ap(ranked, obs, k_max);
  }
  return total / static_cast<double>(nu + nr);
}

// Straight from the definition: set intersection at every depth.
inline double rbo_oracle(const std::vector<std::string>& s, const std::vector<std::string>& t, double p, std::size_t depth) {
  double sum = 0;
  for (std::size_t d = 1; d <= depth; ++d) {
    std::set<std::string> a(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(std::min(d, s.size())));
    std::size_t common = 0;
    for (std::size_t i = 0; i < std::min(d, t.size()); ++i) common += a.count(t[i]);
    sum += std::pow(p, static_cast<double>(d - 1)) * static_cast<double>(common) / static_cast<double>(d);
  }
  return (1 - p) * sum;
}

}  // namespace oracles
