#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <tuple>
#include <vector>

#include "ghsim/core/error.hpp"
#include "ghsim/core/random.hpp"
#include "ghsim/ingest/slice.hpp"

namespace ghsim {

/// Undirected weighted graph in symmetric CSR form.
struct WeightedGraph {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> adj;
  std::vector<double> adj_weight;
  std::vector<double> vertex_weight;

  std::size_t size() const { return vertex_weight.size(); }
  std::size_t degree(std::size_t v) const { return offsets[v + 1] - offsets[v]; }
  std::span<const std::uint32_t> neighbors(std::size_t v) const { return {adj.data() + offsets[v], degree(v)}; }
  std::span<const double> weights(std::size_t v) const { return {adj_weight.data() + offsets[v], degree(v)}; }
  double total_vertex_weight() const { return std::accumulate(vertex_weight.begin(), vertex_weight.end(), 0.0); }

  /// Parallel edges are merged, self loops dropped. Vertex weights default to 1.
  static WeightedGraph from_edges(std::size_t n, std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges,
                                  std::vector<double> vertex_weights = {}) {
    WeightedGraph g;
    g.vertex_weight = vertex_weights.empty() ? std::vector<double>(n, 1.0) : std::move(vertex_weights);
    if (g.vertex_weight.size() != n) fail(ErrorCode::InvalidArgument, "vertex weight count mismatch");
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> dir;
    dir.reserve(edges.size() * 2);
    for (auto [u, v, w] : edges) {
      if (u >= n || v >= n) fail(ErrorCode::InvalidArgument, "edge endpoint out of range");
      if (u == v) continue;
      dir.emplace_back(u, v, w);
      dir.emplace_back(v, u, w);
    }
    std::sort(dir.begin(), dir.end());
    g.offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < dir.size(); ++i) {
      const auto [u, v, w] = dir[i];
      if (i > 0 && std::get<0>(dir[i - 1]) == u && std::get<1>(dir[i - 1]) == v) {
        g.adj_weight.back() += w;
        continue;
      }
      g.adj.push_back(v);
      g.adj_weight.push_back(w);
      ++g.offsets[u + 1];
    }
    for (std::size_t v = 0; v < n; ++v) g.offsets[v + 1] += g.offsets[v];
    return g;
  }
};

/// Users occupy vertices [0, U), repos [U, U + R); edge weight = event count.
inline WeightedGraph interaction_graph(const TrainingSlice& slice) {
  const auto users = static_cast<std::uint32_t>(slice.user_count());
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  for (std::uint32_t u = 0; u < users; ++u) {
    // A user's history is sorted by (type, repo); merge across types first.
    std::vector<std::pair<RepoIndex, double>> row;
    for (const auto& h : slice.histories[u].counts) row.emplace_back(h.repo, h.count);
    std::sort(row.begin(), row.end());
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0 && row[i].first == row[i - 1].first) {
        std::get<2>(edges.back()) += row[i].second;
        continue;
      }
      edges.emplace_back(u, users + row[i].first, row[i].second);
    }
  }
  return WeightedGraph::from_edges(users + slice.repo_count(), std::move(edges));
}

inline double edge_cut(const WeightedGraph& g, std::span<const std::uint32_t> part) {
  double cut = 0;
  for (std::size_t v = 0; v < g.size(); ++v) {
    auto nb = g.neighbors(v);
    auto w = g.weights(v);
    for (std::size_t i = 0; i < nb.size(); ++i)
      if (nb[i] > v && part[nb[i]] != part[v]) cut += w[i];
  }
  return cut;
}

struct PartitionOptions {
  std::uint64_t seed = 0;
  double imbalance = 0.05;
  std::size_t coarsen_to = 0;  // 0 picks max(20 k, 64)
  int initial_trials = 8;
  int refine_passes = 10;
};

struct PartitionResult {
  std::uint32_t k = 1;
  std::vector<std::uint32_t> part;
  double cut = 0;
  std::vector<double> part_weights;

  double max_part_weight() const { return part_weights.empty() ? 0 : *std::max_element(part_weights.begin(), part_weights.end()); }
};

namespace detail {

struct Level {
  WeightedGraph graph;
  std::vector<std::uint32_t> to_coarse;  // fine vertex -> vertex of the next level
};

// Heavy-edge matching. Returns the coarse graph and the fine->coarse map.
inline Level coarsen(const WeightedGraph& g, Rng& rng, double max_vertex_weight) {
  const std::size_t n = g.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  shuffle(rng, order);
  constexpr auto kUnmatched = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> map(n, kUnmatched);
  std::uint32_t next = 0;
  for (auto v : order) {
    if (map[v] != kUnmatched) continue;
    std::uint32_t best = kUnmatched;
    double best_w = -1;
    auto nb = g.neighbors(v);
    auto w = g.weights(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const auto u = nb[i];
      if (map[u] != kUnmatched || g.vertex_weight[u] + g.vertex_weight[v] > max_vertex_weight) continue;
      if (w[i] > best_w || (w[i] == best_w && u < best)) {
        best = u;
        best_w = w[i];
      }
    }
    map[v] = next;
    if (best != kUnmatched) map[best] = next;
    ++next;
  }

  Level level;
  level.to_coarse = map;
  auto& c = level.graph;
  c.vertex_weight.assign(next, 0.0);
  std::vector<std::vector<std::uint32_t>> members(next);
  for (std::uint32_t v = 0; v < n; ++v) {
    c.vertex_weight[map[v]] += g.vertex_weight[v];
    members[map[v]].push_back(v);
  }
  std::vector<double> acc(next, 0.0);
  std::vector<std::uint32_t> touched;
  c.offsets.assign(next + 1, 0);
  for (std::uint32_t cv = 0; cv < next; ++cv) {
    touched.clear();
    for (auto v : members[cv]) {
      auto nb = g.neighbors(v);
      auto w = g.weights(v);
      for (std::size_t i = 0; i < nb.size(); ++i) {
        const auto cu = map[nb[i]];
        if (cu == cv) continue;
        if (acc[cu] == 0.0) touched.push_back(cu);
        acc[cu] += w[i];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (auto cu : touched) {
      c.adj.push_back(cu);
      c.adj_weight.push_back(acc[cu]);
      acc[cu] = 0.0;
    }
    c.offsets[cv + 1] = c.adj.size();
  }
  return level;
}

// Sum of edge weight from v into each part, as a sparse list.
inline void connectivity(const WeightedGraph& g, std::uint32_t v, std::span<const std::uint32_t> part,
                         std::vector<double>& dense, std::vector<std::uint32_t>& parts) {
  parts.clear();
  auto nb = g.neighbors(v);
  auto w = g.weights(v);
  for (std::size_t i = 0; i < nb.size(); ++i) {
    const auto p = part[nb[i]];
    if (dense[p] == 0.0) parts.push_back(p);
    dense[p] += w[i];
  }
}

struct Move {
  double gain;
  std::uint32_t vertex;
  std::uint32_t to;
};

struct MoveLess {
  bool operator()(const Move& a, const Move& b) const {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.vertex > b.vertex;
  }
};

class Refiner {
 public:
  Refiner(const WeightedGraph& g, std::uint32_t k, double cap) : g_(g), k_(k), cap_(cap), dense_(k, 0.0) {}

  std::vector<double> weights(std::span<const std::uint32_t> part) const {
    std::vector<double> w(k_, 0.0);
    for (std::size_t v = 0; v < g_.size(); ++v) w[part[v]] += g_.vertex_weight[v];
    return w;
  }

  // Best feasible move for v: (gain, target) or target == k when none exists.
  Move best_move(std::uint32_t v, std::span<const std::uint32_t> part, const std::vector<double>& pw,
                 bool require_boundary = true) {
    connectivity(g_, v, part, dense_, parts_);
    const auto from = part[v];
    const double internal = dense_[from];
    Move best{-std::numeric_limits<double>::infinity(), v, k_};
    auto consider = [&](std::uint32_t q) {
      if (q == from || pw[q] + g_.vertex_weight[v] > cap_) return;
      const double gain = dense_[q] - internal;
      if (gain > best.gain || (gain == best.gain && q < best.to)) best = {gain, v, q};
    };
    for (auto q : parts_) consider(q);
    if (!require_boundary) {
      for (std::uint32_t q = 0; q < k_; ++q)
        if (dense_[q] == 0.0) consider(q);
    }
    for (auto q : parts_) dense_[q] = 0.0;
    return best;
  }

  // k-way FM passes with rollback to the best prefix of each pass.
  void refine(std::vector<std::uint32_t>& part, int passes) {
    auto pw = weights(part);
    const std::size_t n = g_.size();
    const std::size_t patience = std::max<std::size_t>(64, n / 50);
    std::vector<char> locked(n, 0);
    for (int pass = 0; pass < passes; ++pass) {
      std::fill(locked.begin(), locked.end(), 0);
      std::priority_queue<Move, std::vector<Move>, MoveLess> heap;
      for (std::uint32_t v = 0; v < n; ++v) {
        if (!is_boundary(v, part)) continue;
        auto m = best_move(v, part, pw);
        if (m.to < k_) heap.push(m);
      }
      std::vector<std::pair<std::uint32_t, std::uint32_t>> log;  // (vertex, previous part)
      double delta = 0, best_delta = 0;
      std::size_t best_len = 0, stale = 0;
      while (!heap.empty() && stale < patience) {
        const Move top = heap.top();
        heap.pop();
        const auto v = top.vertex;
        if (locked[v]) continue;
        const Move m = best_move(v, part, pw);
        if (m.to == k_) continue;
        if (m.gain != top.gain || m.to != top.to) {
          heap.push(m);
          continue;
        }
        pw[part[v]] -= g_.vertex_weight[v];
        pw[m.to] += g_.vertex_weight[v];
        log.emplace_back(v, part[v]);
        part[v] = m.to;
        locked[v] = 1;
        delta += m.gain;
        if (delta > best_delta + 1e-12) {
          best_delta = delta;
          best_len = log.size();
          stale = 0;
        } else {
          ++stale;
        }
        for (auto u : g_.neighbors(v)) {
          if (locked[u]) continue;
          auto mu = best_move(u, part, pw);
          if (mu.to < k_) heap.push(mu);
        }
      }
      while (log.size() > best_len) {
        const auto [v, prev] = log.back();
        log.pop_back();
        pw[part[v]] -= g_.vertex_weight[v];
        pw[prev] += g_.vertex_weight[v];
        part[v] = prev;
      }
      if (best_delta <= 1e-12) break;
    }
  }

  // Moves vertices out of overweight parts, cheapest cut increase first.
  void rebalance(std::vector<std::uint32_t>& part) {
    auto pw = weights(part);
    auto over = [&](std::uint32_t p) { return pw[p] > cap_ + 1e-9; };
    bool any = false;
    for (std::uint32_t p = 0; p < k_; ++p) any = any || over(p);
    if (!any) return;
    std::priority_queue<Move, std::vector<Move>, MoveLess> heap;
    for (std::uint32_t v = 0; v < g_.size(); ++v) {
      if (!over(part[v])) continue;
      auto m = best_move(v, part, pw, false);
      if (m.to < k_) heap.push(m);
    }
    while (!heap.empty()) {
      const Move top = heap.top();
      heap.pop();
      const auto v = top.vertex;
      if (!over(part[v])) continue;
      const Move m = best_move(v, part, pw, false);
      if (m.to == k_) continue;
      if (m.gain != top.gain || m.to != top.to) {
        heap.push(m);
        continue;
      }
      pw[part[v]] -= g_.vertex_weight[v];
      pw[m.to] += g_.vertex_weight[v];
      part[v] = m.to;
      for (auto u : g_.neighbors(v)) {
        if (!over(part[u])) continue;
        auto mu = best_move(u, part, pw, false);
        if (mu.to < k_) heap.push(mu);
      }
    }
  }

 private:
  bool is_boundary(std::uint32_t v, std::span<const std::uint32_t> part) const {
    for (auto u : g_.neighbors(v))
      if (part[u] != part[v]) return true;
    return false;
  }

  const WeightedGraph& g_;
  std::uint32_t k_;
  double cap_;
  std::vector<double> dense_;
  std::vector<std::uint32_t> parts_;
};

// Greedy graph growing: parts 0..k-2 grow from a random seed by strongest
// connection until they reach the target weight; the rest forms part k-1.
inline std::vector<std::uint32_t> grow_partition(const WeightedGraph& g, std::uint32_t k, double cap, Rng& rng) {
  const std::size_t n = g.size();
  const auto unassigned = k;
  std::vector<std::uint32_t> part(n, unassigned);
  const double target = g.total_vertex_weight() / k;
  std::vector<double> conn(n, 0.0);
  std::vector<std::uint32_t> free_list(n);
  std::iota(free_list.begin(), free_list.end(), 0u);
  shuffle(rng, free_list);
  std::size_t free_pos = 0;
  auto next_free = [&]() -> std::int64_t {
    while (free_pos < n && part[free_list[free_pos]] != unassigned) ++free_pos;
    return free_pos < n ? static_cast<std::int64_t>(free_list[free_pos]) : -1;
  };

  for (std::uint32_t p = 0; p + 1 < k; ++p) {
    double weight = 0;
    std::priority_queue<std::pair<double, std::uint32_t>> heap;
    std::vector<std::uint32_t> touched;
    std::vector<std::uint32_t> skipped;
    while (weight < target) {
      std::uint32_t v;
      if (heap.empty()) {
        const auto f = next_free();
        if (f < 0) break;
        v = static_cast<std::uint32_t>(f);
      } else {
        const auto [c, u] = heap.top();
        heap.pop();
        if (part[u] != unassigned || c != conn[u]) continue;
        v = u;
      }
      if (weight + g.vertex_weight[v] > cap && weight > 0) {
        // Too heavy for this part; leave it for later parts.
        part[v] = k + 1;
        skipped.push_back(v);
        continue;
      }
      part[v] = p;
      weight += g.vertex_weight[v];
      auto nb = g.neighbors(v);
      auto w = g.weights(v);
      for (std::size_t i = 0; i < nb.size(); ++i) {
        const auto u = nb[i];
        if (part[u] != unassigned) continue;
        if (conn[u] == 0.0) touched.push_back(u);
        conn[u] += w[i];
        heap.emplace(conn[u], u);
      }
    }
    for (auto u : touched) conn[u] = 0.0;
    for (auto u : skipped) part[u] = unassigned;
  }
  for (auto& p : part)
    if (p == unassigned) p = k - 1;
  return part;
}

}  // namespace detail

/// Multilevel k-way partitioning: heavy-edge coarsening, greedy growing on the
/// coarsest graph (best of several seeded trials), FM refinement on the way up.
/// Every part ends with weight <= ceil((1 + imbalance) * W / k) when feasible.
inline PartitionResult partition_graph(const WeightedGraph& graph, std::uint32_t k, const PartitionOptions& opts = {}) {
  const std::size_t n = graph.size();
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (n == 0) fail(ErrorCode::InfeasibleBalance, "cannot partition an empty graph");
  if (k > n) fail(ErrorCode::InfeasibleBalance, "k = " + std::to_string(k) + " exceeds vertex count " + std::to_string(n));

  PartitionResult result;
  result.k = k;
  const double total = graph.total_vertex_weight();
  const double cap = std::ceil((1.0 + opts.imbalance) * total / k);
  if (k == 1) {
    result.part.assign(n, 0);
    result.part_weights = {total};
    return result;
  }

  Rng rng(derive_seed(opts.seed, "partition", 0));
  const std::size_t coarsen_to = opts.coarsen_to ? opts.coarsen_to : std::max<std::size_t>(20 * k, 64);
  std::vector<detail::Level> levels;
  const WeightedGraph* current = &graph;
  while (current->size() > coarsen_to) {
    auto level = detail::coarsen(*current, rng, std::max(1.0, cap / 4));
    if (level.graph.size() > current->size() * 0.95) break;  // matching stalled
    levels.push_back(std::move(level));
    current = &levels.back().graph;
  }

  std::vector<std::uint32_t> best;
  double best_cut = 0, best_excess = 0;
  for (int t = 0; t < std::max(1, opts.initial_trials); ++t) {
    auto part = detail::grow_partition(*current, k, cap, rng);
    detail::Refiner refiner(*current, k, cap);
    refiner.rebalance(part);
    refiner.refine(part, opts.refine_passes);
    const auto pw = refiner.weights(part);
    double excess = 0;
    for (double w : pw) excess += std::max(0.0, w - cap);
    const double cut = edge_cut(*current, part);
    if (best.empty() || excess < best_excess || (excess == best_excess && cut < best_cut)) {
      best = std::move(part);
      best_cut = cut;
      best_excess = excess;
    }
  }

  for (std::size_t i = levels.size(); i-- > 0;) {
    const WeightedGraph& fine = i == 0 ? graph : levels[i - 1].graph;
    std::vector<std::uint32_t> projected(fine.size());
    for (std::size_t v = 0; v < fine.size(); ++v) projected[v] = best[levels[i].to_coarse[v]];
    detail::Refiner refiner(fine, k, cap);
    refiner.refine(projected, opts.refine_passes);
    refiner.rebalance(projected);
    best = std::move(projected);
  }

  result.part = std::move(best);
  result.cut = edge_cut(graph, result.part);
  result.part_weights.assign(k, 0.0);
  for (std::size_t v = 0; v < n; ++v) result.part_weights[result.part[v]] += graph.vertex_weight[v];
  return result;
}

}  // namespace ghsim
