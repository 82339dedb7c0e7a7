#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ghsim/core/event.hpp"
#include "ghsim/ingest/slice.hpp"

namespace ghsim {

/// Weighted user x repository adjacency for one event type, stored as CSR by
/// user. Users and repos without an edge are absent, not zero rows.
class BipartiteGraph {
 public:
  struct Triplet {
    std::string user;
    std::string repo;
    double weight = 1.0;
  };

  BipartiteGraph() = default;

  /// Duplicate (user, repo) triplets are summed.
  static BipartiteGraph from_triplets(EventType type, std::vector<Triplet> triplets) {
    BipartiteGraph g;
    g.type_ = type;
    for (const auto& t : triplets) {
      g.users_.push_back(t.user);
      g.repos_.push_back(t.repo);
    }
    auto uniq = [](std::vector<std::string>& v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(g.users_);
    uniq(g.repos_);
    g.index();

    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> coo;
    coo.reserve(triplets.size());
    for (const auto& t : triplets) {
      if (!(t.weight > 0)) fail(ErrorCode::InvalidArgument, "bipartite weights must be positive");
      coo.emplace_back(g.user_pos_.at(t.user), g.repo_pos_.at(t.repo), t.weight);
    }
    std::sort(coo.begin(), coo.end());
    g.row_ptr_.assign(g.users_.size() + 1, 0);
    for (std::size_t i = 0; i < coo.size(); ++i) {
      const auto [u, r, w] = coo[i];
      if (i > 0 && std::get<0>(coo[i - 1]) == u && std::get<1>(coo[i - 1]) == r) {
        g.weights_.back() += w;
        continue;
      }
      g.cols_.push_back(r);
      g.weights_.push_back(w);
      ++g.row_ptr_[u + 1];
    }
    for (std::size_t u = 0; u < g.users_.size(); ++u) g.row_ptr_[u + 1] += g.row_ptr_[u];
    return g;
  }

  EventType type() const { return type_; }
  std::size_t user_count() const { return users_.size(); }
  std::size_t repo_count() const { return repos_.size(); }
  std::size_t nnz() const { return cols_.size(); }
  const std::vector<std::string>& users() const { return users_; }
  const std::vector<std::string>& repos() const { return repos_; }

  std::optional<std::size_t> user_position(const std::string& id) const {
    auto it = user_pos_.find(id);
    return it == user_pos_.end() ? std::nullopt : std::optional<std::size_t>(it->second);
  }
  std::optional<std::size_t> repo_position(const std::string& id) const {
    auto it = repo_pos_.find(id);
    return it == repo_pos_.end() ? std::nullopt : std::optional<std::size_t>(it->second);
  }

  /// Row u as parallel spans of repo positions and weights (repo-sorted).
  std::span<const std::uint32_t> row_repos(std::size_t u) const {
    return {cols_.data() + row_ptr_[u], row_ptr_[u + 1] - row_ptr_[u]};
  }
  std::span<const double> row_weights(std::size_t u) const {
    return {weights_.data() + row_ptr_[u], row_ptr_[u + 1] - row_ptr_[u]};
  }

  double weight(std::size_t u, std::size_t r) const {
    auto row = row_repos(u);
    auto it = std::lower_bound(row.begin(), row.end(), static_cast<std::uint32_t>(r));
    if (it == row.end() || *it != r) return 0.0;
    return weights_[row_ptr_[u] + static_cast<std::size_t>(it - row.begin())];
  }

  double weight(const std::string& user, const std::string& repo) const {
    auto u = user_position(user);
    auto r = repo_position(repo);
    return u && r ? weight(*u, *r) : 0.0;
  }

  double total_weight() const {
    double s = 0;
    for (double w : weights_) s += w;
    return s;
  }

  template <class F>
  void for_each_edge(F&& f) const {
    for (std::size_t u = 0; u < users_.size(); ++u)
      for (std::size_t k = row_ptr_[u]; k < row_ptr_[u + 1]; ++k) f(u, static_cast<std::size_t>(cols_[k]), weights_[k]);
  }

 private:
  void index() {
    for (std::size_t i = 0; i < users_.size(); ++i) user_pos_.emplace(users_[i], i);
    for (std::size_t i = 0; i < repos_.size(); ++i) repo_pos_.emplace(repos_[i], i);
  }

  EventType type_ = EventType::Push;
  std::vector<std::string> users_, repos_;
  std::unordered_map<std::string, std::size_t> user_pos_, repo_pos_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> cols_;
  std::vector<double> weights_;
};

/// A_e[u, r] = number of e-events by u on r inside the slice window.
inline BipartiteGraph build_bipartite(const TrainingSlice& slice, EventType e) {
  if (e == EventType::Create || e == EventType::Delete)
    fail(ErrorCode::UnsupportedEventType, std::string(to_string(e)) + " has no bipartite network");
  std::vector<BipartiteGraph::Triplet> triplets;
  for (std::size_t u = 0; u < slice.user_count(); ++u)
    for (const auto& h : slice.histories[u].counts)
      if (h.type == e) triplets.push_back({slice.user_ids[u], slice.repo_ids[h.repo], static_cast<double>(h.count)});
  return BipartiteGraph::from_triplets(e, std::move(triplets));
}

}  // namespace ghsim
