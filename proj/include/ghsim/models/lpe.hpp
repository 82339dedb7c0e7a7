#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include <cereal/types/array.hpp>
#include <cereal/types/utility.hpp>
#include <cereal/types/vector.hpp>

#include "ghsim/engine/model.hpp"
#include "ghsim/models/embedding.hpp"
#include "ghsim/models/stationary.hpp"

namespace ghsim {

inline constexpr std::size_t kLpeTopK = 100;

/// Event types that have a bipartite network.
inline std::vector<EventType> linkable_event_types() {
  std::vector<EventType> out;
  for (auto t : kAllEventTypes)
    if (t != EventType::Create && t != EventType::Delete) out.push_back(t);
  return out;
}

struct ScoredRepo {
  RepoIndex repo = kNoIndex;
  double score = 0;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(repo, score);
  }
  friend bool operator==(const ScoredRepo&, const ScoredRepo&) = default;
};

struct LpePolicy {
  BaselinePolicy base;
  std::array<std::vector<ScoredRepo>, kEventTypeCount> top{};  // by index_of(type), score descending
  std::array<DiscreteSampler, kEventTypeCount> samplers{};

  void prepare() {
    for (std::size_t t = 0; t < kEventTypeCount; ++t) {
      std::vector<double> w;
      w.reserve(top[t].size());
      for (const auto& s : top[t]) w.push_back(std::max(s.score, 0.0));
      samplers[t].assign(w);
    }
  }

  template <class Archive>
  void save(Archive& ar) const {
    ar(base, top);
  }
  template <class Archive>
  void load(Archive& ar) {
    ar(base, top);
    prepare();
  }
};

/// Top-k repos for one user row of an embedding, mapped to slice indices.
inline std::vector<ScoredRepo> top_repos(const Embedding& emb, Eigen::Index user_row, const std::vector<RepoIndex>& repo_map,
                                         std::size_t k) {
  const Vector s = emb.repos * emb.users.row(user_row).transpose();
  std::vector<std::uint32_t> idx(static_cast<std::size_t>(s.size()));
  std::iota(idx.begin(), idx.end(), 0u);
  const std::size_t depth = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(depth), idx.end(),
                    [&](std::uint32_t a, std::uint32_t b) { return s(a) > s(b) || (s(a) == s(b) && a < b); });
  std::vector<ScoredRepo> out;
  out.reserve(depth);
  for (std::size_t i = 0; i < depth; ++i) out.push_back({repo_map[idx[i]], s(idx[i])});
  return out;
}

/// Builds one policy per slice user from embeddings trained on the slice.
inline std::vector<LpePolicy> fit_lpe(const TrainingSlice& slice, const std::vector<Embedding>& embeddings,
                                      std::size_t k = kLpeTopK) {
  std::vector<LpePolicy> out(slice.user_count());
  for (UserIndex u = 0; u < slice.user_count(); ++u) out[u].base = fit_baseline(slice.histories[u]);
  for (const auto& emb : embeddings) {
    std::vector<RepoIndex> repo_map;
    repo_map.reserve(emb.repo_ids.size());
    for (const auto& id : emb.repo_ids) repo_map.push_back(slice.repo_lookup.at(id));
    for (std::size_t row = 0; row < emb.user_ids.size(); ++row) {
      const UserIndex u = slice.user_lookup.at(emb.user_ids[row]);
      out[u].top[index_of(emb.event_type)] = top_repos(emb, static_cast<Eigen::Index>(row), repo_map, k);
    }
  }
  for (auto& p : out) p.prepare();
  return out;
}

template <class G>
std::pair<EventType, RepoIndex> step_lpe(const LpePolicy& p, G& rng) {
  const auto t = kAllEventTypes[p.base.action_sampler.sample(rng)];
  const auto& sampler = p.samplers[index_of(t)];
  if (!sampler.empty()) return {t, p.top[index_of(t)][sampler.sample(rng)].repo};
  return {t, p.base.repos[p.base.repo_sampler.sample(rng)]};
}

struct LpeOptions {
  EmbeddingMethod method = EmbeddingMethod::GF;
  TrainOptions train{};
  std::size_t top_k = kLpeTopK;
};

class LpeModel final : public AgentModel {
 public:
  LpeModel() = default;

  static LpeModel fit(const TrainingSlice& slice, const LpeOptions& opts = {}) {
    std::vector<Embedding> embs;
    for (auto t : linkable_event_types()) {
      const auto g = build_bipartite(slice, t);
      if (g.nnz() == 0) continue;
      embs.push_back(train_embedding(g, opts.method, opts.train));
    }
    return from_embeddings(slice, embs, opts.top_k);
  }

  static LpeModel from_embeddings(const TrainingSlice& slice, const std::vector<Embedding>& embs, std::size_t k = kLpeTopK) {
    LpeModel m;
    m.user_ids_ = slice.user_ids;
    for (const auto& h : slice.histories) m.rates_.push_back(h.rate);
    m.policies_ = fit_lpe(slice, embs, k);
    return m;
  }

  std::string_view name() const override { return "lpe"; }
  std::size_t agent_count() const override { return user_ids_.size(); }
  std::string agent_id(std::size_t a) const override { return user_ids_[a]; }
  UserIndex agent_user(std::size_t a) const override { return static_cast<UserIndex>(a); }
  double rate_per_day(std::size_t a) const override { return rates_[a]; }

  Action step(std::size_t a, StepContext& ctx) const override {
    const auto [t, r] = step_lpe(policies_[a], ctx.rng);
    Action act;
    act.type = t;
    act.repo = r;
    return act;
  }

  const LpePolicy& policy(std::size_t a) const { return policies_.at(a); }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(user_ids_, rates_, policies_);
  }

 private:
  std::vector<std::string> user_ids_;
  std::vector<double> rates_;
  std::vector<LpePolicy> policies_;
};

}  // namespace ghsim
