#pragma once

#include <array>
#include <future>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <cereal/types/array.hpp>
#include <cereal/types/optional.hpp>
#include <cereal/types/vector.hpp>

#include "ghsim/engine/model.hpp"
#include "ghsim/models/features.hpp"
#include "ghsim/models/s3d.hpp"
#include "ghsim/models/stationary.hpp"

namespace ghsim {

/// Pairs without history in the first half of a window, with per-type event
/// counts from the second half as targets.
struct NewEntityTraining {
  std::vector<std::pair<std::string, std::string>> pairs;
  FeatureTable table;
  std::array<std::vector<double>, kEventTypeCount> targets{};
  std::size_t positives = 0;
};

inline NewEntityTraining new_entity_training(const TrainingSlice& slice, std::uint64_t seed = 1) {
  const Timestamp mid = slice.window.start + (slice.window.end - slice.window.start) / 2;
  const TimeWindow first{slice.window.start, mid}, second{mid, slice.window.end};
  const auto early = slice.events.restrict(first);
  const auto late = slice.events.restrict(second);
  if (early.empty() || late.empty())
    fail(ErrorCode::InsufficientData, "new-entity training needs events in both halves of the window");
  const auto feat_slice = build_slice(early, first, slice.meta);

  auto key = [](const std::string& u, const std::string& r) { return u + '\x1f' + r; };
  std::unordered_set<std::string> touched;
  for (const auto& e : early) touched.insert(key(e.user, e.repo));

  std::map<std::pair<std::string, std::string>, std::array<double, kEventTypeCount>> counts;
  for (const auto& e : late) {
    if (touched.count(key(e.user, e.repo))) continue;
    counts[{e.user, e.repo}][index_of(e.type)] += 1;
  }

  NewEntityTraining out;
  for (const auto& [p, c] : counts) {
    out.pairs.push_back(p);
    for (std::size_t t = 0; t < kEventTypeCount; ++t) out.targets[t].push_back(c[t]);
  }
  out.positives = out.pairs.size();

  // Equal number of zero pairs drawn uniformly over all users x all repos.
  Rng g(derive_seed(seed, "new-entity-negatives"));
  std::unordered_set<std::string> drawn;
  const std::size_t attempts = 20 * out.positives + 100;
  for (std::size_t i = 0; i < attempts && out.pairs.size() < 2 * out.positives; ++i) {
    const auto& u = slice.user_ids[uniform_index(g, slice.user_count())];
    const auto& r = slice.repo_ids[uniform_index(g, slice.repo_count())];
    const auto k = key(u, r);
    if (touched.count(k) || counts.count({u, r}) || !drawn.insert(k).second) continue;
    out.pairs.emplace_back(u, r);
    for (auto& t : out.targets) t.push_back(0);
  }
  out.table = extract_features(feat_slice, out.pairs);
  return out;
}

struct NewEntityOptions {
  double p_explore = 0.12;
  std::vector<double> lambda_grid{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  std::size_t folds = 3;
  std::size_t max_features = 6;
  std::size_t top_popular = 20;
  std::size_t max_candidates = 30;
  std::size_t threads = 1;
  std::uint64_t seed = 1;
};

/// One count model per event type; types whose targets never vary stay empty.
struct NewEntityFit {
  std::array<std::optional<S3dModel>, kEventTypeCount> models{};
  std::array<double, kEventTypeCount> mean_count{};
  std::array<LambdaSelection, kEventTypeCount> selection{};

  template <class Archive>
  void serialize(Archive& ar) {
    ar(models, mean_count);
  }
};

inline NewEntityFit fit_new_entity(const NewEntityTraining& data, const NewEntityOptions& opts = {}) {
  NewEntityFit out;
  auto fit_one = [&](std::size_t t) {
    const auto& y = data.targets[t];
    if (!y.empty()) out.mean_count[t] = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    try {
      out.selection[t] = select_lambda(data.table, y, opts.lambda_grid, opts.folds, opts.max_features, opts.seed);
      out.models[t] = fit_s3d(data.table, y, out.selection[t].lambda, opts.max_features, kAllEventTypes[t]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateTarget) throw;
    }
  };
  if (opts.threads <= 1) {
    for (std::size_t t = 0; t < kEventTypeCount; ++t) fit_one(t);
  } else {
    // Types are independent and each writes only its own slots.
    std::vector<std::future<void>> jobs;
    for (std::size_t t = 0; t < kEventTypeCount; ++t) {
      jobs.push_back(std::async(std::launch::async, fit_one, t));
      if (jobs.size() == opts.threads) {
        for (auto& j : jobs) j.get();
        jobs.clear();
      }
    }
    for (auto& j : jobs) j.get();
  }
  return out;
}

/// Repos two hops away in the user-repo graph, most shared users first.
inline std::vector<std::vector<RepoIndex>> two_hop_repos(const TrainingSlice& slice, std::size_t keep = 16) {
  constexpr std::size_t kOwnRepos = 8, kCoUsers = 16, kTheirRepos = 16;
  const auto repo_users = repo_user_lists(slice);
  std::vector<std::vector<RepoIndex>> user_repos(slice.user_count());
  for (UserIndex u = 0; u < slice.user_count(); ++u) {
    std::map<RepoIndex, std::uint64_t> w;
    for (const auto& e : slice.histories[u].counts) w[e.repo] += e.count;
    std::vector<std::pair<std::uint64_t, RepoIndex>> ranked;
    for (auto [r, n] : w) ranked.emplace_back(n, r);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    for (const auto& [n, r] : ranked) user_repos[u].push_back(r);
  }
  std::vector<std::vector<RepoIndex>> out(slice.user_count());
  for (UserIndex u = 0; u < slice.user_count(); ++u) {
    const auto& mine = user_repos[u];
    std::map<RepoIndex, std::uint32_t> hits;
    for (std::size_t i = 0; i < std::min(kOwnRepos, mine.size()); ++i) {
      const auto& users = repo_users[mine[i]];
      for (std::size_t j = 0; j < std::min(kCoUsers, users.size()); ++j) {
        if (users[j] == u) continue;
        const auto& theirs = user_repos[users[j]];
        for (std::size_t k = 0; k < std::min(kTheirRepos, theirs.size()); ++k) ++hits[theirs[k]];
      }
    }
    for (auto r : mine) hits.erase(r);
    std::vector<std::pair<std::uint32_t, RepoIndex>> ranked;
    for (auto [r, n] : hits) ranked.emplace_back(n, r);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    for (std::size_t i = 0; i < std::min(keep, ranked.size()); ++i) out[u].push_back(ranked[i].second);
  }
  return out;
}

/// Wraps a history-driven model: with probability p_explore a step targets a
/// repo the user never touched, picked with weight equal to its predicted
/// event count.
class NewEntityModel final : public AgentModel {
 public:
  NewEntityModel() = default;

  NewEntityModel(std::shared_ptr<const AgentModel> base, const TrainingSlice& slice, NewEntityFit fit,
                 const NewEntityOptions& opts = {})
      : base_(std::move(base)), fit_(std::move(fit)), ctx_(slice), p_explore_(opts.p_explore),
        top_popular_(opts.top_popular), max_candidates_(opts.max_candidates) {
    if (!base_) fail(ErrorCode::InvalidArgument, "new-entity wrapper needs a base model");
    if (!(p_explore_ >= 0 && p_explore_ <= 1)) fail(ErrorCode::InvalidArgument, "p_explore must be in [0, 1]");
    touched_.resize(slice.user_count());
    for (UserIndex u = 0; u < slice.user_count(); ++u) {
      for (const auto& e : slice.histories[u].counts) touched_[u].push_back(e.repo);
      std::sort(touched_[u].begin(), touched_[u].end());
      touched_[u].erase(std::unique(touched_[u].begin(), touched_[u].end()), touched_[u].end());
    }
    two_hop_ = two_hop_repos(slice);
  }

  static NewEntityModel fit(std::shared_ptr<const AgentModel> base, const TrainingSlice& slice,
                            const NewEntityOptions& opts = {}) {
    return NewEntityModel(std::move(base), slice, fit_new_entity(new_entity_training(slice, opts.seed), opts), opts);
  }

  /// Replaces the candidate lists; used by tests and callers with their own source.
  void set_two_hop(std::vector<std::vector<RepoIndex>> lists) { two_hop_ = std::move(lists); }
  void set_base(std::shared_ptr<const AgentModel> base) { base_ = std::move(base); }
  void set_top_popular(std::size_t n) { top_popular_ = n; }

  const NewEntityFit& fitted() const { return fit_; }
  const AgentModel& base() const { return *base_; }
  double p_explore() const { return p_explore_; }

  std::string_view name() const override { return "new_entity"; }
  std::size_t agent_count() const override { return base_->agent_count(); }
  std::string agent_id(std::size_t a) const override { return base_->agent_id(a); }
  UserIndex agent_user(std::size_t a) const override { return base_->agent_user(a); }
  double rate_per_day(std::size_t a) const override { return base_->rate_per_day(a); }

  Action step(std::size_t a, StepContext& ctx) const override {
    if (p_explore_ <= 0) return base_->step(a, ctx);
    const UserIndex u = base_->agent_user(a);
    if (u == kNoIndex || u >= touched_.size() || uniform01(ctx.rng) >= p_explore_) return base_->step(a, ctx);
    const auto cand = candidates(u, ctx.hub);
    if (cand.empty()) return base_->step(a, ctx);

    std::vector<double> weights;
    weights.reserve(cand.size() * kEventTypeCount);
    std::vector<double> row;
    for (auto r : cand) {
      row.clear();
      ctx_.append(u, r, row);
      for (std::size_t t = 0; t < kEventTypeCount; ++t) weights.push_back(fit_.models[t] ? fit_.models[t]->predict(row) : 0.0);
    }
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0)) {
      // No model expects activity: fall back to the average new-pair counts.
      for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = fit_.mean_count[i % kEventTypeCount];
      total = std::accumulate(weights.begin(), weights.end(), 0.0);
      if (!(total > 0)) return base_->step(a, ctx);
    }
    const std::size_t pick = proportional_pick(weights.size(), [&](std::size_t i) { return weights[i]; }, ctx.rng);
    Action act;
    act.type = kAllEventTypes[pick % kEventTypeCount];
    act.repo = cand[pick / kEventTypeCount];
    return act;
  }

  /// Popular repos then two-hop repos, skipping any the user already touched.
  std::vector<RepoIndex> candidates(UserIndex u, const HubView& hub) const {
    std::vector<RepoIndex> out;
    auto seen = [&](RepoIndex r) {
      return std::binary_search(touched_[u].begin(), touched_[u].end(), r) ||
             std::find(out.begin(), out.end(), r) != out.end();
    };
    std::size_t popular = 0;
    for (auto r : hub.repos_by_popularity()) {
      if (popular >= top_popular_ || out.size() >= max_candidates_) break;
      if (seen(r)) continue;
      out.push_back(r);
      ++popular;
    }
    if (u < two_hop_.size())
      for (auto r : two_hop_[u]) {
        if (out.size() >= max_candidates_) break;
        if (!seen(r)) out.push_back(r);
      }
    return out;
  }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(fit_, ctx_, p_explore_, top_popular_, max_candidates_, touched_, two_hop_);
  }

 private:
  std::shared_ptr<const AgentModel> base_;
  NewEntityFit fit_;
  FeatureContext ctx_;
  double p_explore_ = 0.12;
  std::size_t top_popular_ = 20;
  std::size_t max_candidates_ = 30;
  std::vector<std::vector<RepoIndex>> touched_;
  std::vector<std::vector<RepoIndex>> two_hop_;
};

}  // namespace ghsim
