#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <cereal/types/array.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/utility.hpp>
#include <cereal/types/vector.hpp>

#include "ghsim/core/random.hpp"
#include "ghsim/engine/model.hpp"
#include "ghsim/ingest/slice.hpp"

namespace ghsim {

inline constexpr Timestamp kNullTileSeconds = 14 * kSecondsPerDay;

/// The two weeks before test_window.start, tiled across test_window by whole
/// multiples of 14 days. Ids are unchanged.
inline std::vector<Event> fit_null(const EventLog& log, TimeWindow test_window) {
  if (test_window.empty()) fail(ErrorCode::EmptyWindow, "test window is empty");
  const TimeWindow pre{test_window.start - kNullTileSeconds, test_window.start};
  const EventLog source = log.restrict(pre);
  if (source.empty()) fail(ErrorCode::EmptyWindow, "no events in the two weeks before " + format_timestamp(test_window.start));
  std::vector<Event> out;
  for (Timestamp shift = kNullTileSeconds; pre.start + shift < test_window.end; shift += kNullTileSeconds) {
    for (const auto& e : source) {
      const Timestamp t = e.time + shift;
      if (t >= test_window.end) break;
      out.push_back({t, e.type, e.user, e.repo});
    }
  }
  std::sort(out.begin(), out.end(), event_less);
  return out;
}

/// Pre-timestamped replay model; the engine passes its events through.
class NullModel final : public AgentModel {
 public:
  NullModel() = default;
  explicit NullModel(std::vector<Event> events) : events_(std::move(events)) {}

  static NullModel fit(const EventLog& log, TimeWindow test_window) { return NullModel(fit_null(log, test_window)); }

  std::string_view name() const override { return "null"; }
  std::size_t agent_count() const override { return 0; }
  std::string agent_id(std::size_t) const override { return {}; }
  UserIndex agent_user(std::size_t) const override { return kNoIndex; }
  double rate_per_day(std::size_t) const override { return 0; }
  Action step(std::size_t, StepContext&) const override {
    fail(ErrorCode::InvalidArgument, "the null model is pre-timestamped");
  }
  std::optional<std::vector<Event>> fixed_events(const TimeWindow& w) const override {
    std::vector<Event> out;
    for (const auto& e : events_)
      if (w.contains(e.time)) out.push_back(e);
    return out;
  }

  const std::vector<Event>& events() const { return events_; }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(events_);
  }

 private:
  std::vector<Event> events_;
};

// ---------------------------------------------------------------------------
// Per-user stationary policies

struct BaselinePolicy {
  std::array<double, kEventTypeCount> action_dist{};  // indexed by index_of(EventType)
  std::vector<RepoIndex> repos;                        // observed repos, ascending
  std::vector<double> repo_dist;                       // parallel to repos
  DiscreteSampler action_sampler;
  DiscreteSampler repo_sampler;

  void prepare() {
    action_sampler.assign(action_dist);
    repo_sampler.assign(repo_dist);
  }

  template <class Archive>
  void save(Archive& ar) const {
    ar(action_dist, repos, repo_dist);
  }
  template <class Archive>
  void load(Archive& ar) {
    ar(action_dist, repos, repo_dist);
    prepare();
  }
};

struct GroundEventPolicy {
  std::vector<std::pair<EventType, RepoIndex>> pairs;  // observed, ascending
  std::vector<double> pair_dist;
  DiscreteSampler sampler;

  void prepare() { sampler.assign(pair_dist); }

  template <class Archive>
  void save(Archive& ar) const {
    ar(pairs, pair_dist);
  }
  template <class Archive>
  void load(Archive& ar) {
    ar(pairs, pair_dist);
    prepare();
  }
};

struct PreferentialPolicy {
  BaselinePolicy base;
  std::vector<UserIndex> neighbors;  // repo owners who share repos with this user, ascending

  template <class Archive>
  void serialize(Archive& ar) {
    ar(base, neighbors);
  }
};

inline BaselinePolicy fit_baseline(const UserHistory& h) {
  BaselinePolicy p;
  const double total = static_cast<double>(h.total());
  if (total <= 0) fail(ErrorCode::InsufficientData, "user " + h.user_id + " has no events");
  std::map<RepoIndex, double> repo_counts;
  for (const auto& e : h.counts) {
    p.action_dist[index_of(e.type)] += e.count;
    repo_counts[e.repo] += e.count;
  }
  for (auto& x : p.action_dist) x /= total;
  for (const auto& [r, c] : repo_counts) {
    p.repos.push_back(r);
    p.repo_dist.push_back(c / total);
  }
  p.prepare();
  return p;
}

inline BaselinePolicy fit_baseline(const TrainingSlice& slice, const std::string& user_id) {
  return fit_baseline(slice.history(user_id));
}

template <class G>
std::pair<EventType, RepoIndex> step_baseline(const BaselinePolicy& p, G& rng) {
  const auto t = kAllEventTypes[p.action_sampler.sample(rng)];
  const auto r = p.repos[p.repo_sampler.sample(rng)];
  return {t, r};
}

inline GroundEventPolicy fit_ground_event(const UserHistory& h) {
  GroundEventPolicy p;
  const double total = static_cast<double>(h.total());
  if (total <= 0) fail(ErrorCode::InsufficientData, "user " + h.user_id + " has no events");
  for (const auto& e : h.counts) {  // already sorted by (type, repo)
    p.pairs.emplace_back(e.type, e.repo);
    p.pair_dist.push_back(e.count / total);
  }
  p.prepare();
  return p;
}

inline GroundEventPolicy fit_ground_event(const TrainingSlice& slice, const std::string& user_id) {
  return fit_ground_event(slice.history(user_id));
}

template <class G>
std::pair<EventType, RepoIndex> step_ground_event(const GroundEventPolicy& p, G& rng) {
  return p.pairs[p.sampler.sample(rng)];
}

/// Repos owned by each slice user; the preferential model picks targets here.
struct OwnershipTable {
  std::vector<std::vector<RepoIndex>> owned;  // by user index, ascending

  static OwnershipTable build(const TrainingSlice& slice) {
    OwnershipTable t;
    t.owned.resize(slice.user_count());
    for (RepoIndex r = 0; r < slice.repo_count(); ++r)
      if (slice.repo_owner[r] != kNoIndex) t.owned[slice.repo_owner[r]].push_back(r);
    return t;
  }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(owned);
  }
};

struct PreferentialOptions {
  std::size_t max_neighbors = 256;
};

/// Neighbors of u: other users active on any repo u touched who own at least
/// one repo. Ranked by number of shared repos, keeping the top max_neighbors.
inline PreferentialPolicy fit_preferential(const TrainingSlice& slice, UserIndex u, const OwnershipTable& own,
                                           const std::vector<std::vector<UserIndex>>& repo_users,
                                           const PreferentialOptions& opts = {}) {
  PreferentialPolicy p;
  p.base = fit_baseline(slice.histories[u]);
  std::unordered_map<UserIndex, std::uint32_t> shared;
  for (RepoIndex r : p.base.repos)
    for (UserIndex v : repo_users[r])
      if (v != u && !own.owned[v].empty()) ++shared[v];
  std::vector<std::pair<std::uint32_t, UserIndex>> ranked;
  ranked.reserve(shared.size());
  for (const auto& [v, n] : shared) ranked.emplace_back(n, v);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  if (ranked.size() > opts.max_neighbors) ranked.resize(opts.max_neighbors);
  for (const auto& [n, v] : ranked) p.neighbors.push_back(v);
  std::sort(p.neighbors.begin(), p.neighbors.end());
  return p;
}

/// Users active on each repo, ascending.
inline std::vector<std::vector<UserIndex>> repo_user_lists(const TrainingSlice& slice) {
  std::vector<std::vector<UserIndex>> out(slice.repo_count());
  for (UserIndex u = 0; u < slice.user_count(); ++u) {
    RepoIndex last = kNoIndex;
    std::vector<RepoIndex> repos;
    for (const auto& h : slice.histories[u].counts) repos.push_back(h.repo);
    std::sort(repos.begin(), repos.end());
    for (auto r : repos) {
      if (r == last) continue;
      out[r].push_back(u);
      last = r;
    }
  }
  return out;
}

// Index drawn with probability proportional to weight(i); uniform when all
// weights are zero.
template <class G, class W>
std::size_t proportional_pick(std::size_t n, W&& weight, G& rng) {
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) total += weight(i);
  if (total <= 0) return static_cast<std::size_t>(uniform_index(rng, n));
  double x = uniform01(rng) * total;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weight(i);
    if (x < w) return i;
    x -= w;
  }
  for (std::size_t i = n; i-- > 0;)
    if (weight(i) > 0) return i;
  return n - 1;
}

template <class G>
std::pair<EventType, RepoIndex> step_preferential(const PreferentialPolicy& p, const OwnershipTable& own, G& rng,
                                                  const HubView& hub) {
  const auto t = kAllEventTypes[p.base.action_sampler.sample(rng)];
  if ((t != EventType::Watch && t != EventType::Fork) || p.neighbors.empty())
    return {t, p.base.repos[p.base.repo_sampler.sample(rng)]};
  const auto& nb = p.neighbors;
  const UserIndex v = nb[proportional_pick(nb.size(), [&](std::size_t i) { return double(hub.user_popularity(nb[i])); }, rng)];
  const auto& repos = own.owned[v];
  const RepoIndex r = repos[proportional_pick(repos.size(), [&](std::size_t i) { return double(hub.popularity(repos[i])); }, rng)];
  return {t, r};
}

// ---------------------------------------------------------------------------
// AgentModel adapter

enum class StationaryKind { Baseline, GroundEvent, Preferential };

inline std::string_view to_string(StationaryKind k) {
  switch (k) {
    case StationaryKind::Baseline: return "baseline";
    case StationaryKind::GroundEvent: return "ground_event";
    case StationaryKind::Preferential: return "preferential";
  }
  return "?";
}

class StationaryModel final : public AgentModel {
 public:
  StationaryModel() = default;

  static StationaryModel fit(const TrainingSlice& slice, StationaryKind kind, const PreferentialOptions& opts = {}) {
    StationaryModel m;
    m.kind_ = kind;
    m.user_ids_ = slice.user_ids;
    m.rates_.reserve(slice.user_count());
    for (const auto& h : slice.histories) m.rates_.push_back(h.rate);
    switch (kind) {
      case StationaryKind::Baseline:
        for (const auto& h : slice.histories) m.baseline_.push_back(fit_baseline(h));
        break;
      case StationaryKind::GroundEvent:
        for (const auto& h : slice.histories) m.ground_.push_back(fit_ground_event(h));
        break;
      case StationaryKind::Preferential: {
        m.ownership_ = OwnershipTable::build(slice);
        const auto repo_users = repo_user_lists(slice);
        for (UserIndex u = 0; u < slice.user_count(); ++u)
          m.preferential_.push_back(fit_preferential(slice, u, m.ownership_, repo_users, opts));
        break;
      }
    }
    return m;
  }

  StationaryKind kind() const { return kind_; }
  std::string_view name() const override { return to_string(kind_); }
  std::size_t agent_count() const override { return user_ids_.size(); }
  std::string agent_id(std::size_t a) const override { return user_ids_[a]; }
  UserIndex agent_user(std::size_t a) const override { return static_cast<UserIndex>(a); }
  double rate_per_day(std::size_t a) const override { return rates_[a]; }

  Action step(std::size_t a, StepContext& ctx) const override {
    std::pair<EventType, RepoIndex> choice;
    switch (kind_) {
      case StationaryKind::Baseline: choice = step_baseline(baseline_[a], ctx.rng); break;
      case StationaryKind::GroundEvent: choice = step_ground_event(ground_[a], ctx.rng); break;
      case StationaryKind::Preferential:
        choice = step_preferential(preferential_[a], ownership_, ctx.rng, ctx.hub);
        break;
    }
    Action act;
    act.type = choice.first;
    act.repo = choice.second;
    return act;
  }

  const BaselinePolicy& baseline(std::size_t a) const { return baseline_.at(a); }
  const GroundEventPolicy& ground_event(std::size_t a) const { return ground_.at(a); }
  const PreferentialPolicy& preferential(std::size_t a) const { return preferential_.at(a); }
  const OwnershipTable& ownership() const { return ownership_; }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(kind_, user_ids_, rates_, baseline_, ground_, preferential_, ownership_);
  }

 private:
  StationaryKind kind_ = StationaryKind::Baseline;
  std::vector<std::string> user_ids_;
  std::vector<double> rates_;
  std::vector<BaselinePolicy> baseline_;
  std::vector<GroundEventPolicy> ground_;
  std::vector<PreferentialPolicy> preferential_;
  OwnershipTable ownership_;
};

}  // namespace ghsim
