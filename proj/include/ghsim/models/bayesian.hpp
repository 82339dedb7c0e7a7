#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <cereal/types/array.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>
#include <nlohmann/json.hpp>

#include "ghsim/core/random.hpp"
#include "ghsim/engine/model.hpp"
#include "ghsim/ingest/slice.hpp"
#include "ghsim/models/powerlaw.hpp"
#include "ghsim/models/rank.hpp"

namespace ghsim {

struct BayesianOptions {
  double half_life_days = kDefaultHalfLifeDays;
  double walk_mean = 2.0;
  double default_p_new = 0.2;
  std::size_t min_events = 100;
  std::size_t discovery_retries = 8;
  std::size_t min_powerlaw_points = 50;
  PowerLawRank default_watch{1.81, 3, RankPurpose::Watch, false};
  PowerLawRank default_pull_request{2.54, 291, RankPurpose::PullRequest, false};
};

// Discovery targets, in order.
inline constexpr std::array<EventType, 3> kDiscoveryTypes = {EventType::Watch, EventType::Fork, EventType::Create};

/// Frozen user-repo graph used for the short social walks, in CSR form on
/// both sides with cumulative weights per row.
struct WalkGraph {
  std::vector<std::uint64_t> user_offsets{0}, repo_offsets{0};
  std::vector<RepoIndex> user_adj;  // repos of each user, ascending
  std::vector<UserIndex> repo_adj;  // users of each repo, ascending
  std::vector<double> user_cum, repo_cum;

  static WalkGraph build(const TrainingSlice& slice) {
    WalkGraph g;
    std::vector<std::vector<std::pair<UserIndex, double>>> by_repo(slice.repo_count());
    for (UserIndex u = 0; u < slice.user_count(); ++u) {
      std::map<RepoIndex, double> row;
      for (const auto& h : slice.histories[u].counts) row[h.repo] += h.count;
      double acc = 0;
      for (const auto& [r, w] : row) {
        g.user_adj.push_back(r);
        acc += w;
        g.user_cum.push_back(acc);
        by_repo[r].emplace_back(u, w);
      }
      g.user_offsets.push_back(g.user_adj.size());
    }
    for (const auto& col : by_repo) {
      double acc = 0;
      for (const auto& [u, w] : col) {
        g.repo_adj.push_back(u);
        acc += w;
        g.repo_cum.push_back(acc);
      }
      g.repo_offsets.push_back(g.repo_adj.size());
    }
    return g;
  }

  std::size_t user_count() const { return user_offsets.size() - 1; }
  std::span<const RepoIndex> repos_of(UserIndex u) const {
    return {user_adj.data() + user_offsets[u], user_offsets[u + 1] - user_offsets[u]};
  }
  bool touched(UserIndex u, RepoIndex r) const {
    if (u >= user_count()) return false;
    auto row = repos_of(u);
    return std::binary_search(row.begin(), row.end(), r);
  }

  template <class G>
  RepoIndex step_repo(UserIndex u, G& g) const {
    return user_adj[pick(user_cum, user_offsets[u], user_offsets[u + 1], g)];
  }
  template <class G>
  UserIndex step_user(RepoIndex r, G& g) const {
    return repo_adj[pick(repo_cum, repo_offsets[r], repo_offsets[r + 1], g)];
  }

  /// Walk of `length` user->repo hops starting at u; returns the landing repo.
  template <class G>
  RepoIndex walk(UserIndex u, std::uint32_t length, G& g) const {
    RepoIndex r = step_repo(u, g);
    for (std::uint32_t i = 1; i < length; ++i) r = step_repo(step_user(r, g), g);
    return r;
  }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(user_offsets, repo_offsets, user_adj, repo_adj, user_cum, repo_cum);
  }

 private:
  template <class G>
  static std::size_t pick(const std::vector<double>& cum, std::uint64_t lo, std::uint64_t hi, G& g) {
    const double x = uniform01(g) * cum[hi - 1];  // rows restart at zero
    auto it = std::upper_bound(cum.begin() + static_cast<std::ptrdiff_t>(lo), cum.begin() + static_cast<std::ptrdiff_t>(hi), x);
    const auto i = static_cast<std::size_t>(it - cum.begin());
    return std::min<std::size_t>(i, hi - 1);
  }
};

/// Quantities estimated from a training slice.
struct BayesianParams {
  double events_per_day = 0;
  double p_new = 0.2;
  bool p_new_estimated = false;
  double new_users_per_day = 0;
  double p_one_time = 0;                        // existing users' one-time share
  std::array<double, 3> discovery_split{};      // Watch, Fork, Create among one-time first touches
  double first_touch_one_time_share = 0;        // one-time share of first touches
  double p_own = 0;                             // multiple-time events on own repos (owners only)
  std::array<double, kEventTypeCount> own_types{};
  std::array<double, kEventTypeCount> other_types{};
  double walk_mean = 2.0;
  PowerLawRank watch_rank;
  PowerLawRank fork_rank;
  PowerLawRank pull_request_rank;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(events_per_day, p_new, p_new_estimated, new_users_per_day, p_one_time, discovery_split,
       first_touch_one_time_share, p_own, own_types, other_types, walk_mean, watch_rank, fork_rank,
       pull_request_rank);
  }

  nlohmann::json to_json() const {
    auto types = [](const std::array<double, kEventTypeCount>& a) {
      nlohmann::json j = nlohmann::json::object();
      for (auto t : kAllEventTypes)
        if (a[index_of(t)] > 0) j[std::string(to_string(t))] = a[index_of(t)];
      return j;
    };
    auto rank = [](const PowerLawRank& r) {
      return nlohmann::json{{"gamma", r.gamma}, {"xmin", r.xmin}, {"fitted", r.fitted}};
    };
    return {{"events_per_day", events_per_day},
            {"p_new", p_new},
            {"p_new_estimated", p_new_estimated},
            {"new_users_per_day", new_users_per_day},
            {"p_one_time", p_one_time},
            {"discovery_split", {{"Watch", discovery_split[0]}, {"Fork", discovery_split[1]}, {"Create", discovery_split[2]}}},
            {"first_touch_one_time_share", first_touch_one_time_share},
            {"p_own", p_own},
            {"own_types", types(own_types)},
            {"other_types", types(other_types)},
            {"walk_mean", walk_mean},
            {"watch_rank", rank(watch_rank)},
            {"fork_rank", rank(fork_rank)},
            {"pull_request_rank", rank(pull_request_rank)}};
  }
};

/// One generated tuple. `user == kNoIndex` with a non-empty `new_user` marks a
/// freshly minted user; `repo == kNoIndex` with `new_repo` a freshly minted repo.
struct BayesTuple {
  UserIndex user = kNoIndex;
  std::string new_user;
  RepoIndex repo = kNoIndex;
  std::string new_repo;
  EventType type = EventType::Push;
};

namespace detail {

inline std::vector<std::uint64_t> in_degrees(const TrainingSlice& slice, EventType type) {
  std::vector<std::uint64_t> deg(slice.repo_count(), 0);
  for (const auto& h : slice.histories)
    for (const auto& e : h.counts)
      if (e.type == type) ++deg[e.repo];
  std::erase(deg, 0);
  return deg;
}

inline PowerLawRank fit_rank(const TrainingSlice& slice, EventType type, RankPurpose purpose,
                             const BayesianOptions& opts) {
  const auto deg = in_degrees(slice, type);
  if (deg.size() < opts.min_powerlaw_points) return {};
  PowerLawOptions po;
  po.min_tail = std::max<std::size_t>(opts.min_powerlaw_points / 2, 10);
  try {
    const auto fit = fit_power_law(deg, po);
    return {fit.gamma, fit.xmin, purpose, true};
  } catch (const Error&) {
    return {};
  }
}

template <std::size_t N>
void normalize(std::array<double, N>& a) {
  double s = 0;
  for (double x : a) s += x;
  if (s > 0)
    for (double& x : a) x /= s;
}

}  // namespace detail

/// Generative model of who acts next, on which repository, with which event.
class BayesianModel final : public AgentModel {
 public:
  BayesianModel() = default;

  static BayesianModel fit(const TrainingSlice& slice, const BayesianOptions& opts = {}) {
    if (slice.events.size() < opts.min_events)
      fail(ErrorCode::InsufficientData, "Bayesian fit needs at least " + std::to_string(opts.min_events) + " events");
    BayesianModel m;
    m.opts_ = opts;
    auto& p = m.params_;
    const double days = slice.window.days();
    p.events_per_day = static_cast<double>(slice.events.size()) / days;
    p.walk_mean = opts.walk_mean;

    // New users: account created inside the window (needs user metadata).
    std::vector<char> is_new(slice.user_count(), 0);
    std::size_t new_users = 0;
    for (UserIndex u = 0; u < slice.user_count(); ++u) {
      const auto c = slice.histories[u].created_at;
      if (c && slice.window.contains(*c)) {
        is_new[u] = 1;
        ++new_users;
      }
    }
    p.p_new_estimated = !slice.meta.user_created.empty();
    p.new_users_per_day = static_cast<double>(new_users) / days;

    // Activity scores with half-life decay relative to window end.
    std::vector<double> scores(slice.user_count(), 0.0);
    std::vector<char> owns(slice.user_count(), 0);
    for (RepoIndex r = 0; r < slice.repo_count(); ++r)
      if (slice.repo_owner[r] != kNoIndex) owns[slice.repo_owner[r]] = 1;

    std::unordered_set<std::uint64_t> seen;
    std::size_t new_events = 0, existing_events = 0, existing_one_time = 0;
    std::size_t first_touches = 0, first_touch_one_time = 0;
    std::size_t owner_multi = 0, owner_multi_own = 0;
    std::array<double, 3> discovery{};
    for (const auto& e : slice.events) {
      const UserIndex u = slice.user_lookup.at(e.user);
      const RepoIndex r = slice.repo_lookup.at(e.repo);
      scores[u] += decay_weight(static_cast<double>(slice.window.end - e.time) / kSecondsPerDay, opts.half_life_days);
      const bool one_time = is_one_time(e.type);
      const bool first = seen.insert((static_cast<std::uint64_t>(u) << 32) | r).second;
      if (first) {
        ++first_touches;
        if (one_time) {
          ++first_touch_one_time;
          for (std::size_t k = 0; k < kDiscoveryTypes.size(); ++k)
            if (kDiscoveryTypes[k] == e.type) discovery[k] += 1;
        }
      }
      if (is_new[u]) {
        ++new_events;
        continue;
      }
      ++existing_events;
      if (one_time) {
        ++existing_one_time;
        continue;
      }
      const bool own = slice.repo_owner[r] == u;
      (own ? p.own_types : p.other_types)[index_of(e.type)] += 1;
      if (owns[u]) {
        ++owner_multi;
        owner_multi_own += own;
      }
    }
    const double total = static_cast<double>(slice.events.size());
    p.p_new = p.p_new_estimated ? static_cast<double>(new_events) / total : opts.default_p_new;
    p.p_one_time = existing_events ? static_cast<double>(existing_one_time) / static_cast<double>(existing_events) : 1.0;
    p.first_touch_one_time_share = first_touches ? static_cast<double>(first_touch_one_time) / static_cast<double>(first_touches) : 0.0;
    p.discovery_split = discovery;
    detail::normalize(p.discovery_split);
    if (first_touch_one_time == 0) p.discovery_split = {0.64 / 0.88, 0.20 / 0.88, 0.04 / 0.88};
    p.p_own = owner_multi ? static_cast<double>(owner_multi_own) / static_cast<double>(owner_multi) : 0.0;
    detail::normalize(p.own_types);
    detail::normalize(p.other_types);
    // Multiple-time tables fall back to each other, then to Push.
    auto empty = [](const auto& a) { return std::all_of(a.begin(), a.end(), [](double x) { return x == 0; }); };
    if (empty(p.own_types)) p.own_types = p.other_types;
    if (empty(p.other_types)) p.other_types = p.own_types;
    if (empty(p.own_types)) {
      p.own_types[index_of(EventType::Push)] = 1;
      p.other_types[index_of(EventType::Push)] = 1;
    }

    p.watch_rank = detail::fit_rank(slice, EventType::Watch, RankPurpose::Watch, opts);
    if (!p.watch_rank.fitted) p.watch_rank = opts.default_watch;
    p.fork_rank = detail::fit_rank(slice, EventType::Fork, RankPurpose::Fork, opts);
    if (!p.fork_rank.fitted) {
      p.fork_rank = p.watch_rank;
      p.fork_rank.fitted = false;
    }
    p.fork_rank.purpose = RankPurpose::Fork;
    p.pull_request_rank = detail::fit_rank(slice, EventType::PullRequest, RankPurpose::PullRequest, opts);
    if (!p.pull_request_rank.fitted) p.pull_request_rank = opts.default_pull_request;

    m.user_ids_ = slice.user_ids;
    m.activity_ = RankModel(scores);
    m.walk_ = WalkGraph::build(slice);
    m.owned_offsets_.push_back(0);
    for (UserIndex u = 0; u < slice.user_count(); ++u) {
      const auto repos = m.walk_.repos_of(u);
      double acc = 0;
      const std::uint64_t off = m.walk_.user_offsets[u];
      for (std::size_t i = 0; i < repos.size(); ++i) {
        if (slice.repo_owner[repos[i]] != u) continue;
        acc += m.walk_.user_cum[off + i] - (i == 0 ? 0.0 : m.walk_.user_cum[off + i - 1]);
        m.owned_.push_back(repos[i]);
        m.owned_cum_.push_back(acc);
      }
      m.owned_offsets_.push_back(m.owned_.size());
    }
    m.prepare();
    return m;
  }

  const BayesianParams& params() const { return params_; }
  const RankModel& activity() const { return activity_; }
  const WalkGraph& walk_graph() const { return walk_; }
  const std::vector<std::string>& user_ids() const { return user_ids_; }

  // -- AgentModel: one agent per user with a positive activity score plus a
  //    spawner for new users. Rates split the fitted aggregate rate, so the
  //    superposition of agent clocks is a Poisson process at events_per_day.
  std::string_view name() const override { return "bayesian"; }
  std::size_t agent_count() const override { return user_ids_.size() + 1; }
  std::string agent_id(std::size_t a) const override {
    return a < user_ids_.size() ? user_ids_[a] : std::string("new-user-spawner");
  }
  UserIndex agent_user(std::size_t a) const override {
    return a < user_ids_.size() ? static_cast<UserIndex>(a) : kNoIndex;
  }
  double rate_per_day(std::size_t a) const override {
    const double r = params_.events_per_day;
    if (a == user_ids_.size()) return r * params_.p_new;
    if (activity_.empty()) return 0;
    return r * (1 - params_.p_new) * activity_.score(static_cast<std::uint32_t>(a)) / activity_.total();
  }

  Action step(std::size_t a, StepContext& ctx) const override {
    BayesTuple t;
    if (a == user_ids_.size()) {
      t.new_user = ctx.ids.mint_user();
      generate_for(kNoIndex, true, ctx.rng, ctx.hub, ctx.ids, t);
    } else {
      t.user = static_cast<UserIndex>(a);
      generate_for(t.user, false, ctx.rng, ctx.hub, ctx.ids, t);
    }
    return {t.type, t.repo, t.new_repo, t.new_user};
  }

  /// Full pipeline: new-or-existing user, then one-time vs multiple-time,
  /// then repository and event type.
  template <class G>
  BayesTuple generate_tuple(G& rng, const HubView& hub, IdMinter& ids) const {
    BayesTuple t;
    if (uniform01(rng) < params_.p_new || activity_.empty()) {
      t.new_user = ids.mint_user();
      generate_for(kNoIndex, true, rng, hub, ids, t);
    } else {
      t.user = activity_.sample(rng);
      generate_for(t.user, false, rng, hub, ids, t);
    }
    return t;
  }

  template <class Archive>
  void save(Archive& ar) const {
    ar(opts_.half_life_days, opts_.walk_mean, opts_.discovery_retries, params_, user_ids_, activity_, walk_, owned_offsets_,
       owned_, owned_cum_);
  }
  template <class Archive>
  void load(Archive& ar) {
    ar(opts_.half_life_days, opts_.walk_mean, opts_.discovery_retries, params_, user_ids_, activity_, walk_, owned_offsets_,
       owned_, owned_cum_);
    prepare();
  }

 private:
  void prepare() {
    discovery_.assign(params_.discovery_split);
    own_types_.assign(params_.own_types);
    other_types_.assign(params_.other_types);
  }

  bool owns_any(UserIndex u) const { return u != kNoIndex && owned_offsets_[u + 1] > owned_offsets_[u]; }

  template <class G>
  RepoIndex pick_owned(UserIndex u, G& g) const {
    const auto lo = owned_offsets_[u], hi = owned_offsets_[u + 1];
    const double total = owned_cum_[hi - 1];
    if (!(total > 0)) return owned_[lo + uniform_index(g, hi - lo)];
    const double x = uniform01(g) * total;
    auto it = std::upper_bound(owned_cum_.begin() + static_cast<std::ptrdiff_t>(lo),
                               owned_cum_.begin() + static_cast<std::ptrdiff_t>(hi), x);
    return owned_[std::min<std::size_t>(static_cast<std::size_t>(it - owned_cum_.begin()), hi - 1)];
  }

  template <class G>
  void generate_for(UserIndex u, bool force_one_time, G& rng, const HubView& hub, IdMinter& ids, BayesTuple& t) const {
    const auto order = hub.repos_by_popularity();
    const bool one_time = force_one_time || order.empty() || uniform01(rng) < params_.p_one_time;
    if (one_time) {
      t.type = kDiscoveryTypes[discovery_.sample(rng)];
      if (t.type == EventType::Create || order.empty()) {
        t.type = EventType::Create;
        t.new_repo = ids.mint_repo();
        return;
      }
      const auto& rank = t.type == EventType::Watch ? params_.watch_rank : params_.fork_rank;
      RepoIndex r = rank.sample(rng, order);
      for (std::size_t i = 0; i < opts_.discovery_retries && u != kNoIndex && walk_.touched(u, r); ++i)
        r = rank.sample(rng, order);
      t.repo = r;
      return;
    }
    if (owns_any(u) && uniform01(rng) < params_.p_own) {
      t.repo = pick_owned(u, rng);
      t.type = kAllEventTypes[own_types_.sample(rng)];
      return;
    }
    t.type = kAllEventTypes[other_types_.sample(rng)];
    if (u != kNoIndex && u < walk_.user_count() && !walk_.repos_of(u).empty()) {
      t.repo = walk_.walk(u, std::min<std::uint32_t>(geometric(rng, 1.0 / params_.walk_mean), 64), rng);
    } else {
      t.repo = params_.pull_request_rank.sample(rng, order);
    }
  }

  BayesianOptions opts_;
  BayesianParams params_;
  std::vector<std::string> user_ids_;
  RankModel activity_;
  WalkGraph walk_;
  std::vector<std::uint64_t> owned_offsets_;
  std::vector<RepoIndex> owned_;
  std::vector<double> owned_cum_;  // cumulative past activity per owned repo, restarting per user
  DiscreteSampler discovery_, own_types_, other_types_;
};

}  // namespace ghsim
