#pragma once

#include <algorithm>
#include <exception>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ghsim/core/event.hpp"
#include "ghsim/core/hash.hpp"
#include "ghsim/core/state.hpp"
#include "ghsim/engine/model.hpp"
#include "ghsim/engine/partition.hpp"
#include "ghsim/engine/schedule.hpp"
#include "ghsim/ingest/slice.hpp"

namespace ghsim {

struct RunStats {
  std::uint64_t ticks = 0;
  std::uint64_t events = 0;
  std::uint64_t cross_partition_messages = 0;
  std::uint64_t migrations = 0;
  std::uint64_t redraws = 0;
  std::uint64_t duplicate_one_time = 0;
  std::uint64_t new_users = 0;
  std::uint64_t new_repos = 0;
  double partition_cut = 0;
};

struct RunResult {
  EventLog log;
  RunStats stats;
  std::vector<RepoState> repos;  // final hub state, sorted by repo id
};

namespace detail {

struct HubRepo {
  UserIndex owner = kNoIndex;
  std::uint64_t watch = 0;
  std::uint64_t fork = 0;
  std::vector<UserIndex> contributors;  // sorted
  std::optional<Timestamp> created_at;
  std::optional<std::string> language;
};

// Global id tables and published counters. Written only at barriers.
struct Directory {
  std::vector<std::string> repo_ids;
  std::unordered_map<std::string, RepoIndex> repo_lookup;
  std::vector<std::string> user_ids;
  std::unordered_map<std::string, UserIndex> user_lookup;
  std::vector<std::uint32_t> repo_partition;
  std::vector<UserIndex> repo_owner;
  std::vector<std::uint64_t> watch, fork, user_pop;
  PopularityOrder order;

  UserIndex user(const std::string& id) {
    auto [it, inserted] = user_lookup.try_emplace(id, static_cast<UserIndex>(user_ids.size()));
    if (inserted) {
      user_ids.push_back(id);
      user_pop.push_back(0);
    }
    return it->second;
  }

  RepoIndex add_repo(const std::string& id, UserIndex owner, std::uint32_t partition, std::uint64_t w = 0,
                     std::uint64_t f = 0) {
    const auto r = static_cast<RepoIndex>(repo_ids.size());
    repo_ids.push_back(id);
    repo_lookup.emplace(id, r);
    repo_partition.push_back(partition);
    repo_owner.push_back(owner);
    watch.push_back(w);
    fork.push_back(f);
    order.add(r, w + f);
    if (owner != kNoIndex) user_pop[owner] += w + f;
    return r;
  }
};

class DirectoryView final : public HubView {
 public:
  explicit DirectoryView(const Directory& d) : d_(d) {}
  std::size_t repo_count() const override { return d_.repo_ids.size(); }
  std::uint64_t watch_count(RepoIndex r) const override { return d_.watch[r]; }
  std::uint64_t fork_count(RepoIndex r) const override { return d_.fork[r]; }
  std::uint64_t user_popularity(UserIndex u) const override { return u < d_.user_pop.size() ? d_.user_pop[u] : 0; }
  std::span<const RepoIndex> repos_by_popularity() const override { return d_.order.order(); }

 private:
  const Directory& d_;
};

struct AgentState {
  std::size_t agent = 0;  // model agent index
  std::string id;
  UserIndex user = kNoIndex;
  std::optional<PoissonClock> clock;
  Rng step_rng{0};
  std::vector<std::uint64_t> one_time;  // sorted (type, repo) keys already used
  std::vector<Event> fixed;             // replayed events for pre-timestamped models
  std::size_t fixed_pos = 0;
  Timestamp next = 0;

  static std::uint64_t key(EventType t, RepoIndex r) {
    return (static_cast<std::uint64_t>(index_of(t)) << 32) | r;
  }
  // Replayed events may name repos the directory has not seen yet.
  static std::uint64_t key(EventType t, const std::string& repo) {
    return mix64(fnv1a64(repo) + index_of(t));
  }
  bool used(std::uint64_t k) const { return std::binary_search(one_time.begin(), one_time.end(), k); }
  void mark(std::uint64_t k) {
    auto it = std::lower_bound(one_time.begin(), one_time.end(), k);
    if (it == one_time.end() || *it != k) one_time.insert(it, k);
  }
};

struct Effect {
  Timestamp time;
  std::string user;
  std::string repo;
  EventType type;
  RepoIndex repo_index;  // kNoIndex: not yet in the directory
  bool counted;          // first Watch/Fork of this (user, repo)
  std::uint32_t partition;
};

struct MigrationRequest {
  Timestamp time;
  std::string user;
  RepoIndex repo;
  std::uint32_t partition;
};

struct Due {
  Timestamp time;
  const std::string* id;
  std::uint32_t agent;
  bool operator>(const Due& o) const {
    if (time != o.time) return time > o.time;
    if (*id != *o.id) return *id > *o.id;
    return agent > o.agent;
  }
};

class Worker {
 public:
  Worker(std::uint32_t id, const AgentModel* model, std::uint32_t redraws)
      : id_(id), model_(model), redraws_(redraws), minter_("p" + std::to_string(id)) {}

  std::uint32_t id() const { return id_; }
  std::vector<AgentState>& agents() { return agents_; }
  std::unordered_map<RepoIndex, HubRepo>& owned() { return owned_; }
  std::unordered_set<RepoIndex>& touched() { return touched_; }
  std::vector<Effect>& effects() { return effects_; }
  std::vector<MigrationRequest>& migrations() { return migrations_; }
  std::vector<Event>& emitted() { return emitted_; }
  std::uint64_t messages() const { return messages_; }
  std::uint64_t redraw_count() const { return redraw_count_; }
  std::uint64_t duplicates() const { return duplicates_; }

  void start() {
    for (std::uint32_t i = 0; i < agents_.size(); ++i) advance(i, true);
  }

  void tick(Timestamp end, const Directory& dir) {
    const DirectoryView view(dir);
    while (!due_.empty() && due_.top().time < end) {
      const Due d = due_.top();
      due_.pop();
      AgentState& a = agents_[d.agent];
      if (a.clock) {
        act(a, d.time, dir, view);
      } else {
        replay(a, dir);
      }
      advance(d.agent, false);
    }
  }

 private:
  void advance(std::uint32_t i, bool first) {
    AgentState& a = agents_[i];
    if (a.clock) {
      if (!a.clock->next(a.next)) return;
    } else {
      if (!first) ++a.fixed_pos;
      if (a.fixed_pos >= a.fixed.size()) return;
      a.next = a.fixed[a.fixed_pos].time;
    }
    due_.push({a.next, &a.id, i});
  }

  bool duplicate(const AgentState& a, const Action& act) const {
    return is_one_time(act.type) && act.new_user.empty() && act.new_repo.empty() && act.repo != kNoIndex &&
           a.used(AgentState::key(act.type, act.repo));
  }

  Action step(AgentState& a, Timestamp now, const HubView& view) {
    StepContext ctx{a.step_rng, view, now, minter_};
    try {
      return model_->step(a.agent, ctx);
    } catch (const std::exception& e) {
      fail(ErrorCode::ModelStep, a.id + ": " + e.what());
    }
  }

  void act(AgentState& a, Timestamp now, const Directory& dir, const HubView& view) {
    Action act = step(a, now, view);
    bool dup = duplicate(a, act);
    for (std::uint32_t r = 0; dup && r < redraws_; ++r) {
      ++redraw_count_;
      act = step(a, now, view);
      dup = duplicate(a, act);
    }
    if (dup) ++duplicates_;
    if (act.new_repo.empty() && act.repo >= dir.repo_ids.size())
      fail(ErrorCode::ModelStep, a.id + ": action targets unknown repo index " + std::to_string(act.repo));
    if (!dup && act.new_user.empty() && act.new_repo.empty() && is_one_time(act.type)) a.mark(AgentState::key(act.type, act.repo));

    Event e{now, act.type, act.new_user.empty() ? a.id : act.new_user,
            act.new_repo.empty() ? dir.repo_ids[act.repo] : act.new_repo};
    const bool counted = !dup && (act.type == EventType::Watch || act.type == EventType::Fork);
    emit(std::move(e), act.new_repo.empty() ? act.repo : kNoIndex, counted, dir);
  }

  void replay(AgentState& a, const Directory& dir) {
    const Event& e = a.fixed[a.fixed_pos];
    RepoIndex r = kNoIndex;
    if (auto it = dir.repo_lookup.find(e.repo); it != dir.repo_lookup.end()) r = it->second;
    bool counted = false;
    if (e.type == EventType::Watch || e.type == EventType::Fork) {
      const auto key = AgentState::key(e.type, e.repo);
      counted = !a.used(key);
      if (counted) {
        a.mark(key);
      } else {
        ++duplicates_;
      }
    }
    emit(e, r, counted, dir);
  }

  void emit(Event e, RepoIndex r, bool counted, const Directory& dir) {
    if (r != kNoIndex) {
      if (dir.repo_partition[r] != id_) {
        ++messages_;
        if (touched_.insert(r).second) migrations_.push_back({e.time, e.user, r, id_});
      }
    }
    effects_.push_back({e.time, e.user, e.repo, e.type, r, counted, id_});
    emitted_.push_back(std::move(e));
  }

  std::uint32_t id_;
  const AgentModel* model_;
  std::uint32_t redraws_;
  IdMinter minter_;
  std::vector<AgentState> agents_;
  std::priority_queue<Due, std::vector<Due>, std::greater<>> due_;
  std::unordered_map<RepoIndex, HubRepo> owned_;
  std::unordered_set<RepoIndex> touched_;
  std::vector<Effect> effects_;
  std::vector<MigrationRequest> migrations_;
  std::vector<Event> emitted_;
  std::uint64_t messages_ = 0;
  std::uint64_t redraw_count_ = 0;
  std::uint64_t duplicates_ = 0;
};

inline void insert_sorted(std::vector<UserIndex>& v, UserIndex u) {
  auto it = std::lower_bound(v.begin(), v.end(), u);
  if (it == v.end() || *it != u) v.insert(it, u);
}

}  // namespace detail

/// Partitioned simulation of `model` over cfg.window, starting from the hub
/// state of `slice`. Deterministic for a fixed (seed, partitions) pair.
inline RunResult run(const SimulationConfig& cfg, const TrainingSlice& slice, const AgentModel& model) {
  using namespace detail;
  cfg.validate();
  const std::uint32_t P = cfg.partitions;
  RunResult result;

  // Vertex -> partition from the training interaction graph.
  std::vector<std::uint32_t> vertex_part;
  if (P > 1 && slice.user_count() + slice.repo_count() > 0) {
    const auto graph = interaction_graph(slice);
    PartitionOptions popts;
    popts.seed = cfg.seed;
    auto part = partition_graph(graph, P, popts);
    result.stats.partition_cut = part.cut;
    vertex_part = std::move(part.part);
  }
  const auto U = static_cast<std::uint32_t>(slice.user_count());
  auto user_partition = [&](UserIndex u, const std::string& id) -> std::uint32_t {
    if (P == 1) return 0;
    if (u != kNoIndex && u < U) return vertex_part[u];
    return static_cast<std::uint32_t>(fnv1a64(id) % P);
  };

  Directory dir;
  dir.user_ids.reserve(slice.user_count());
  for (const auto& id : slice.user_ids) dir.user(id);
  std::vector<Worker> workers;
  workers.reserve(P);
  for (std::uint32_t p = 0; p < P; ++p) workers.emplace_back(p, &model, cfg.one_time_redraws);

  for (RepoIndex r = 0; r < slice.repo_count(); ++r) {
    const auto& st = slice.repo_states[r];
    const UserIndex owner = dir.user(st.owner_id);
    const std::uint32_t p = P == 1 ? 0 : vertex_part[U + r];
    dir.add_repo(st.repo_id, owner, p, st.watch_count, st.fork_count);
    HubRepo h;
    h.owner = owner;
    h.watch = st.watch_count;
    h.fork = st.fork_count;
    h.created_at = st.created_at;
    h.language = st.language;
    for (const auto& c : st.contributors) h.contributors.push_back(dir.user(c));
    std::sort(h.contributors.begin(), h.contributors.end());
    workers[p].owned().emplace(r, std::move(h));
    workers[p].touched().insert(r);
  }

  auto seed_one_time = [&](AgentState& a) {
    if (a.user == kNoIndex) return;
    for (const auto& h : slice.histories[a.user].counts) {
      if (!is_one_time(h.type)) continue;
      a.mark(a.clock ? AgentState::key(h.type, h.repo) : AgentState::key(h.type, slice.repo_ids[h.repo]));
    }
  };

  if (auto fixed = model.fixed_events(cfg.window)) {
    std::map<std::string, std::vector<Event>> by_user;
    for (auto& e : *fixed)
      if (cfg.window.contains(e.time)) by_user[e.user].push_back(std::move(e));
    for (auto& [id, events] : by_user) {
      std::sort(events.begin(), events.end(), event_less);
      AgentState a;
      a.id = id;
      if (auto u = slice.find_user(id)) a.user = *u;
      a.fixed = std::move(events);
      seed_one_time(a);
      workers[user_partition(a.user, id)].agents().push_back(std::move(a));
    }
  } else {
    for (std::size_t i = 0; i < model.agent_count(); ++i) {
      AgentState a;
      a.agent = i;
      a.id = model.agent_id(i);
      a.user = model.agent_user(i);
      a.clock.emplace(derive_seed(cfg.seed, a.id, kClockStream), model.rate_per_day(i), cfg.window);
      a.step_rng = Rng(derive_seed(cfg.seed, a.id, kStepStream));
      seed_one_time(a);
      workers[user_partition(a.user, a.id)].agents().push_back(std::move(a));
    }
  }
  for (auto& w : workers) w.start();

  std::vector<Event> output;
  std::vector<Effect> effects;
  std::vector<MigrationRequest> migrations;
  std::vector<std::exception_ptr> errors(P);
  const std::uint32_t threads = std::max<std::uint32_t>(1, std::min(cfg.threads, P));

  for (Timestamp t0 = cfg.window.start; t0 < cfg.window.end; t0 += cfg.tick_seconds) {
    const Timestamp t1 = std::min(cfg.window.end, t0 + cfg.tick_seconds);
    ++result.stats.ticks;

    auto work = [&](std::uint32_t first) {
      for (std::uint32_t p = first; p < P; p += threads) {
        try {
          workers[p].tick(t1, dir);
        } catch (...) {
          errors[p] = std::current_exception();
        }
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (std::uint32_t i = 0; i < threads; ++i) pool.emplace_back(work, i);
      for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);

    // Barrier: apply effects in a canonical order, then migrate ownership.
    effects.clear();
    migrations.clear();
    for (auto& w : workers) {
      std::move(w.effects().begin(), w.effects().end(), std::back_inserter(effects));
      std::move(w.migrations().begin(), w.migrations().end(), std::back_inserter(migrations));
      std::move(w.emitted().begin(), w.emitted().end(), std::back_inserter(output));
      w.effects().clear();
      w.migrations().clear();
      w.emitted().clear();
    }
    std::sort(effects.begin(), effects.end(), [](const Effect& a, const Effect& b) {
      return std::tie(a.time, a.user, a.repo, a.type, a.partition) < std::tie(b.time, b.user, b.repo, b.type, b.partition);
    });
    for (const auto& e : effects) {
      const std::size_t users_before = dir.user_ids.size();
      const UserIndex u = dir.user(e.user);
      if (dir.user_ids.size() > users_before) ++result.stats.new_users;
      RepoIndex r = e.repo_index;
      if (r == kNoIndex) {
        if (auto it = dir.repo_lookup.find(e.repo); it != dir.repo_lookup.end()) {
          r = it->second;
        } else {
          r = dir.add_repo(e.repo, u, e.partition);
          HubRepo h;
          h.owner = u;
          if (e.type == EventType::Create) h.created_at = e.time;
          workers[e.partition].owned().emplace(r, std::move(h));
          workers[e.partition].touched().insert(r);
          ++result.stats.new_repos;
        }
      }
      HubRepo& h = workers[dir.repo_partition[r]].owned().at(r);
      if (e.counted) {
        if (e.type == EventType::Watch) {
          ++h.watch;
          ++dir.watch[r];
        } else {
          ++h.fork;
          ++dir.fork[r];
        }
        dir.order.increment(r);
        if (dir.repo_owner[r] != kNoIndex) ++dir.user_pop[dir.repo_owner[r]];
      }
      if (is_contribution(e.type)) insert_sorted(h.contributors, u);
    }
    std::sort(migrations.begin(), migrations.end(), [](const MigrationRequest& a, const MigrationRequest& b) {
      return std::tie(a.time, a.user, a.repo, a.partition) < std::tie(b.time, b.user, b.repo, b.partition);
    });
    for (const auto& m : migrations) {
      const std::uint32_t from = dir.repo_partition[m.repo];
      if (from == m.partition) continue;
      auto node = workers[from].owned().extract(m.repo);
      workers[m.partition].owned().insert(std::move(node));
      dir.repo_partition[m.repo] = m.partition;
      ++result.stats.migrations;
    }

    if (cfg.verify_invariants) {
      std::size_t total = 0;
      for (auto& w : workers) {
        total += w.owned().size();
        for (const auto& [r, h] : w.owned())
          if (dir.repo_partition[r] != w.id()) fail(ErrorCode::InvalidArgument, "repo ownership directory out of sync");
      }
      if (total != dir.repo_ids.size()) fail(ErrorCode::InvalidArgument, "repo ownership is not unique");
    }
  }

  for (auto& w : workers) {
    result.stats.cross_partition_messages += w.messages();
    result.stats.redraws += w.redraw_count();
    result.stats.duplicate_one_time += w.duplicates();
    for (auto& [r, h] : w.owned()) {
      RepoState st;
      st.repo_id = dir.repo_ids[r];
      st.owner_id = h.owner == kNoIndex ? std::string() : dir.user_ids[h.owner];
      st.created_at = h.created_at;
      st.language = h.language;
      st.watch_count = h.watch;
      st.fork_count = h.fork;
      for (auto c : h.contributors) st.contributors.insert(dir.user_ids[c]);
      result.repos.push_back(std::move(st));
    }
  }
  std::sort(result.repos.begin(), result.repos.end(),
            [](const RepoState& a, const RepoState& b) { return a.repo_id < b.repo_id; });
  result.stats.events = output.size();
  result.log = EventLog(std::move(output));
  return result;
}

}  // namespace ghsim
