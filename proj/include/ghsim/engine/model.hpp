#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghsim/core/random.hpp"
#include "ghsim/core/state.hpp"
#include "ghsim/ingest/slice.hpp"

namespace ghsim {

/// Read-only view of hub state. The engine publishes a new view at every tick
/// barrier; models never mutate it.
class HubView {
 public:
  virtual ~HubView() = default;
  virtual std::size_t repo_count() const = 0;
  virtual std::uint64_t watch_count(RepoIndex r) const = 0;
  virtual std::uint64_t fork_count(RepoIndex r) const = 0;
  /// Watches plus forks on repos owned by the user.
  virtual std::uint64_t user_popularity(UserIndex u) const = 0;
  /// Every repo, most popular first.
  virtual std::span<const RepoIndex> repos_by_popularity() const = 0;

  std::uint64_t popularity(RepoIndex r) const { return watch_count(r) + fork_count(r); }
};

/// Hub view with counters held locally; used for frozen states and in tests.
class StaticHubView final : public HubView {
 public:
  StaticHubView() = default;

  explicit StaticHubView(const TrainingSlice& slice) {
    owner_ = slice.repo_owner;
    user_pop_.assign(slice.user_count(), 0);
    for (RepoIndex r = 0; r < slice.repo_count(); ++r) {
      const auto& st = slice.repo_states[r];
      add_repo(st.watch_count, st.fork_count, slice.repo_owner[r]);
    }
  }

  RepoIndex add_repo(std::uint64_t watches = 0, std::uint64_t forks = 0, UserIndex owner = kNoIndex) {
    const auto r = static_cast<RepoIndex>(watch_.size());
    watch_.push_back(watches);
    fork_.push_back(forks);
    if (owner_.size() <= r) owner_.resize(r + 1, kNoIndex);
    owner_[r] = owner;
    order_.add(r, watches + forks);
    credit_owner(r, watches + forks);
    return r;
  }

  void set_owner(RepoIndex r, UserIndex u) {
    credit_owner(r, 0 - popularity(r));
    owner_[r] = u;
    credit_owner(r, popularity(r));
  }

  void add_watch(RepoIndex r, std::uint64_t n = 1) {
    watch_[r] += n;
    order_.increment(r, n);
    credit_owner(r, n);
  }
  void add_fork(RepoIndex r, std::uint64_t n = 1) {
    fork_[r] += n;
    order_.increment(r, n);
    credit_owner(r, n);
  }

  std::size_t repo_count() const override { return watch_.size(); }
  std::uint64_t watch_count(RepoIndex r) const override { return watch_[r]; }
  std::uint64_t fork_count(RepoIndex r) const override { return fork_[r]; }
  std::uint64_t user_popularity(UserIndex u) const override { return u < user_pop_.size() ? user_pop_[u] : 0; }
  std::span<const RepoIndex> repos_by_popularity() const override { return order_.order(); }

 private:
  void credit_owner(RepoIndex r, std::uint64_t delta) {
    const UserIndex u = owner_[r];
    if (u == kNoIndex) return;
    if (user_pop_.size() <= u) user_pop_.resize(u + 1, 0);
    user_pop_[u] += delta;  // unsigned wrap-around makes negative deltas work
  }

  std::vector<std::uint64_t> watch_, fork_, user_pop_;
  std::vector<UserIndex> owner_;
  PopularityOrder order_;
};

/// Partition-prefixed id minting: ids are globally fresh without coordination.
class IdMinter {
 public:
  explicit IdMinter(std::string prefix = "p0") : prefix_(std::move(prefix)) {}

  std::string mint_user() { return "new-user-" + prefix_ + "-" + std::to_string(users_++); }
  std::string mint_repo() { return "new-repo-" + prefix_ + "-" + std::to_string(repos_++); }

 private:
  std::string prefix_;
  std::uint64_t users_ = 0;
  std::uint64_t repos_ = 0;
};

/// One simulated choice. Exactly one of `repo` / `new_repo` identifies the target.
struct Action {
  EventType type = EventType::Push;
  RepoIndex repo = kNoIndex;
  std::string new_repo;  // freshly minted repo (Create)
  std::string new_user;  // set when the event is performed by a freshly minted user

  friend bool operator==(const Action&, const Action&) = default;
};

struct StepContext {
  Rng& rng;
  const HubView& hub;
  Timestamp now;
  IdMinter& ids;
};

/// Uniform interface over all behavioural models. A model is fitted once and is
/// immutable afterwards; `step` only reads the hub view and the caller's RNG.
class AgentModel {
 public:
  virtual ~AgentModel() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t agent_count() const = 0;
  virtual std::string agent_id(std::size_t agent) const = 0;
  /// Index into the training slice's users, or kNoIndex for synthetic agents.
  virtual UserIndex agent_user(std::size_t agent) const = 0;
  virtual double rate_per_day(std::size_t agent) const = 0;
  virtual Action step(std::size_t agent, StepContext& ctx) const = 0;

  /// Pre-timestamped models return their events here and the engine replays
  /// them instead of calling step().
  virtual std::optional<std::vector<Event>> fixed_events(const TimeWindow&) const { return std::nullopt; }
};

}  // namespace ghsim
