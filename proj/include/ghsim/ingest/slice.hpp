#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ghsim/core/event.hpp"
#include "ghsim/core/state.hpp"
#include "ghsim/ingest/io.hpp"

namespace ghsim {

/// Training tables for one window. Users and repos are indexed by their
/// position in the sorted id vectors; every model refers to them that way.
struct TrainingSlice {
  TimeWindow window;
  EventLog events;
  Metadata meta;
  std::vector<std::string> user_ids;   // users with at least one event in window, sorted
  std::vector<std::string> repo_ids;   // repos with at least one event in window, sorted
  std::vector<UserHistory> histories;  // parallel to user_ids
  std::vector<RepoState> repo_states;  // parallel to repo_ids
  std::vector<UserIndex> repo_owner;   // owner's index in user_ids, or kNoIndex if inactive
  std::unordered_map<std::string, UserIndex> user_lookup;
  std::unordered_map<std::string, RepoIndex> repo_lookup;

  std::optional<UserIndex> find_user(const std::string& id) const {
    auto it = user_lookup.find(id);
    return it == user_lookup.end() ? std::nullopt : std::optional<UserIndex>(it->second);
  }
  std::optional<RepoIndex> find_repo(const std::string& id) const {
    auto it = repo_lookup.find(id);
    return it == repo_lookup.end() ? std::nullopt : std::optional<RepoIndex>(it->second);
  }

  UserIndex user_index(const std::string& id) const {
    auto u = find_user(id);
    if (!u) fail(ErrorCode::UnknownUser, "'" + id + "' has no events in the training window");
    return *u;
  }

  const UserHistory& history(const std::string& id) const { return histories[user_index(id)]; }

  std::size_t user_count() const { return user_ids.size(); }
  std::size_t repo_count() const { return repo_ids.size(); }
};

/// Builds per-user histories and per-repo state for the events of `log` inside
/// `window`. Ownership comes from metadata when present, else from the earliest
/// Create event on the repo (before window end), else its earliest event.
inline TrainingSlice build_slice(const EventLog& log, TimeWindow window, const Metadata& meta = {}) {
  if (window.empty()) fail(ErrorCode::EmptyWindow, "training window is empty");
  TrainingSlice slice;
  slice.window = window;
  slice.events = log.restrict(window);
  slice.meta = meta;
  if (slice.events.empty()) fail(ErrorCode::EmptyWindow, "no events inside " + format_window(window));

  {
    std::vector<std::string> users, repos;
    users.reserve(slice.events.size());
    repos.reserve(slice.events.size());
    for (const auto& e : slice.events) {
      users.push_back(e.user);
      repos.push_back(e.repo);
    }
    auto uniq = [](std::vector<std::string>& v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(users);
    uniq(repos);
    slice.user_ids = std::move(users);
    slice.repo_ids = std::move(repos);
  }
  for (UserIndex i = 0; i < slice.user_ids.size(); ++i) slice.user_lookup.emplace(slice.user_ids[i], i);
  for (RepoIndex i = 0; i < slice.repo_ids.size(); ++i) slice.repo_lookup.emplace(slice.repo_ids[i], i);

  // Ownership inference looks at the whole log up to window end.
  std::vector<const Event*> first_create(slice.repo_ids.size(), nullptr);
  std::vector<const Event*> first_any(slice.repo_ids.size(), nullptr);
  for (const auto& e : log) {
    if (e.time >= window.end) break;
    auto it = slice.repo_lookup.find(e.repo);
    if (it == slice.repo_lookup.end()) continue;
    if (!first_any[it->second]) first_any[it->second] = &e;
    if (e.type == EventType::Create && !first_create[it->second]) first_create[it->second] = &e;
  }

  slice.repo_states.resize(slice.repo_ids.size());
  slice.repo_owner.assign(slice.repo_ids.size(), kNoIndex);
  for (RepoIndex r = 0; r < slice.repo_ids.size(); ++r) {
    auto& st = slice.repo_states[r];
    st.repo_id = slice.repo_ids[r];
    if (const RepoMeta* m = meta.repo(st.repo_id)) {
      st.owner_id = m->owner_id;
      st.created_at = m->created_at;
      st.language = m->language;
    }
    if (st.owner_id.empty()) st.owner_id = first_create[r] ? first_create[r]->user : first_any[r]->user;
    if (!st.created_at && first_create[r]) st.created_at = first_create[r]->time;
    if (auto o = slice.find_user(st.owner_id)) slice.repo_owner[r] = *o;
  }

  // Histories and popularity counters.
  std::vector<std::map<std::pair<EventType, RepoIndex>, std::uint32_t>> counts(slice.user_ids.size());
  std::unordered_set<std::uint64_t> seen_one_time;
  for (const auto& e : slice.events) {
    const UserIndex u = slice.user_lookup.at(e.user);
    const RepoIndex r = slice.repo_lookup.at(e.repo);
    ++counts[u][{e.type, r}];
    auto& st = slice.repo_states[r];
    if (e.type == EventType::Watch || e.type == EventType::Fork) {
      const std::uint64_t key = (static_cast<std::uint64_t>(u) << 33) | (static_cast<std::uint64_t>(r) << 1) |
                                (e.type == EventType::Fork ? 1u : 0u);
      if (seen_one_time.insert(key).second) ++(e.type == EventType::Watch ? st.watch_count : st.fork_count);
    }
    if (is_contribution(e.type)) st.contributors.insert(e.user);
  }

  slice.histories.resize(slice.user_ids.size());
  const double days = window.days();
  for (UserIndex u = 0; u < slice.user_ids.size(); ++u) {
    auto& h = slice.histories[u];
    h.user_id = slice.user_ids[u];
    h.window = window;
    h.created_at = meta.user_created_at(h.user_id);
    h.counts.reserve(counts[u].size());
    for (const auto& [key, n] : counts[u]) h.counts.push_back({key.first, key.second, n});
    h.rate = static_cast<double>(h.total()) / days;
  }
  return slice;
}

}  // namespace ghsim
