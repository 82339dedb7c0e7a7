#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include <cereal/types/array.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>

#include "ghsim/core/event.hpp"
#include "ghsim/ingest/slice.hpp"

namespace ghsim {

/// Row-major feature matrix with named columns.
struct FeatureTable {
  std::vector<std::string> names;
  std::vector<double> values;  // rows() x cols()

  std::size_t cols() const { return names.size(); }
  std::size_t rows() const { return cols() ? values.size() / cols() : 0; }
  double at(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }
  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    fail(ErrorCode::InvalidArgument, "no feature named '" + std::string(name) + "'");
  }
};

/// Column names, in table order. "Follower" counts are distinct users who
/// watched or forked any repo the user owns (there is no follow event).
inline std::vector<std::string> feature_names() {
  std::vector<std::string> n = {"user_is_owner", "same_language", "language_known",
                                "user_age_days", "user_age_known", "n_repos_owned_by_user", "n_followers",
                                "user_total_events", "user_distinct_repos"};
  for (auto t : kAllEventTypes) n.push_back("user_" + std::string(to_string(t)));
  for (const char* s : {"repo_age_days", "repo_age_known", "n_watchers_of_repo", "n_forks_of_repo", "repo_contributors",
                        "repo_total_events", "repo_distinct_users"})
    n.emplace_back(s);
  for (auto t : kAllEventTypes) n.push_back("repo_" + std::string(to_string(t)));
  return n;
}

/// Per-user and per-repo statistics of one training slice, precomputed so
/// pair features are a cheap concatenation.
class FeatureContext {
 public:
  FeatureContext() = default;

  explicit FeatureContext(const TrainingSlice& slice) {
    window_end_ = slice.window.end;
    user_ids_ = slice.user_ids;
    repo_ids_ = slice.repo_ids;
    const std::size_t nu = slice.user_count(), nr = slice.repo_count();
    user_.assign(nu, {});
    repo_.assign(nr, {});
    repo_owner_ = slice.repo_owner;
    repo_language_.assign(nr, "");
    user_language_.assign(nu, "");

    std::vector<std::unordered_set<UserIndex>> followers(nu);
    std::vector<std::uint32_t> repo_users(nr, 0);
    std::vector<std::map<std::string, std::uint64_t>> lang_use(nu);
    for (RepoIndex r = 0; r < nr; ++r) {
      const auto& st = slice.repo_states[r];
      auto& f = repo_[r];
      if (st.created_at) {
        f.age_days = static_cast<double>(window_end_ - *st.created_at) / kSecondsPerDay;
        f.age_known = 1;
      }
      f.watchers = static_cast<double>(st.watch_count);
      f.forks = static_cast<double>(st.fork_count);
      f.contributors = static_cast<double>(st.contributors.size());
      if (st.language) repo_language_[r] = *st.language;
      if (slice.repo_owner[r] != kNoIndex) user_[slice.repo_owner[r]].repos_owned += 1;
    }
    for (UserIndex u = 0; u < nu; ++u) {
      const auto& h = slice.histories[u];
      auto& f = user_[u];
      if (h.created_at) {
        f.age_days = static_cast<double>(window_end_ - *h.created_at) / kSecondsPerDay;
        f.age_known = 1;
      }
      std::vector<RepoIndex> repos;
      for (const auto& e : h.counts) {
        f.by_type[index_of(e.type)] += e.count;
        f.total += e.count;
        repos.push_back(e.repo);
        auto& rf = repo_[e.repo];
        rf.by_type[index_of(e.type)] += e.count;
        rf.total += e.count;
        if ((e.type == EventType::Watch || e.type == EventType::Fork) && slice.repo_owner[e.repo] != kNoIndex &&
            slice.repo_owner[e.repo] != u)
          followers[slice.repo_owner[e.repo]].insert(u);
        if (!repo_language_[e.repo].empty()) lang_use[u][repo_language_[e.repo]] += e.count;
      }
      std::sort(repos.begin(), repos.end());
      repos.erase(std::unique(repos.begin(), repos.end()), repos.end());
      f.distinct = static_cast<double>(repos.size());
      for (auto r : repos) ++repo_users[r];
    }
    for (UserIndex u = 0; u < nu; ++u) {
      user_[u].followers = static_cast<double>(followers[u].size());
      // Most used language; ties go to the alphabetically first.
      std::uint64_t best = 0;
      for (const auto& [lang, n] : lang_use[u])
        if (n > best) {
          best = n;
          user_language_[u] = lang;
        }
    }
    for (RepoIndex r = 0; r < nr; ++r) repo_[r].distinct = repo_users[r];
  }

  std::size_t user_count() const { return user_.size(); }
  std::size_t repo_count() const { return repo_.size(); }
  const std::string& user_language(UserIndex u) const { return user_language_[u]; }

  /// Appends one feature row. Indices outside the slice (new entities) read as
  /// zero activity with unknown ages.
  void append(UserIndex u, RepoIndex r, std::vector<double>& out) const {
    static const UserStats kNoUser{};
    static const RepoStats kNoRepo{};
    const bool has_u = u < user_.size(), has_r = r < repo_.size();
    const auto& uf = has_u ? user_[u] : kNoUser;
    const auto& rf = has_r ? repo_[r] : kNoRepo;
    const bool owner = has_u && has_r && repo_owner_[r] == u;
    const bool known = has_u && has_r && !user_language_[u].empty() && !repo_language_[r].empty();
    out.push_back(owner ? 1 : 0);
    out.push_back(known && user_language_[u] == repo_language_[r] ? 1 : 0);
    out.push_back(known ? 1 : 0);
    out.insert(out.end(), {uf.age_days, uf.age_known, uf.repos_owned, uf.followers, uf.total, uf.distinct});
    out.insert(out.end(), uf.by_type.begin(), uf.by_type.end());
    out.insert(out.end(), {rf.age_days, rf.age_known, rf.watchers, rf.forks, rf.contributors, rf.total, rf.distinct});
    out.insert(out.end(), rf.by_type.begin(), rf.by_type.end());
  }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(window_end_, user_ids_, repo_ids_, user_, repo_, repo_owner_, user_language_, repo_language_);
  }

 private:
  struct UserStats {
    double age_days = 0, age_known = 0, repos_owned = 0, followers = 0, total = 0, distinct = 0;
    std::array<double, kEventTypeCount> by_type{};
    template <class Archive>
    void serialize(Archive& ar) {
      ar(age_days, age_known, repos_owned, followers, total, distinct, by_type);
    }
  };
  struct RepoStats {
    double age_days = 0, age_known = 0, watchers = 0, forks = 0, contributors = 0, total = 0, distinct = 0;
    std::array<double, kEventTypeCount> by_type{};
    template <class Archive>
    void serialize(Archive& ar) {
      ar(age_days, age_known, watchers, forks, contributors, total, distinct, by_type);
    }
  };

  Timestamp window_end_ = 0;
  std::vector<std::string> user_ids_, repo_ids_;
  std::vector<UserStats> user_;
  std::vector<RepoStats> repo_;
  std::vector<UserIndex> repo_owner_;
  std::vector<std::string> user_language_, repo_language_;
};

/// Feature table for (user_id, repo_id) pairs of `slice`. Ids missing from the
/// slice read as entities without activity.
inline FeatureTable extract_features(const TrainingSlice& slice, const std::vector<std::pair<std::string, std::string>>& pairs) {
  const FeatureContext ctx(slice);
  FeatureTable t;
  t.names = feature_names();
  t.values.reserve(pairs.size() * t.names.size());
  for (const auto& [u, r] : pairs) {
    const auto ui = slice.find_user(u);
    const auto ri = slice.find_repo(r);
    ctx.append(ui ? *ui : kNoIndex, ri ? *ri : kNoIndex, t.values);
  }
  return t;
}

}  // namespace ghsim
