#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ghsim/core/error.hpp"
#include "ghsim/core/event.hpp"
#include "ghsim/core/time.hpp"

namespace ghsim {

inline constexpr std::size_t kPopularityTop = 500;
inline constexpr double kDefaultPersistence = 0.98;

/// Truncated rank-biased overlap (the RBO_min lower bound):
/// (1 - p) * sum_{d=1..depth} p^(d-1) * |s[:d] & t[:d]| / d.
inline double rbo(const std::vector<std::string>& s, const std::vector<std::string>& t, double p,
                  std::size_t depth = kPopularityTop) {
  if (!(p > 0 && p < 1)) fail(ErrorCode::BadPersistence, "RBO persistence must lie in (0, 1)");
  std::unordered_set<std::string_view> in_s, in_t;
  std::size_t overlap = 0;
  double weight = 1, sum = 0;
  for (std::size_t d = 1; d <= depth; ++d, weight *= p) {
    if (d <= s.size()) {
      const std::string_view x = s[d - 1];
      if (!in_s.insert(x).second) fail(ErrorCode::InvalidArgument, "ranked list has a duplicate: " + s[d - 1]);
      overlap += in_t.count(x);
    }
    if (d <= t.size()) {
      const std::string_view y = t[d - 1];
      if (!in_t.insert(y).second) fail(ErrorCode::InvalidArgument, "ranked list has a duplicate: " + t[d - 1]);
      overlap += in_s.count(y);
    }
    if (d > s.size() && d > t.size() && overlap == 0) break;
    sum += weight * static_cast<double>(overlap) / static_cast<double>(d);
  }
  return (1 - p) * sum;
}

namespace detail {

inline std::vector<std::string> top_by_score(const std::unordered_map<std::string, std::uint64_t>& score, std::size_t n) {
  std::vector<std::pair<std::uint64_t, const std::string*>> v;
  v.reserve(score.size());
  for (const auto& [id, s] : score)
    if (s > 0) v.emplace_back(s, &id);
  const std::size_t k = std::min(n, v.size());
  auto better = [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && *a.second < *b.second); };
  std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(), better);
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(*v[i].second);
  return out;
}

inline bool is_popularity_event(EventType t) { return t == EventType::Watch || t == EventType::Fork; }

}  // namespace detail

/// Repos ranked by watches plus forks received, ties by id. Repos in
/// `exclude` are skipped.
inline std::vector<std::string> repo_popularity_rank(const EventLog& log, std::size_t top = kPopularityTop,
                                                     const std::unordered_set<std::string>& exclude = {}) {
  std::unordered_map<std::string, std::uint64_t> score;
  for (const auto& e : log)
    if (detail::is_popularity_event(e.type) && !exclude.count(e.repo)) ++score[e.repo];
  return detail::top_by_score(score, top);
}

/// Users ranked by watches plus forks on the repos they own. Repos without a
/// known owner do not count.
inline std::vector<std::string> user_popularity_rank(const EventLog& log,
                                                     const std::unordered_map<std::string, std::string>& owner,
                                                     std::size_t top = kPopularityTop,
                                                     const std::unordered_set<std::string>& exclude = {}) {
  std::unordered_map<std::string, std::uint64_t> score;
  for (const auto& e : log) {
    if (!detail::is_popularity_event(e.type)) continue;
    auto it = owner.find(e.repo);
    if (it == owner.end() || exclude.count(it->second)) continue;
    ++score[it->second];
  }
  return detail::top_by_score(score, top);
}

/// R^2 of per-repo Issues counts over repos seen in either log, against the
/// truth mean.
inline double issue_count_r2(const EventLog& sim, const EventLog& truth) {
  std::unordered_map<std::string, std::pair<double, double>> counts;  // repo -> (sim, truth)
  for (const auto& e : sim) {
    auto& c = counts[e.repo];
    if (e.type == EventType::Issues) c.first += 1;
  }
  for (const auto& e : truth) {
    auto& c = counts[e.repo];
    if (e.type == EventType::Issues) c.second += 1;
  }
  if (counts.empty()) fail(ErrorCode::DegenerateTruth, "no repos in either log");
  double mean = 0;
  for (const auto& [r, c] : counts) mean += c.second;
  mean /= static_cast<double>(counts.size());
  double res = 0, tot = 0;
  for (const auto& [r, c] : counts) {
    res += (c.first - c.second) * (c.first - c.second);
    tot += (c.second - mean) * (c.second - mean);
  }
  if (tot == 0) fail(ErrorCode::DegenerateTruth, "truth Issues counts are all equal");
  return 1 - res / tot;
}

inline bool is_contributing(EventType t) { return t == EventType::Push || t == EventType::PullRequest; }

/// Distinct contributing users per day of `window` for every repo with any
/// contribution in `log`.
inline std::unordered_map<std::string, std::vector<double>> daily_contributors(const EventLog& log, const TimeWindow& window) {
  const auto days = static_cast<std::size_t>((window.end - window.start + kSecondsPerDay - 1) / kSecondsPerDay);
  std::unordered_map<std::string, std::unordered_set<std::string>> seen;  // repo -> "day|user"
  std::unordered_map<std::string, std::vector<double>> out;
  for (const auto& e : log) {
    if (!is_contributing(e.type) || !window.contains(e.time)) continue;
    const auto day = static_cast<std::size_t>((e.time - window.start) / kSecondsPerDay);
    if (!seen[e.repo].insert(std::to_string(day) + '|' + e.user).second) continue;
    auto& series = out[e.repo];
    series.resize(days, 0.0);
    series[day] += 1;
  }
  return out;
}

inline double series_rmse(const std::vector<double>& a, const std::vector<double>& b, std::size_t days) {
  if (days == 0) return 0;
  double se = 0;
  for (std::size_t d = 0; d < days; ++d) {
    const double x = d < a.size() ? a[d] : 0, y = d < b.size() ? b[d] : 0;
    se += (x - y) * (x - y);
  }
  return std::sqrt(se / static_cast<double>(days));
}

/// RMSE between the daily unique-contributor series of one repo.
inline double contributors_rmse(const EventLog& sim, const EventLog& truth, const std::string& repo, const TimeWindow& window) {
  const auto days = static_cast<std::size_t>((window.end - window.start + kSecondsPerDay - 1) / kSecondsPerDay);
  auto restrict_repo = [&](const EventLog& log) {
    std::vector<Event> ev;
    for (const auto& e : log)
      if (e.repo == repo) ev.push_back(e);
    return daily_contributors(EventLog(std::move(ev)), window);
  };
  const auto s = restrict_repo(sim), t = restrict_repo(truth);
  static const std::vector<double> kNone;
  auto get = [&](const auto& m) -> const std::vector<double>& {
    auto it = m.find(repo);
    return it == m.end() ? kNone : it->second;
  };
  return series_rmse(get(s), get(t), days);
}

/// Share of community members with at least one contributing event.
inline double community_contributing_users(const EventLog& log, const std::unordered_set<std::string>& community) {
  if (community.empty()) fail(ErrorCode::EmptyCommunity, "community has no members");
  std::unordered_set<std::string> active;
  for (const auto& e : log)
    if (is_contributing(e.type) && community.count(e.user)) active.insert(e.user);
  return static_cast<double>(active.size()) / static_cast<double>(community.size());
}

}  // namespace ghsim
