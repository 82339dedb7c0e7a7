#pragma once

#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghsim/core/hash.hpp"
#include "ghsim/ingest/io.hpp"
#include "ghsim/metrics/metrics.hpp"

namespace ghsim {

enum class MetricLevel { Node, Community, Population };

inline std::string_view to_string(MetricLevel l) {
  switch (l) {
    case MetricLevel::Node: return "node";
    case MetricLevel::Community: return "community";
    case MetricLevel::Population: return "population";
  }
  return "?";
}

struct MetricEntry {
  std::string name;
  MetricLevel level = MetricLevel::Population;
  std::optional<double> value;  // empty when the metric is unavailable
  std::string note;
};

struct MetricReport {
  TimeWindow window;
  double persistence = kDefaultPersistence;
  std::string inputs_hash;
  std::vector<MetricEntry> entries;

  const MetricEntry* find(std::string_view name) const {
    for (const auto& e : entries)
      if (e.name == name) return &e;
    return nullptr;
  }
  std::optional<double> value(std::string_view name) const {
    const auto* e = find(name);
    return e ? e->value : std::nullopt;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["window"] = format_window(window);
    j["rbo_persistence"] = persistence;
    j["inputs_hash"] = inputs_hash;
    j["metrics"] = nlohmann::json::array();
    for (const auto& e : entries) {
      nlohmann::json m{{"name", e.name}, {"level", std::string(to_string(e.level))}};
      m["value"] = e.value ? nlohmann::json(*e.value) : nlohmann::json(nullptr);
      if (!e.note.empty()) m["note"] = e.note;
      j["metrics"].push_back(std::move(m));
    }
    return j;
  }

  std::string to_table() const {
    std::size_t w = 6;
    for (const auto& e : entries) w = std::max(w, e.name.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(w)) << "metric" << "  " << std::setw(10) << "level"
        << "  value\n";
    for (const auto& e : entries) {
      out << std::left << std::setw(static_cast<int>(w)) << e.name << "  " << std::setw(10) << to_string(e.level) << "  ";
      if (e.value) out << std::fixed << std::setprecision(6) << *e.value;
      else out << "unavailable";
      if (!e.note.empty()) out << "  (" << e.note << ")";
      out << '\n';
    }
    return out.str();
  }
};

struct EvaluateConfig {
  TimeWindow window;
  double persistence = kDefaultPersistence;
  std::size_t depth = kPopularityTop;
  std::size_t top = kPopularityTop;
  std::optional<std::unordered_set<std::string>> community;
  /// Without `community`: use every truth user (true) or report the community
  /// metrics as unavailable (false).
  bool community_from_truth = true;
  Metadata meta;
  /// Events before the test window; they settle ownership and which entities are old.
  EventLog history;
};

inline std::uint64_t log_digest(const EventLog& log, std::uint64_t h = kFnvOffset) {
  for (const auto& e : log) {
    h = fnv1a64(std::to_string(e.time), h);
    h = fnv1a64(to_string(e.type), h);
    h = fnv1a64(e.user, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(e.repo, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

/// Repo owners: metadata first, then the earliest Create seen in history,
/// truth and sim (in that order of precedence).
inline std::unordered_map<std::string, std::string> infer_owners(const EvaluateConfig& cfg, const EventLog& sim,
                                                                 const EventLog& truth) {
  std::unordered_map<std::string, std::string> owner;
  for (const auto& [id, m] : cfg.meta.repos)
    if (!m.owner_id.empty()) owner.emplace(id, m.owner_id);
  for (const EventLog* log : {&cfg.history, &truth, &sim})
    for (const auto& e : *log)
      if (e.type == EventType::Create) owner.emplace(e.repo, e.user);
  return owner;
}

namespace detail {

inline bool minted(const std::string& id) { return id.rfind("new-user-", 0) == 0 || id.rfind("new-repo-", 0) == 0; }

}  // namespace detail

/// Compares a simulated log with the ground truth over cfg.window. Each metric
/// that cannot be computed is reported as unavailable with the reason.
inline MetricReport evaluate(const EventLog& sim_all, const EventLog& truth_all, const EvaluateConfig& cfg) {
  const auto sim = sim_all.restrict(cfg.window);
  const auto truth = truth_all.restrict(cfg.window);
  MetricReport rep;
  rep.window = cfg.window;
  rep.persistence = cfg.persistence;
  rep.inputs_hash = hex64(log_digest(truth, log_digest(sim)));

  auto record = [&](std::string name, MetricLevel level, auto&& compute, std::string note = {}) {
    MetricEntry e{std::move(name), level, std::nullopt, std::move(note)};
    try {
      e.value = compute();
    } catch (const Error& err) {
      e.note = err.what();
    }
    rep.entries.push_back(std::move(e));
  };

  // Entities created inside the test window are left out of popularity ranks.
  std::unordered_set<std::string> new_repos, new_users;
  for (const EventLog* log : {&sim, &truth})
    for (const auto& e : *log) {
      if (e.type == EventType::Create) new_repos.insert(e.repo);
      if (detail::minted(e.repo)) new_repos.insert(e.repo);
      if (detail::minted(e.user)) new_users.insert(e.user);
    }
  for (const auto& e : cfg.history)
    if (e.type == EventType::Create) new_repos.erase(e.repo);
  for (const auto& [id, m] : cfg.meta.repos)
    if (m.created_at) {
      if (cfg.window.contains(*m.created_at)) new_repos.insert(id);
      else new_repos.erase(id);
    }
  for (const auto& [id, t] : cfg.meta.user_created)
    if (cfg.window.contains(t)) new_users.insert(id);

  const auto owners = infer_owners(cfg, sim, truth);
  record("user_popularity_rbo", MetricLevel::Population, [&] {
    return rbo(user_popularity_rank(sim, owners, cfg.top, new_users), user_popularity_rank(truth, owners, cfg.top, new_users),
               cfg.persistence, cfg.depth);
  });
  record("repo_popularity_rbo", MetricLevel::Population, [&] {
    return rbo(repo_popularity_rank(sim, cfg.top, new_repos), repo_popularity_rank(truth, cfg.top, new_repos), cfg.persistence,
               cfg.depth);
  });
  record("issue_count_r2", MetricLevel::Population, [&] { return issue_count_r2(sim, truth); });

  const auto days = static_cast<std::size_t>((cfg.window.end - cfg.window.start + kSecondsPerDay - 1) / kSecondsPerDay);
  const auto sim_series = daily_contributors(sim, cfg.window);
  const auto truth_series = daily_contributors(truth, cfg.window);
  std::vector<std::string> repos;
  for (const auto& [r, s] : truth_series) repos.push_back(r);
  for (const auto& [r, s] : sim_series)
    if (!truth_series.count(r)) repos.push_back(r);
  record(
      "repo_contributors_rmse", MetricLevel::Node,
      [&]() -> double {
        if (repos.empty()) return 0.0;
        static const std::vector<double> kNone;
        double total = 0;
        for (const auto& r : repos) {
          auto s = sim_series.find(r);
          auto t = truth_series.find(r);
          total += series_rmse(s == sim_series.end() ? kNone : s->second, t == truth_series.end() ? kNone : t->second, days);
        }
        return total / static_cast<double>(repos.size());
      },
      "mean over repos with contributions");

  if (!cfg.community && !cfg.community_from_truth) {
    for (const char* name : {"community_contributing_users_sim", "community_contributing_users_truth",
                             "community_contributing_users_abs_error"})
      rep.entries.push_back({name, MetricLevel::Community, std::nullopt, "no community given"});
    return rep;
  }
  std::unordered_set<std::string> community;
  if (cfg.community) community = *cfg.community;
  else
    for (const auto& e : truth) community.insert(e.user);
  const std::string scope = cfg.community ? "" : "community = all truth users";
  std::optional<double> sim_share, truth_share;
  record("community_contributing_users_sim", MetricLevel::Community,
         [&] { return *(sim_share = community_contributing_users(sim, community)); }, scope);
  record("community_contributing_users_truth", MetricLevel::Community,
         [&] { return *(truth_share = community_contributing_users(truth, community)); }, scope);
  record("community_contributing_users_abs_error", MetricLevel::Community, [&] {
    if (!sim_share || !truth_share) fail(ErrorCode::EmptyCommunity, "community has no members");
    return std::abs(*sim_share - *truth_share);
  });
  return rep;
}

}  // namespace ghsim
