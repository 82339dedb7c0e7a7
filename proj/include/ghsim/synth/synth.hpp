#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghsim/core/error.hpp"
#include "ghsim/core/event.hpp"
#include "ghsim/core/random.hpp"
#include "ghsim/core/state.hpp"
#include "ghsim/core/time.hpp"
#include "ghsim/ingest/io.hpp"

namespace ghsim {

enum class SynthVariant {
  Attachment,  // discovery by popularity rank over a live order, new users arriving
  Frozen,      // fixed per-user type and repo mixtures, no drift, no one-time events
};

inline std::string_view to_string(SynthVariant v) { return v == SynthVariant::Attachment ? "attachment" : "frozen"; }

inline SynthVariant parse_synth_variant(std::string_view s) {
  if (s == "attachment") return SynthVariant::Attachment;
  if (s == "frozen") return SynthVariant::Frozen;
  fail(ErrorCode::Config, "unknown synth variant '" + std::string(s) + "'");
}

struct SynthConfig {
  SynthVariant variant = SynthVariant::Attachment;
  std::size_t n_users = 2000;
  std::size_t n_repos = 2000;
  double days = 30;
  std::uint64_t seed = 1;
  Timestamp start = 1501545600;

  // Per-user daily rate: exp(N(rate_log_mean, rate_log_sigma^2)).
  double rate_log_mean = 0.0;
  double rate_log_sigma = 0.8;

  // Popularity: discovery picks rank k with P(k) proportional to k^(-1/(gamma-1)).
  double gamma = 1.81;
  std::uint64_t seed_popularity_cap = 100000;

  double new_user_share = 0.2;        // expected share of events by users created in the window
  std::array<double, 3> discovery_split{0.64, 0.20, 0.04};  // Watch, Fork, Create
  double first_touch_one_time = 0.88;  // share of first touches that are one-time events
  double p_discover = 0.15;            // chance a user with history touches a new repo
  double p_own = 0.5;                  // chance a repeat event goes to an owned repo
  std::array<double, kEventTypeCount> multi_types{};  // defaults filled by validate()

  // Frozen variant.
  std::size_t types_per_user = 3;
  std::size_t repos_per_user = 4;

  void validate() {
    if (n_users == 0 || n_repos == 0) fail(ErrorCode::Config, "synth needs at least one user and one repo");
    if (!(days > 0)) fail(ErrorCode::Config, "synth days must be positive");
    if (!(rate_log_sigma >= 0) || !std::isfinite(rate_log_mean)) fail(ErrorCode::Config, "bad synth rate distribution");
    if (!(gamma > 1)) fail(ErrorCode::Config, "synth gamma must exceed 1");
    auto prob = [](double p, const char* what) {
      if (!(p >= 0 && p <= 1)) fail(ErrorCode::Config, std::string("synth ") + what + " must lie in [0, 1]");
    };
    prob(new_user_share, "new_user_share");
    prob(first_touch_one_time, "first_touch_one_time");
    prob(p_discover, "p_discover");
    prob(p_own, "p_own");
    if (new_user_share >= 1) fail(ErrorCode::Config, "synth new_user_share must be below 1");
    auto normalize = [](auto& a, const char* what) {
      double s = 0;
      for (double x : a) {
        if (!(x >= 0)) fail(ErrorCode::Config, std::string("negative weight in synth ") + what);
        s += x;
      }
      if (!(s > 0)) fail(ErrorCode::Config, std::string("synth ") + what + " is empty");
      for (double& x : a) x /= s;
    };
    normalize(discovery_split, "discovery_split");
    if (std::all_of(multi_types.begin(), multi_types.end(), [](double x) { return x == 0; })) {
      multi_types[index_of(EventType::Push)] = 0.45;
      multi_types[index_of(EventType::IssueComment)] = 0.15;
      multi_types[index_of(EventType::PullRequest)] = 0.12;
      multi_types[index_of(EventType::Issues)] = 0.1;
      multi_types[index_of(EventType::PullRequestReviewComment)] = 0.08;
      multi_types[index_of(EventType::CommitComment)] = 0.05;
      multi_types[index_of(EventType::Delete)] = 0.05;
    }
    for (auto t : kAllEventTypes)
      if (is_one_time(t) && multi_types[index_of(t)] != 0)
        fail(ErrorCode::Config, "synth multi_types may not contain one-time event types");
    normalize(multi_types, "multi_types");
    if (variant == SynthVariant::Frozen && (types_per_user == 0 || repos_per_user == 0))
      fail(ErrorCode::Config, "frozen synth needs types_per_user and repos_per_user >= 1");
  }

  TimeWindow window() const { return {start, start + static_cast<Timestamp>(std::llround(days * kSecondsPerDay))}; }

  nlohmann::json to_json() const {
    return {{"variant", std::string(to_string(variant))},
            {"n_users", n_users},
            {"n_repos", n_repos},
            {"days", days},
            {"seed", seed},
            {"start", format_timestamp(start)},
            {"rate_log_mean", rate_log_mean},
            {"rate_log_sigma", rate_log_sigma},
            {"gamma", gamma},
            {"new_user_share", new_user_share},
            {"discovery_split", discovery_split},
            {"first_touch_one_time", first_touch_one_time},
            {"p_discover", p_discover},
            {"p_own", p_own},
            {"multi_types", multi_types},
            {"types_per_user", types_per_user},
            {"repos_per_user", repos_per_user}};
  }
};

/// Generator-side truth for one user.
struct SynthUser {
  std::string id;
  double rate = 0;  // events per day while active
  Timestamp created_at = 0;
  bool is_new = false;
  std::array<double, kEventTypeCount> types{};     // frozen variant
  std::vector<std::pair<std::uint32_t, double>> repos;  // frozen variant: (repo, probability)
};

struct SynthOutput {
  SynthConfig config;
  EventLog log;
  Metadata meta;
  std::vector<SynthUser> users;
  std::vector<std::string> repo_ids;
  nlohmann::json record;
};

namespace detail {

/// Discrete power-law draw on {xmin, xmin+1, ...} by the rounded continuous
/// inverse; good enough to seed an initial popularity order.
template <class G>
std::uint64_t power_law_draw(G& g, double gamma, std::uint64_t xmin, std::uint64_t cap) {
  const double u = uniform01(g);
  const double x = (static_cast<double>(xmin) - 0.5) * std::pow(1.0 - u, -1.0 / (gamma - 1.0)) + 0.5;
  if (!(x < static_cast<double>(cap))) return cap;
  return std::max<std::uint64_t>(xmin, static_cast<std::uint64_t>(x));
}

template <class G>
double lognormal(G& g, double mu, double sigma) {
  return std::exp(mu + sigma * standard_normal(g));
}

struct Tick {
  Timestamp time;
  std::uint32_t user;
};

/// Poisson stream of (time, user) for every user from max(creation, start)
/// to end, time-sorted.
template <class G>
std::vector<Tick> poisson_ticks(G& g, const std::vector<SynthUser>& users, Timestamp start, Timestamp end) {
  std::vector<Tick> out;
  for (std::uint32_t u = 0; u < users.size(); ++u) {
    const Timestamp from = std::max(start, users[u].created_at);
    if (from >= end) continue;
    const double span = static_cast<double>(end - from);
    const std::uint64_t n = poisson(g, users[u].rate * span / kSecondsPerDay);
    for (std::uint64_t k = 0; k < n; ++k)
      out.push_back({from + static_cast<Timestamp>(uniform_index(g, static_cast<std::uint64_t>(end - from))), u});
  }
  std::sort(out.begin(), out.end(), [](const Tick& a, const Tick& b) { return a.time < b.time || (a.time == b.time && a.user < b.user); });
  return out;
}

inline std::string synth_user_id(std::size_t i) { return "su" + std::to_string(i); }
inline std::string synth_repo_id(std::size_t i) { return "sr" + std::to_string(i); }

}  // namespace detail

inline SynthOutput generate_frozen(const SynthConfig& cfg) {
  Rng g(derive_seed(cfg.seed, "synth-frozen"));
  SynthOutput out;
  out.config = cfg;
  const auto w = cfg.window();
  std::vector<EventType> multi;
  for (auto t : kAllEventTypes)
    if (cfg.multi_types[index_of(t)] > 0) multi.push_back(t);
  for (std::size_t r = 0; r < cfg.n_repos; ++r) out.repo_ids.push_back(detail::synth_repo_id(r));
  const ZipfSampler repo_rank(cfg.n_repos, 1.0 / (cfg.gamma - 1.0));
  out.users.resize(cfg.n_users);
  for (std::size_t i = 0; i < cfg.n_users; ++i) {
    auto& u = out.users[i];
    u.id = detail::synth_user_id(i);
    u.rate = detail::lognormal(g, cfg.rate_log_mean, cfg.rate_log_sigma);
    u.created_at = w.start - static_cast<Timestamp>(1 + uniform_index(g, 365)) * kSecondsPerDay;
    // Random subset of the multiple-time types with flat-Dirichlet weights.
    auto pool = multi;
    shuffle(g, pool);
    pool.resize(std::min(cfg.types_per_user, pool.size()));
    double s = 0;
    for (auto t : pool) s += (u.types[index_of(t)] = exponential(g, 1.0));
    for (auto& p : u.types) p /= s;
    std::vector<std::uint32_t> picked;
    for (std::size_t tries = 0; picked.size() < std::min(cfg.repos_per_user, cfg.n_repos) && tries < 64 * cfg.repos_per_user; ++tries) {
      const auto r = static_cast<std::uint32_t>(repo_rank.sample(g) - 1);
      if (std::find(picked.begin(), picked.end(), r) == picked.end()) picked.push_back(r);
    }
    s = 0;
    for (auto r : picked) u.repos.emplace_back(r, exponential(g, 1.0)), s += u.repos.back().second;
    for (auto& [r, p] : u.repos) p /= s;
    out.meta.user_created[u.id] = u.created_at;
  }
  for (std::size_t r = 0; r < cfg.n_repos; ++r)
    out.meta.repos[out.repo_ids[r]] = {out.repo_ids[r], detail::synth_user_id(r % cfg.n_users), w.start - 400 * kSecondsPerDay,
                                       std::nullopt};

  const auto ticks = detail::poisson_ticks(g, out.users, w.start, w.end);
  std::vector<DiscreteSampler> type_s(cfg.n_users), repo_s(cfg.n_users);
  for (std::size_t i = 0; i < cfg.n_users; ++i) {
    type_s[i].assign(out.users[i].types);
    std::vector<double> p;
    for (const auto& [r, q] : out.users[i].repos) p.push_back(q);
    repo_s[i].assign(p);
  }
  std::vector<Event> events;
  events.reserve(ticks.size());
  for (const auto& t : ticks) {
    const auto& u = out.users[t.user];
    const auto type = kAllEventTypes[type_s[t.user].sample(g)];
    events.push_back({t.time, type, u.id, out.repo_ids[u.repos[repo_s[t.user].sample(g)].first]});
  }
  out.log = EventLog(std::move(events));
  out.record = {{"config", cfg.to_json()}, {"events", out.log.size()}, {"users", cfg.n_users}, {"repos", cfg.n_repos}};
  return out;
}

inline SynthOutput generate_attachment(const SynthConfig& cfg) {
  Rng g(derive_seed(cfg.seed, "synth-attachment"));
  SynthOutput out;
  out.config = cfg;
  const auto w = cfg.window();
  const double rank_exponent = 1.0 / (cfg.gamma - 1.0);

  // Existing users, then arrivals sized so their expected event share is new_user_share.
  double old_volume = 0;
  for (std::size_t i = 0; i < cfg.n_users; ++i) {
    SynthUser u;
    u.id = detail::synth_user_id(i);
    u.rate = detail::lognormal(g, cfg.rate_log_mean, cfg.rate_log_sigma);
    u.created_at = w.start - static_cast<Timestamp>(1 + uniform_index(g, 365)) * kSecondsPerDay;
    old_volume += u.rate * cfg.days;
    out.users.push_back(std::move(u));
  }
  const double mean_rate = std::exp(cfg.rate_log_mean + 0.5 * cfg.rate_log_sigma * cfg.rate_log_sigma);
  const auto arrivals = static_cast<std::size_t>(
      std::llround(cfg.new_user_share / (1 - cfg.new_user_share) * old_volume / (mean_rate * cfg.days / 2)));
  for (std::size_t k = 0; k < arrivals; ++k) {
    SynthUser u;
    u.id = detail::synth_user_id(cfg.n_users + k);
    u.rate = detail::lognormal(g, cfg.rate_log_mean, cfg.rate_log_sigma);
    u.created_at = w.start + static_cast<Timestamp>(uniform_index(g, static_cast<std::uint64_t>(w.end - w.start)));
    u.is_new = true;
    out.users.push_back(std::move(u));
  }
  for (const auto& u : out.users) out.meta.user_created[u.id] = u.created_at;

  // Pre-existing repos with power-law seeded popularity.
  PopularityOrder order;
  std::vector<std::uint32_t> owner;
  for (std::size_t r = 0; r < cfg.n_repos; ++r) {
    out.repo_ids.push_back(detail::synth_repo_id(r));
    owner.push_back(static_cast<std::uint32_t>(uniform_index(g, cfg.n_users)));
    order.add(static_cast<std::uint32_t>(r), detail::power_law_draw(g, cfg.gamma, 1, cfg.seed_popularity_cap));
  }

  struct State {
    std::unordered_set<std::uint32_t> touched;
    std::vector<std::uint32_t> repos;  // touched, with multiplicity (repeat picks are proportional)
    std::vector<std::uint32_t> owned;  // owned repos the user has touched
  };
  std::vector<State> st(out.users.size());

  DiscreteSampler discovery, multi;
  discovery.assign(cfg.discovery_split);
  multi.assign(cfg.multi_types);
  constexpr std::array<EventType, 3> kDiscovery{EventType::Watch, EventType::Fork, EventType::Create};

  std::uint64_t first_touches = 0, one_time_first = 0, new_events = 0;
  std::array<std::uint64_t, 3> split_counts{};
  std::uint64_t fallback_creates = 0;

  // Rank draw over the live order, skipping repos this user already touched.
  auto discover = [&](State& s, std::optional<std::uint32_t>& pick) {
    const ZipfSampler z(order.size(), rank_exponent);
    for (int tries = 0; tries < 64; ++tries) {
      const auto r = order.order()[z.sample(g) - 1];
      if (!s.touched.count(r)) {
        pick = r;
        return;
      }
    }
    for (auto r : order.order())
      if (!s.touched.count(r)) {
        pick = r;
        return;
      }
  };

  const auto ticks = detail::poisson_ticks(g, out.users, w.start, w.end);
  std::vector<Event> events;
  events.reserve(ticks.size() + cfg.n_repos);
  for (const auto& t : ticks) {
    auto& s = st[t.user];
    const auto& uid = out.users[t.user].id;
    new_events += out.users[t.user].is_new;
    EventType type;
    std::uint32_t repo;
    if (s.repos.empty() || uniform01(g) < cfg.p_discover) {
      ++first_touches;
      std::optional<std::uint32_t> pick;
      if (uniform01(g) < cfg.first_touch_one_time) {
        ++one_time_first;
        const std::size_t k = discovery.sample(g);
        type = kDiscovery[k];
        if (type != EventType::Create) discover(s, pick);
        if (!pick) {
          // Create, or nothing left to discover.
          fallback_creates += type != EventType::Create;
          type = EventType::Create;
          pick = static_cast<std::uint32_t>(out.repo_ids.size());
          out.repo_ids.push_back(detail::synth_repo_id(*pick));
          owner.push_back(t.user);
          order.add(*pick, 0);
        }
        ++split_counts[type == EventType::Watch ? 0 : type == EventType::Fork ? 1 : 2];
        if (type != EventType::Create) order.increment(*pick);
      } else {
        type = kAllEventTypes[multi.sample(g)];
        discover(s, pick);
        if (!pick) {
          --first_touches;
          pick = s.repos[uniform_index(g, s.repos.size())];
        }
      }
      repo = *pick;
    } else {
      type = kAllEventTypes[multi.sample(g)];
      if (!s.owned.empty() && uniform01(g) < cfg.p_own) {
        repo = s.owned[uniform_index(g, s.owned.size())];
      } else {
        repo = s.repos[uniform_index(g, s.repos.size())];
      }
    }
    if (s.touched.insert(repo).second && owner[repo] == t.user) s.owned.push_back(repo);
    s.repos.push_back(repo);
    events.push_back({t.time, type, uid, out.repo_ids[repo]});
  }
  for (std::size_t r = 0; r < out.repo_ids.size(); ++r) {
    const bool fresh = r >= cfg.n_repos;
    out.meta.repos[out.repo_ids[r]] = {out.repo_ids[r], out.users[owner[r]].id,
                                       fresh ? std::optional<Timestamp>() : std::optional<Timestamp>(w.start - 400 * kSecondsPerDay),
                                       std::nullopt};
  }
  out.log = EventLog(std::move(events));

  const double total = static_cast<double>(out.log.size());
  const double split_total = static_cast<double>(split_counts[0] + split_counts[1] + split_counts[2]);
  out.record = {{"config", cfg.to_json()},
                {"events", out.log.size()},
                {"users", out.users.size()},
                {"new_users", arrivals},
                {"repos", out.repo_ids.size()},
                {"realized",
                 {{"new_user_event_share", total > 0 ? static_cast<double>(new_events) / total : 0.0},
                  {"first_touches", first_touches},
                  {"first_touch_one_time_share", first_touches ? static_cast<double>(one_time_first) / static_cast<double>(first_touches) : 0.0},
                  {"discovery_split",
                   split_total > 0 ? nlohmann::json::array({split_counts[0] / split_total, split_counts[1] / split_total,
                                                            split_counts[2] / split_total})
                                   : nlohmann::json::array()},
                  {"fallback_creates", fallback_creates}}}};
  return out;
}

/// Deterministic synthetic ecosystem for `cfg`; the record holds the planted
/// parameters and realized summary statistics.
inline SynthOutput generate(SynthConfig cfg) {
  cfg.validate();
  return cfg.variant == SynthVariant::Frozen ? generate_frozen(cfg) : generate_attachment(cfg);
}

}  // namespace ghsim
