#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ghsim/metrics/report.hpp"
#include "ghsim/models/stationary.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace ghsim;
using fixtures::ev;
using fixtures::kDay;
using fixtures::kT0;

namespace {

using List = std::vector<std::string>;
using oracles::rbo_oracle;

List random_list(Rng& g, std::size_t universe, std::size_t max_len) {
  List pool;
  for (std::size_t i = 0; i < universe; ++i) pool.push_back("x" + std::to_string(i));
  shuffle(g, pool);
  pool.resize(uniform_index(g, std::min(universe, max_len) + 1));
  return pool;
}

}  // namespace

TEST(Rbo, HandExamples) {
  EXPECT_DOUBLE_EQ(rbo({"a", "b"}, {"b", "a"}, 0.5, 2), 0.25);
  EXPECT_EQ(rbo({"a", "b"}, {"c", "d"}, 0.9, 10), 0);
  EXPECT_NEAR(rbo({"a", "b", "c"}, {"a", "b", "c"}, 0.8, 3), 1 - std::pow(0.8, 3), 1e-15);
  EXPECT_EQ(rbo({}, {}, 0.9, 500), 0);
}

TEST(Rbo, Errors) {
  for (double p : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
    try {
      rbo({"a"}, {"a"}, p, 1);
      FAIL() << p;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadPersistence);
      EXPECT_EQ(e.exit_code(), 2);
    }
  }
  EXPECT_THROW(rbo({"a", "a"}, {"b"}, 0.5, 2), Error);
}

TEST(Rbo, MatchesOracleAndProperties) {
  Rng g(2024);
  for (int i = 0; i < 10000; ++i) {
    const auto s = random_list(g, 12, 10), t = random_list(g, 12, 10);
    const double p = 0.05 + 0.9 * uniform01(g);
    const std::size_t depth = 1 + uniform_index(g, 14);
    const double v = rbo(s, t, p, depth);
    ASSERT_NEAR(v, rbo_oracle(s, t, p, depth), 1e-12);
    ASSERT_DOUBLE_EQ(v, rbo(t, s, p, depth));
    ASSERT_GE(v, 0);
    ASSERT_LE(v, 1 + 1e-12);
    // Prepending a shared fresh item never lowers the score.
    auto s2 = s, t2 = t;
    s2.insert(s2.begin(), "fresh");
    t2.insert(t2.begin(), "fresh");
    ASSERT_GE(rbo(s2, t2, p, depth) + 1e-12, v);
  }
}

TEST(Popularity, Examples) {
  EXPECT_TRUE(repo_popularity_rank(EventLog{}).empty());
  EXPECT_TRUE(user_popularity_rank(EventLog{}, {}).empty());
  const std::unordered_map<std::string, std::string> owner{{"r1", "u1"}, {"r2", "u1"}, {"r3", "u2"}, {"r4", "u"}};
  EXPECT_EQ(user_popularity_rank(EventLog({ev(kT0, EventType::Watch, "z", "r4")}), owner), List{"u"});
  const auto log = EventLog({ev(kT0, EventType::Watch, "a", "r1"), ev(kT0, EventType::Watch, "b", "r1"),
                             ev(kT0, EventType::Watch, "c", "r2"), ev(kT0, EventType::Fork, "d", "r2"),
                             ev(kT0, EventType::Fork, "a", "r3"), ev(kT0, EventType::Fork, "b", "r3"),
                             ev(kT0, EventType::Push, "a", "r3"), ev(kT0, EventType::Push, "a", "r3")});
  EXPECT_EQ(user_popularity_rank(log, owner), (List{"u1", "u2"}));
  EXPECT_EQ(repo_popularity_rank(log), (List{"r1", "r2", "r3"}));  // ties by id
  EXPECT_EQ(repo_popularity_rank(log, 2), (List{"r1", "r2"}));
  EXPECT_EQ(repo_popularity_rank(log, 500, {"r1"}), (List{"r2", "r3"}));
}

TEST(IssueR2, Examples) {
  auto issues = [](std::vector<int> counts) {
    std::vector<Event> out;
    for (std::size_t r = 0; r < counts.size(); ++r) {
      out.push_back(ev(kT0, EventType::Push, "u", "r" + std::to_string(r)));
      for (int k = 0; k < counts[r]; ++k) out.push_back(ev(kT0 + k, EventType::Issues, "u", "r" + std::to_string(r)));
    }
    return EventLog(std::move(out));
  };
  EXPECT_DOUBLE_EQ(issue_count_r2(issues({3, 2, 1}), issues({1, 2, 3})), -3.0);
  EXPECT_DOUBLE_EQ(issue_count_r2(issues({1, 2, 3}), issues({1, 2, 3})), 1.0);
  EXPECT_DOUBLE_EQ(issue_count_r2(issues({2, 2, 2}), issues({1, 2, 3})), 0.0);
  try {
    issue_count_r2(issues({1, 2}), issues({4, 4}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateTruth);
  }
  Rng g(5);
  for (int i = 0; i < 200; ++i) {
    std::vector<int> a, b;
    for (int r = 0; r < 6; ++r) {
      a.push_back(static_cast<int>(uniform_index(g, 5)));
      b.push_back(static_cast<int>(uniform_index(g, 5)));
    }
    if (std::all_of(b.begin(), b.end(), [&](int x) { return x == b[0]; })) continue;
    const double v = issue_count_r2(issues(a), issues(b));
    EXPECT_LE(v, 1.0);
    EXPECT_EQ(v == 1.0, a == b);
  }
}

TEST(Contributors, Examples) {
  const TimeWindow w{kT0, kT0 + 3 * kDay};
  const auto truth = EventLog({ev(kT0 + 10, EventType::Push, "a", "r"), ev(kT0 + 20, EventType::PullRequest, "b", "r"),
                               ev(kT0 + 30, EventType::Push, "a", "r"), ev(kT0 + 2 * kDay + 5, EventType::Push, "c", "r"),
                               ev(kT0 + kDay, EventType::Watch, "d", "r")});
  EXPECT_NEAR(contributors_rmse(EventLog{}, truth, "r", w), std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_EQ(contributors_rmse(truth, truth, "r", w), 0);
  std::vector<Event> plus_one(truth.begin(), truth.end());
  for (int d = 0; d < 3; ++d) plus_one.push_back(ev(kT0 + d * kDay + 99, EventType::Push, "extra", "r"));
  EXPECT_DOUBLE_EQ(contributors_rmse(EventLog(plus_one), truth, "r", w), 1.0);
}

TEST(Community, Examples) {
  const auto log = EventLog({ev(kT0, EventType::Push, "a", "r"), ev(kT0, EventType::PullRequest, "b", "r"),
                             ev(kT0, EventType::Watch, "c", "r"), ev(kT0, EventType::Push, "z", "r")});
  EXPECT_DOUBLE_EQ(community_contributing_users(log, {"a", "b", "c", "d", "e"}), 0.4);
  EXPECT_DOUBLE_EQ(community_contributing_users(log, {"a", "b"}), 1.0);
  EXPECT_DOUBLE_EQ(community_contributing_users(log, {"c", "d"}), 0.0);
  try {
    community_contributing_users(log, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyCommunity);
  }
}

namespace {

EvaluateConfig config_for(const TimeWindow& w) {
  EvaluateConfig c;
  c.window = w;
  return c;
}

}  // namespace

TEST(Evaluate, IdenticalLogs) {
  const TimeWindow w{kT0, kT0 + 14 * kDay};
  const auto log = fixtures::random_log(3, 40, 60, 4000, kT0 - 30 * kDay, 44);
  auto cfg = config_for(w);
  cfg.history = log.restrict({kT0 - 30 * kDay, kT0});
  const auto rep = evaluate(log, log, cfg);
  const auto truth = log.restrict(w);
  // Maximum RBO: the truth ranking compared with itself.
  EXPECT_DOUBLE_EQ(*rep.value("repo_popularity_rbo"), rbo(repo_popularity_rank(truth), repo_popularity_rank(truth), 0.98));
  EXPECT_GT(*rep.value("user_popularity_rbo"), 0);
  EXPECT_EQ(*rep.value("issue_count_r2"), 1.0);
  EXPECT_EQ(*rep.value("repo_contributors_rmse"), 0.0);
  EXPECT_EQ(*rep.value("community_contributing_users_abs_error"), 0.0);
  EXPECT_EQ(rep.to_json()["metrics"].size(), rep.entries.size());
  EXPECT_NE(rep.to_table().find("issue_count_r2"), std::string::npos);
}

TEST(Evaluate, EmptySimulationDoesNotThrow) {
  const TimeWindow w{kT0, kT0 + 7 * kDay};
  const auto truth = fixtures::random_log(4, 10, 10, 500, kT0, 7);
  const auto rep = evaluate(EventLog{}, truth, config_for(w));
  EXPECT_EQ(*rep.value("repo_popularity_rbo"), 0.0);
  EXPECT_LE(*rep.value("issue_count_r2"), 0.0);
  EXPECT_EQ(*rep.value("community_contributing_users_sim"), 0.0);
  const auto both_empty = evaluate(EventLog{}, EventLog{}, config_for(w));
  EXPECT_FALSE(both_empty.value("issue_count_r2").has_value());
  EXPECT_FALSE(both_empty.find("issue_count_r2")->note.empty());
}

TEST(Evaluate, NewEntitiesLeftOutOfPopularity) {
  const TimeWindow w{kT0, kT0 + 7 * kDay};
  const auto truth = EventLog({ev(kT0 - kDay, EventType::Create, "o", "old"), ev(kT0 + 10, EventType::Create, "n", "fresh"),
                               ev(kT0 + 20, EventType::Watch, "a", "fresh"), ev(kT0 + 30, EventType::Watch, "b", "fresh"),
                               ev(kT0 + 40, EventType::Watch, "a", "old")});
  auto cfg = config_for(w);
  cfg.history = truth.restrict({kT0 - 2 * kDay, kT0});
  const auto sim = EventLog({ev(kT0 + 40, EventType::Watch, "a", "old"), ev(kT0 + 50, EventType::Watch, "c", "new-repo-p0-0")});
  const auto rep = evaluate(sim, truth, cfg);
  // Only "old" is ranked on both sides, so the lists agree fully at depth 1.
  EXPECT_NEAR(*rep.value("repo_popularity_rbo"), rbo({"old"}, {"old"}, 0.98), 1e-15);
}

TEST(Evaluate, NullModelBeatsUniformNoise) {
  // Stationary truth: each user repeats a fixed personal mix over three repos.
  Rng g(31);
  const int users = 60, repos = 80;
  std::vector<Event> all;
  for (int r = 0; r < repos; ++r) all.push_back(ev(kT0 - 60 * kDay, EventType::Create, "u" + std::to_string(r % users), "r" + std::to_string(r)));
  for (int u = 0; u < users; ++u) {
    const double rate = 0.5 + 4 * uniform01(g);
    std::vector<int> mine;
    for (int k = 0; k < 3; ++k) mine.push_back(static_cast<int>(uniform_index(g, repos)));
    for (double t = exponential(g, rate); t < 56; t += exponential(g, rate)) {
      // Even users never contribute.
      const auto type = uniform_index(g, 3) == 0 ? EventType::Issues
                        : u % 2 && uniform_index(g, 2) ? EventType::Push
                                                       : EventType::Watch;
      const int r = mine[std::min<std::size_t>(uniform_index(g, 4), 2)];
      all.push_back(ev(kT0 - 28 * kDay + static_cast<Timestamp>(t * kDay), type, "u" + std::to_string(u), "r" + std::to_string(r)));
    }
  }
  const EventLog log(all);
  const TimeWindow test{kT0, kT0 + 28 * kDay};
  const auto truth = log.restrict(test);
  const EventLog null_sim(fit_null(log.restrict({kT0 - 28 * kDay, kT0}), test));
  const auto noise = fixtures::random_log(99, users, repos, static_cast<int>(truth.size()), kT0, 28);
  auto cfg = config_for(test);
  cfg.history = log.restrict({kT0 - 90 * kDay, kT0});
  const auto a = evaluate(null_sim, truth, cfg);
  const auto b = evaluate(noise, truth, cfg);
  EXPECT_GT(*a.value("user_popularity_rbo"), *b.value("user_popularity_rbo"));
  EXPECT_GT(*a.value("repo_popularity_rbo"), *b.value("repo_popularity_rbo"));
  EXPECT_GT(*a.value("issue_count_r2"), *b.value("issue_count_r2"));
  EXPECT_LT(*a.value("repo_contributors_rmse"), *b.value("repo_contributors_rmse"));
  EXPECT_LT(*a.value("community_contributing_users_abs_error"), *b.value("community_contributing_users_abs_error"));
}
