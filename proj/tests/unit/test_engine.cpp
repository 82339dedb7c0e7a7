#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ghsim/engine/partition.hpp"
#include "ghsim/engine/run.hpp"
#include "ghsim/engine/schedule.hpp"
#include "ghsim/ingest/io.hpp"
#include "ghsim/models/stationary.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace ghsim;
using fixtures::ev;
using fixtures::kDay;
using fixtures::kT0;

namespace {

using EdgeList = std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>;
using oracles::planted;
using oracles::random_bisection_cut;

// Test-side model that always fails for one user.
class FailingModel final : public AgentModel {
 public:
  std::string_view name() const override { return "failing"; }
  std::size_t agent_count() const override { return 2; }
  std::string agent_id(std::size_t a) const override { return a == 0 ? "ok-user" : "bad-user"; }
  UserIndex agent_user(std::size_t) const override { return kNoIndex; }
  double rate_per_day(std::size_t) const override { return 5; }
  Action step(std::size_t a, StepContext&) const override {
    if (a == 1) fail(ErrorCode::InsufficientData, "boom");
    return {EventType::Push, 0, {}, {}};
  }
};

}  // namespace

TEST(Partition, SinglePartHasZeroCut) {
  auto g = planted(1, 50, 0.2, 0.05);
  auto res = partition_graph(g, 1);
  EXPECT_EQ(res.cut, 0.0);
  for (auto p : res.part) EXPECT_EQ(p, 0u);
}

TEST(Partition, DisconnectedCommunitiesSplitCleanly) {
  auto g = planted(2, 200, 0.1, 0.0);
  auto res = partition_graph(g, 2);
  EXPECT_EQ(res.cut, 0.0);
  EXPECT_LE(res.max_part_weight(), std::ceil(1.05 * 200 / 2));
}

TEST(Partition, PlantedBeatsRandomBisection) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto g = planted(100 + seed, 400, 0.1, 0.005);
    auto res = partition_graph(g, 2, {.seed = seed});
    const double random_cut = random_bisection_cut(g, seed, 100);
    EXPECT_LE(res.cut, 0.5 * random_cut) << seed;
    EXPECT_LE(res.max_part_weight(), std::ceil(1.05 * 400 / 2));
  }
}

TEST(Partition, RejectsTooManyParts) {
  auto g = WeightedGraph::from_edges(3, {{0, 1, 1.0}});
  try {
    partition_graph(g, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InfeasibleBalance);
  }
  EXPECT_THROW(partition_graph(WeightedGraph::from_edges(0, {}), 1), Error);
}

TEST(Partition, BalancedAcrossK) {
  Rng g(77);
  EdgeList edges;
  const std::uint32_t n = 3000;
  for (int i = 0; i < 12000; ++i)
    edges.emplace_back(uniform_index(g, n), uniform_index(g, n), 1.0 + uniform_index(g, 3));
  auto graph = WeightedGraph::from_edges(n, edges);
  for (std::uint32_t k : {2u, 3u, 4u, 8u, 16u}) {
    auto res = partition_graph(graph, k, {.seed = k});
    EXPECT_LE(res.max_part_weight(), std::ceil(1.05 * n / k)) << k;
    EXPECT_NEAR(res.cut, edge_cut(graph, res.part), 1e-9);
    std::set<std::uint32_t> used(res.part.begin(), res.part.end());
    EXPECT_EQ(used.size(), k);
  }
}

TEST(Partition, Deterministic) {
  auto g = planted(5, 300, 0.08, 0.01);
  EXPECT_EQ(partition_graph(g, 4, {.seed = 3}).part, partition_graph(g, 4, {.seed = 3}).part);
}

TEST(Schedule, ZeroRateNeverWakes) {
  EXPECT_TRUE(poisson_arrivals(1, 0.0, {kT0, kT0 + 28 * kDay}).empty());
}

TEST(Schedule, PoissonMeanWithinThreeSigma) {
  double total = 0;
  const int seeds = 1000;
  for (int s = 0; s < seeds; ++s) {
    auto t = poisson_arrivals(derive_seed(s, "user", kClockStream), 2.0, {kT0, kT0 + 28 * kDay});
    total += static_cast<double>(t.size());
    for (auto x : t) ASSERT_TRUE(x >= kT0 && x < kT0 + 28 * kDay);
    ASSERT_TRUE(std::is_sorted(t.begin(), t.end()));
  }
  // Sample mean of 1000 Poisson(56) draws: sd of the mean is sqrt(56 / 1000).
  EXPECT_NEAR(total / seeds, 56.0, 3 * std::sqrt(56.0 / seeds));
}

TEST(Schedule, SameSeedSameTimes) {
  TimeWindow w{kT0, kT0 + 28 * kDay};
  EXPECT_EQ(poisson_arrivals(derive_seed(9, "alice", kClockStream), 3.0, w),
            poisson_arrivals(derive_seed(9, "alice", kClockStream), 3.0, w));
  EXPECT_NE(poisson_arrivals(derive_seed(9, "alice", kClockStream), 3.0, w),
            poisson_arrivals(derive_seed(9, "bob", kClockStream), 3.0, w));
}

TEST(Run, NullModelIsPassThrough) {
  auto log = fixtures::random_log(1, 20, 10, 600, kT0, 42);
  const TimeWindow test{kT0 + 28 * kDay, kT0 + 56 * kDay};
  auto slice = build_slice(log, {kT0, test.start});
  auto model = NullModel::fit(log, test);
  for (std::uint32_t p : {1u, 3u}) {
    SimulationConfig cfg{test, 1, p};
    auto res = run(cfg, slice, model);
    EXPECT_EQ(res.log.events(), EventLog(model.events()).events()) << p;
  }
  // Expected: the pre-window tiled twice.
  std::vector<Event> expect;
  for (const auto& e : log.restrict({test.start - 14 * kDay, test.start}))
    for (int j = 1; j <= 2; ++j) expect.push_back(ev(e.time + j * 14 * kDay, e.type, e.user, e.repo));
  EXPECT_EQ(EventLog(model.events()), EventLog(expect));
}

TEST(Run, SinglePairHistoryIsDegenerate) {
  auto slice = build_slice(EventLog({ev(kT0, EventType::Push, "u", "r")}), {kT0, kT0 + kDay});
  auto model = StationaryModel::fit(slice, StationaryKind::Baseline);
  SimulationConfig cfg{{kT0 + kDay, kT0 + 29 * kDay}, 4, 1};
  auto res = run(cfg, slice, model);
  EXPECT_GT(res.log.size(), 0u);
  for (const auto& e : res.log) {
    EXPECT_EQ(e.type, EventType::Push);
    EXPECT_EQ(e.repo, "r");
    EXPECT_EQ(e.user, "u");
  }
}

TEST(Run, DeterministicPerPartitionCount) {
  auto log = fixtures::random_log(2, 60, 40, 3000, kT0, 30);
  auto slice = build_slice(log, {kT0, kT0 + 30 * kDay});
  for (auto kind : {StationaryKind::Baseline, StationaryKind::Preferential}) {
    auto model = StationaryModel::fit(slice, kind);
    for (std::uint32_t p : {1u, 4u}) {
      SimulationConfig cfg{{kT0 + 30 * kDay, kT0 + 44 * kDay}, 17, p};
      cfg.threads = p;
      const auto a = serialize_events(run(cfg, slice, model).log);
      const auto b = serialize_events(run(cfg, slice, model).log);
      EXPECT_EQ(a, b) << p;
      EXPECT_FALSE(a.empty());
    }
  }
}

TEST(Run, OutputSortedInsideWindowAndOwnershipUnique) {
  auto log = fixtures::random_log(3, 80, 50, 4000, kT0, 30);
  auto slice = build_slice(log, {kT0, kT0 + 30 * kDay});
  auto model = StationaryModel::fit(slice, StationaryKind::Preferential);
  SimulationConfig cfg{{kT0 + 30 * kDay, kT0 + 40 * kDay}, 5, 4};
  cfg.verify_invariants = true;
  auto res = run(cfg, slice, model);
  EXPECT_TRUE(std::is_sorted(res.log.begin(), res.log.end(), event_less));
  for (const auto& e : res.log) EXPECT_TRUE(cfg.window.contains(e.time));
  EXPECT_GT(res.stats.cross_partition_messages, 0u);
  EXPECT_GT(res.stats.migrations, 0u);
  EXPECT_EQ(res.repos.size(), slice.repo_count());
}

TEST(Run, HubCountersMatchRecomputedPopularity) {
  auto log = fixtures::random_log(4, 50, 30, 3000, kT0, 30);
  auto slice = build_slice(log, {kT0, kT0 + 30 * kDay});
  auto model = StationaryModel::fit(slice, StationaryKind::Preferential);
  SimulationConfig cfg{{kT0 + 30 * kDay, kT0 + 50 * kDay}, 9, 3};
  auto res = run(cfg, slice, model);

  // Oracle: distinct (user, repo) watchers / forkers over input slice + output.
  std::map<std::string, std::set<std::string>> watchers, forkers;
  std::map<std::string, std::set<std::string>> contributors;
  for (const auto* part : {&slice.events, &res.log})
    for (const auto& e : *part) {
      if (e.type == EventType::Watch) watchers[e.repo].insert(e.user);
      if (e.type == EventType::Fork) forkers[e.repo].insert(e.user);
      if (is_contribution(e.type)) contributors[e.repo].insert(e.user);
    }
  for (const auto& st : res.repos) {
    EXPECT_EQ(st.watch_count, watchers[st.repo_id].size()) << st.repo_id;
    EXPECT_EQ(st.fork_count, forkers[st.repo_id].size()) << st.repo_id;
    EXPECT_EQ(st.contributors, contributors[st.repo_id]) << st.repo_id;
  }
}

TEST(Run, CreateOfUnknownRepoMaterializesState) {
  auto log = EventLog({ev(kT0 + 14 * kDay - 10, EventType::Create, "u", "fresh"),
                       ev(kT0 + 14 * kDay - 5, EventType::Watch, "v", "fresh")});
  auto slice = build_slice(EventLog({ev(kT0, EventType::Push, "u", "old")}), {kT0, kT0 + kDay});
  auto model = NullModel::fit(log, {kT0 + 14 * kDay, kT0 + 28 * kDay});
  auto res = run({{kT0 + 14 * kDay, kT0 + 28 * kDay}, 0, 1}, slice, model);
  ASSERT_EQ(res.repos.size(), 2u);
  EXPECT_EQ(res.repos[0].repo_id, "fresh");
  EXPECT_EQ(res.repos[0].owner_id, "u");
  EXPECT_EQ(res.repos[0].watch_count, 1u);
  EXPECT_EQ(res.stats.new_repos, 1u);
}

TEST(Run, ModelErrorsCarryUserId) {
  auto slice = build_slice(EventLog({ev(kT0, EventType::Push, "u", "r")}), {kT0, kT0 + kDay});
  FailingModel model;
  try {
    run({{kT0 + kDay, kT0 + 10 * kDay}, 1, 1}, slice, model);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ModelStep);
    EXPECT_NE(std::string(e.what()).find("bad-user"), std::string::npos);
  }
}

TEST(Run, RejectsBadConfig) {
  auto slice = build_slice(EventLog({ev(kT0, EventType::Push, "u", "r")}), {kT0, kT0 + kDay});
  auto model = StationaryModel::fit(slice, StationaryKind::Baseline);
  EXPECT_THROW(run({{kT0, kT0}, 1, 1}, slice, model), Error);
  EXPECT_THROW(run({{kT0, kT0 + kDay}, 1, 0}, slice, model), Error);
}
