#pragma once

#include <string>
#include <vector>

#include "ghsim/core/event.hpp"
#include "ghsim/core/random.hpp"
#include "ghsim/core/time.hpp"
#include "ghsim/ingest/bipartite.hpp"
#include "ghsim/models/features.hpp"

namespace fixtures {

inline constexpr ghsim::Timestamp kDay = ghsim::kSecondsPerDay;
inline constexpr ghsim::Timestamp kHour = ghsim::kSecondsPerHour;
inline constexpr ghsim::Timestamp kT0 = 1501545600;  // 2017-08-01T00:00:00Z

inline ghsim::Event ev(ghsim::Timestamp t, ghsim::EventType type, std::string user, std::string repo) {
  return {t, type, std::move(user), std::move(repo)};
}

/// Random log: `users` users, `repos` repos, `n` events uniformly spread over
/// [start, start + days). Each repo gets a Create by a deterministic owner first.
inline ghsim::EventLog random_log(std::uint64_t seed, int users, int repos, int n, ghsim::Timestamp start, int days) {
  ghsim::Rng g(seed);
  std::vector<ghsim::Event> out;
  for (int r = 0; r < repos; ++r)
    out.push_back(ev(start, ghsim::EventType::Create, "u" + std::to_string(r % users), "r" + std::to_string(r)));
  for (int i = 0; i < n; ++i) {
    const auto t = start + 1 + static_cast<ghsim::Timestamp>(ghsim::uniform_index(g, std::uint64_t(days) * kDay - 1));
    const auto type = ghsim::kAllEventTypes[ghsim::uniform_index(g, ghsim::kEventTypeCount)];
    out.push_back(ev(t, type, "u" + std::to_string(ghsim::uniform_index(g, users)),
                     "r" + std::to_string(ghsim::uniform_index(g, repos))));
  }
  return ghsim::EventLog(std::move(out));
}


struct PlantedSplit {
  ghsim::BipartiteGraph train, held_out;
};

/// Two user blocks x two repo blocks; each pair is an edge with probability
/// p_in inside a block and p_out across. Each edge is held out with
/// probability `held_fraction`.
inline PlantedSplit planted_blocks(std::uint64_t seed, int users = 200, int repos = 200, double p_in = 0.3,
                                   double p_out = 0.02, double held_fraction = 0.2) {
  ghsim::Rng g(seed);
  std::vector<ghsim::BipartiteGraph::Triplet> train, held;
  for (int u = 0; u < users; ++u)
    for (int r = 0; r < repos; ++r) {
      const bool same = (u < users / 2) == (r < repos / 2);
      if (ghsim::uniform01(g) >= (same ? p_in : p_out)) continue;
      auto& dst = ghsim::uniform01(g) < held_fraction ? held : train;
      dst.push_back({"u" + std::to_string(u), "r" + std::to_string(r), 1.0});
    }
  return {ghsim::BipartiteGraph::from_triplets(ghsim::EventType::Push, std::move(train)),
          ghsim::BipartiteGraph::from_triplets(ghsim::EventType::Push, std::move(held))};
}

struct PlantedTable {
  ghsim::FeatureTable table;
  std::vector<double> y;
};

/// target = slope * f1 + N(0, sigma); f1 and the decoys are U[0, 1).
inline PlantedTable planted_s3d(std::uint64_t seed, std::size_t n = 5000, int decoys = 9, double sigma = 0.1,
                                double slope = 5.0) {
  ghsim::Rng g(seed);
  PlantedTable out;
  out.table.names.push_back("f1");
  for (int d = 0; d < decoys; ++d) out.table.names.push_back("decoy" + std::to_string(d));
  for (std::size_t i = 0; i < n; ++i) {
    const double f1 = ghsim::uniform01(g);
    out.table.values.push_back(f1);
    for (int d = 0; d < decoys; ++d) out.table.values.push_back(ghsim::uniform01(g));
    out.y.push_back(slope * f1 + sigma * ghsim::standard_normal(g));
  }
  return out;
}

}  // namespace fixtures
