#pragma once

#include <cmath>
#include <vector>

#include "ghsim/core/random.hpp"
#include "ghsim/core/time.hpp"
#include "ghsim/engine/model.hpp"

namespace ghsim {

struct SimulationConfig {
  TimeWindow window;
  std::uint64_t seed = 0;
  std::uint32_t partitions = 1;
  Timestamp tick_seconds = kSecondsPerHour;
  std::uint32_t threads = 1;
  std::uint32_t one_time_redraws = 1;
  bool verify_invariants = false;  // check ownership uniqueness after every tick

  void validate() const {
    if (window.end <= window.start) fail(ErrorCode::InvalidArgument, "simulation window must satisfy end > start");
    if (partitions < 1) fail(ErrorCode::InvalidArgument, "partitions must be >= 1");
    if (tick_seconds < 1) fail(ErrorCode::InvalidArgument, "tick must be >= 1 second");
  }
};

// Stream tags for derive_seed.
inline constexpr std::uint64_t kClockStream = 1;
inline constexpr std::uint64_t kStepStream = 2;

/// Homogeneous Poisson arrivals with exponential gaps, floored to whole seconds.
class PoissonClock {
 public:
  PoissonClock(std::uint64_t seed, double rate_per_day, TimeWindow window)
      : rng_(seed), rate_per_second_(rate_per_day / kSecondsPerDay), window_(window),
        t_(static_cast<double>(window.start)) {}

  /// Next arrival, or false once the window is exhausted.
  bool next(Timestamp& out) {
    if (!(rate_per_second_ > 0)) return false;
    t_ += exponential(rng_, rate_per_second_);
    const auto ts = static_cast<Timestamp>(std::floor(t_));
    if (t_ >= static_cast<double>(window_.end) || ts >= window_.end) {
      rate_per_second_ = 0;
      return false;
    }
    out = ts;
    return true;
  }

 private:
  Rng rng_;
  double rate_per_second_;
  TimeWindow window_;
  double t_;
};

inline std::vector<Timestamp> poisson_arrivals(std::uint64_t seed, double rate_per_day, TimeWindow window) {
  std::vector<Timestamp> out;
  PoissonClock clock(seed, rate_per_day, window);
  Timestamp t;
  while (clock.next(t)) out.push_back(t);
  return out;
}

/// Wake times for every agent of `model`, seeded from (cfg.seed, agent id).
inline std::vector<std::vector<Timestamp>> schedule_agents(const AgentModel& model, const SimulationConfig& cfg) {
  std::vector<std::vector<Timestamp>> out(model.agent_count());
  for (std::size_t a = 0; a < model.agent_count(); ++a)
    out[a] = poisson_arrivals(derive_seed(cfg.seed, model.agent_id(a), kClockStream), model.rate_per_day(a), cfg.window);
  return out;
}

}  // namespace ghsim
