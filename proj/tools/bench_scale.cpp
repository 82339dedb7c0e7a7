// End-to-end scale run: synth training log -> fit -> simulate, reporting wall
// time and peak memory as JSON on stdout.
#include <chrono>
#include <cmath>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "ghsim/cli/commands.hpp"
#include "ghsim/cli/snapshot.hpp"
#include "ghsim/engine/run.hpp"
#include "ghsim/synth/synth.hpp"

int main(int argc, char** argv) {
  using namespace ghsim;
  using clock = std::chrono::steady_clock;
  CLI::App app{"Scale benchmark: fit + simulate on a synthetic population"};
  std::size_t agents = 100000;
  double events_per_agent = 10;
  double days = 14;
  std::string model = "baseline";
  std::uint32_t partitions = 1, threads = 1;
  std::uint64_t seed = 1;
  app.add_option("--agents", agents, "Users in the synthetic population");
  app.add_option("--events-per-agent", events_per_agent, "Mean events per agent in each window");
  app.add_option("--days", days, "Length of the training and of the simulated window");
  app.add_option("--model", model, "Model to fit (see ghsim fit)");
  app.add_option("--partitions", partitions, "Simulation partitions");
  app.add_option("--threads", threads, "Worker threads");
  app.add_option("--seed", seed, "Seed");
  CLI11_PARSE(app, argc, argv);

  return cli::guarded([&] {
    SynthConfig sc;
    sc.n_users = agents;
    sc.n_repos = agents;
    sc.days = days;
    sc.seed = seed;
    sc.new_user_share = 0;
    // Mean of exp(N(mu, s^2)) is exp(mu + s^2 / 2).
    sc.rate_log_mean = std::log(events_per_agent / days) - 0.5 * sc.rate_log_sigma * sc.rate_log_sigma;

    const auto t0 = clock::now();
    const auto data = generate(sc);
    const auto t1 = clock::now();
    cli::Config cfg;
    cfg.seed = seed;
    cfg.threads = threads;
    const auto snap = cli::fit_snapshot(cli::parse_model_kind(model), data.log, sc.window(), data.meta, cfg);
    const auto slice = snap.slice();
    const auto t2 = clock::now();
    SimulationConfig sim;
    sim.window = {sc.window().end, sc.window().end + (sc.window().end - sc.window().start)};
    sim.seed = seed;
    sim.partitions = partitions;
    sim.threads = threads;
    const auto result = run(sim, slice, *snap.simulation_model(sim.window));
    const auto t3 = clock::now();

    auto secs = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };
    nlohmann::json out{{"agents", agents},
                       {"model", model},
                       {"partitions", partitions},
                       {"threads", threads},
                       {"hardware_threads", std::thread::hardware_concurrency()},
                       {"training_events", data.log.size()},
                       {"simulated_events", result.log.size()},
                       {"synth_seconds", secs(t0, t1)},
                       {"fit_seconds", secs(t1, t2)},
                       {"simulate_seconds", secs(t2, t3)},
                       {"fit_simulate_seconds", secs(t1, t3)},
                       {"cross_partition_messages", result.stats.cross_partition_messages},
                       {"peak_memory_kib", cli::peak_memory_kib()}};
    std::cout << out.dump() << std::endl;
    return 0;
  });
}
