#pragma once

#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "ghsim/cli/config.hpp"
#include "ghsim/cli/manifest.hpp"
#include "ghsim/cli/snapshot.hpp"
#include "ghsim/engine/partition.hpp"
#include "ghsim/engine/run.hpp"
#include "ghsim/ingest/io.hpp"
#include "ghsim/metrics/report.hpp"
#include "ghsim/synth/synth.hpp"

namespace ghsim::cli {

struct FitArgs {
  std::string model;
  std::string train;
  std::string window;  // empty: span of the training log
  std::string out;
  std::string config;
  std::string repo_meta;
  std::string user_meta;
  std::optional<std::uint32_t> threads;
};

struct SimulateArgs {
  std::string snapshot;
  std::string window;
  std::string out;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> partitions;
  std::optional<std::uint32_t> threads;
};

struct EvaluateArgs {
  std::string sim;
  std::string truth;
  std::string out;
  std::string window;  // empty: span of the truth log
  std::string communities;
  std::string history;
  std::string repo_meta;
  std::string user_meta;
  std::string config;
};

struct PartitionArgs {
  std::string train;
  std::uint32_t k = 2;
  std::string out;
  std::string window;
  std::string config;
  std::optional<std::uint64_t> seed;
};

struct SynthArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

namespace detail {

inline EventLog read_log(const std::string& path, RunManifest& m) {
  auto r = load_events(path);
  m.add_input(path);
  if (r.malformed) {
    std::cerr << path << ": skipped " << r.malformed << " malformed line(s)\n";
    m.details["malformed_lines"][path] = r.malformed;
  }
  return std::move(r.log);
}

inline TimeWindow window_or_span(const std::string& text, const EventLog& log) {
  if (!text.empty()) return parse_window(text);
  return log.span();
}

inline Config config_with(const std::string& path, RunManifest& m) {
  auto cfg = load_config(path);
  m.add_input(path);
  return cfg;
}

}  // namespace detail

inline int cmd_fit(const FitArgs& a) {
  ManifestScope scope("fit");
  auto& m = scope.manifest();
  const auto kind = parse_model_kind(a.model);
  auto cfg = detail::config_with(a.config, m);
  if (a.threads) cfg.threads = *a.threads;
  const auto log = detail::read_log(a.train, m);
  const auto window = detail::window_or_span(a.window, log);
  auto meta = load_metadata(a.repo_meta, a.user_meta);
  m.add_input(a.repo_meta);
  m.add_input(a.user_meta);

  const auto snap = fit_snapshot(kind, log, window, std::move(meta), cfg);
  save_snapshot(a.out, snap);
  m.config_hash = snap.config_hash;
  m.seed = cfg.seed;
  m.details["model"] = std::string(to_string(kind));
  m.details["window"] = format_window(window);
  m.details["training_events"] = log.restrict(window).size();
  m.details["new_entity"] = snap.wrapper != nullptr;
  m.add_output(a.out);
  scope.write(a.out);
  return 0;
}

inline int cmd_simulate(const SimulateArgs& a) {
  ManifestScope scope("simulate");
  auto& m = scope.manifest();
  auto cfg = detail::config_with(a.config, m);
  const auto snap = load_snapshot(a.snapshot);
  m.add_input(a.snapshot);
  const auto window = parse_window(a.window);

  SimulationConfig sc;
  sc.window = window;
  sc.seed = a.seed.value_or(cfg.seed);
  sc.partitions = a.partitions.value_or(cfg.partitions);
  sc.threads = a.threads.value_or(cfg.threads);
  sc.tick_seconds = static_cast<Timestamp>(std::llround(cfg.tick_hours * kSecondsPerHour));

  EventLog out;
  if (!window.empty()) {
    const auto slice = snap.slice();
    const auto model = snap.simulation_model(window);
    const auto result = run(sc, slice, *model);
    out = result.log;
    m.details["stats"] = {{"ticks", result.stats.ticks},
                          {"events", result.stats.events},
                          {"cross_partition_messages", result.stats.cross_partition_messages},
                          {"migrations", result.stats.migrations},
                          {"new_users", result.stats.new_users},
                          {"new_repos", result.stats.new_repos},
                          {"partition_cut", result.stats.partition_cut}};
  }
  save_events(a.out, out);
  m.config_hash = config_hash(cfg);
  m.seed = sc.seed;
  m.details["model"] = std::string(to_string(snap.kind));
  m.details["window"] = format_window(window);
  m.details["partitions"] = sc.partitions;
  m.add_output(a.out);
  scope.write(a.out);
  return 0;
}

inline std::unordered_set<std::string> load_community(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto id = ghsim::detail::trim(line);
    if (!id.empty() && id.front() != '#') out.emplace(id);
  }
  return out;
}

inline int cmd_evaluate(const EvaluateArgs& a) {
  ManifestScope scope("evaluate");
  auto& m = scope.manifest();
  const auto cfg = detail::config_with(a.config, m);
  const auto sim = detail::read_log(a.sim, m);
  const auto truth = detail::read_log(a.truth, m);

  EvaluateConfig ec;
  ec.window = detail::window_or_span(a.window, truth);
  ec.persistence = cfg.evaluate_persistence;
  ec.top = ec.depth = cfg.evaluate_top;
  ec.community_from_truth = false;
  if (!a.communities.empty()) {
    ec.community = load_community(a.communities);
    m.add_input(a.communities);
  }
  if (!a.history.empty())
    ec.history = detail::read_log(a.history, m).restrict({std::numeric_limits<Timestamp>::min(), ec.window.start});
  ec.meta = load_metadata(a.repo_meta, a.user_meta);
  m.add_input(a.repo_meta);
  m.add_input(a.user_meta);

  const auto report = evaluate(sim, truth, ec);
  {
    std::ofstream f(a.out);
    if (!f) fail(ErrorCode::Io, "cannot write " + a.out);
    f << report.to_json().dump(2) << '\n';
  }
  const auto text_path = a.out + ".txt";
  {
    std::ofstream f(text_path);
    if (!f) fail(ErrorCode::Io, "cannot write " + text_path);
    f << report.to_table();
  }
  std::cout << report.to_table();
  m.config_hash = config_hash(cfg);
  m.details["window"] = format_window(ec.window);
  m.add_output(a.out);
  m.add_output(text_path);
  scope.write(a.out);
  return 0;
}

inline int cmd_partition(const PartitionArgs& a) {
  ManifestScope scope("partition");
  auto& m = scope.manifest();
  const auto cfg = detail::config_with(a.config, m);
  if (a.k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  const auto log = detail::read_log(a.train, m);
  const auto slice = build_slice(log, detail::window_or_span(a.window, log));
  const auto graph = interaction_graph(slice);
  PartitionOptions po;
  po.seed = a.seed.value_or(cfg.seed);
  const auto result = partition_graph(graph, a.k, po);
  {
    std::ofstream f(a.out);
    if (!f) fail(ErrorCode::Io, "cannot write " + a.out);
    f << "kind,id,part\n";
    for (std::size_t u = 0; u < slice.user_count(); ++u) f << "user," << slice.user_ids[u] << ',' << result.part[u] << '\n';
    for (std::size_t r = 0; r < slice.repo_count(); ++r)
      f << "repo," << slice.repo_ids[r] << ',' << result.part[slice.user_count() + r] << '\n';
  }
  m.config_hash = config_hash(cfg);
  m.seed = po.seed;
  m.details["k"] = a.k;
  m.details["vertices"] = graph.size();
  m.details["cut"] = result.cut;
  m.details["part_weights"] = result.part_weights;
  m.add_output(a.out);
  scope.write(a.out);
  return 0;
}

inline int cmd_synth(const SynthArgs& a) {
  ManifestScope scope("synth");
  auto& m = scope.manifest();
  auto cfg = detail::config_with(a.config, m);
  if (a.seed) cfg.synth.seed = *a.seed;
  const auto out = generate(cfg.synth);
  save_events(a.out, out.log);
  const auto params = a.out + ".params.json";
  const auto repos = a.out + ".repos.csv";
  const auto users = a.out + ".users.csv";
  {
    std::ofstream f(params);
    if (!f) fail(ErrorCode::Io, "cannot write " + params);
    f << out.record.dump(2) << '\n';
  }
  {
    std::ofstream f(repos);
    if (!f) fail(ErrorCode::Io, "cannot write " + repos);
    write_repo_meta(f, out.meta);
  }
  {
    std::ofstream f(users);
    if (!f) fail(ErrorCode::Io, "cannot write " + users);
    write_user_meta(f, out.meta);
  }
  m.config_hash = config_hash(cfg);
  m.seed = cfg.synth.seed;
  m.details["events"] = out.log.size();
  m.details["window"] = format_window(cfg.synth.window());
  for (const auto& p : {a.out, params, repos, users}) m.add_output(p);
  scope.write(a.out);
  return 0;
}

/// Runs a command, mapping failures onto exit codes: 2 for usage or config
/// problems, 3 for data or runtime problems.
template <class F>
int guarded(F&& command) {
  try {
    return command();
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return err.exit_code();
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 3;
  }
}

}  // namespace ghsim::cli
