#include <iostream>

#include <CLI11.hpp>

#include "ghsim/cli/commands.hpp"

namespace {

template <class T>
void optional_flag(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& doc) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, doc);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ghsim::cli;
  CLI::App app{"Agent-based simulator for GitHub-style event logs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit a model on a training log and write a snapshot");
  f->add_option("--model", fit.model, "null, baseline, ground, pref, lpe or bayes")->required();
  f->add_option("--train", fit.train, "Training event log (.jsonl or .csv)")->required();
  f->add_option("--window", fit.window, "Training window START/END (default: whole log)");
  f->add_option("--out", fit.out, "Snapshot path")->required();
  f->add_option("--config", fit.config, "YAML config file");
  f->add_option("--repo-meta", fit.repo_meta, "Repo metadata CSV");
  f->add_option("--user-meta", fit.user_meta, "User metadata CSV");
  optional_flag(f, "--threads", fit.threads, "Worker threads");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate a window from a snapshot");
  s->add_option("--snapshot", sim.snapshot, "Snapshot written by fit")->required();
  s->add_option("--window", sim.window, "Simulation window START/END")->required();
  s->add_option("--out", sim.out, "Output event log")->required();
  s->add_option("--config", sim.config, "YAML config file");
  optional_flag(s, "--seed", sim.seed, "Simulation seed");
  optional_flag(s, "--partitions", sim.partitions, "Number of partitions");
  optional_flag(s, "--threads", sim.threads, "Worker threads");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score a simulated log against ground truth");
  e->add_option("--sim", ev.sim, "Simulated event log")->required();
  e->add_option("--truth", ev.truth, "Ground-truth event log")->required();
  e->add_option("--out", ev.out, "JSON report path (text report at PATH.txt)")->required();
  e->add_option("--window", ev.window, "Evaluation window START/END (default: truth span)");
  e->add_option("--communities", ev.communities, "File with one community user id per line");
  e->add_option("--history", ev.history, "Events before the window, for ownership and entity age");
  e->add_option("--repo-meta", ev.repo_meta, "Repo metadata CSV");
  e->add_option("--user-meta", ev.user_meta, "User metadata CSV");
  e->add_option("--config", ev.config, "YAML config file");

  PartitionArgs pa;
  auto* p = app.add_subcommand("partition", "Partition the user-repo interaction graph");
  p->add_option("--train", pa.train, "Event log")->required();
  p->add_option("-k", pa.k, "Number of parts")->required();
  p->add_option("--out", pa.out, "Assignment CSV")->required();
  p->add_option("--window", pa.window, "Window START/END (default: whole log)");
  p->add_option("--config", pa.config, "YAML config file");
  optional_flag(p, "--seed", pa.seed, "Partitioner seed");

  SynthArgs sy;
  auto* y = app.add_subcommand("synth", "Generate a synthetic event log with known parameters");
  y->add_option("--config", sy.config, "YAML config file (synth.* keys)");
  y->add_option("--out", sy.out, "Output event log")->required();
  optional_flag(y, "--seed", sy.seed, "Generator seed (overrides synth.seed)");

  app.add_subcommand("config-keys", "Print every config key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : 2;
  }

  return guarded([&] {
    if (*f) return cmd_fit(fit);
    if (*s) return cmd_simulate(sim);
    if (*e) return cmd_evaluate(ev);
    if (*p) return cmd_partition(pa);
    if (*y) return cmd_synth(sy);
    std::cout << config_table();
    return 0;
  });
}
