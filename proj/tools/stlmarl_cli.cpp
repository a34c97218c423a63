#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "stlmarl/harness/experiment.hpp"
#include "stlmarl/harness/monitor.hpp"
#include "stlmarl/marl/trainer.hpp"
#include "stlmarl/nn/checkpoint.hpp"

using namespace stlmarl;

namespace {

int cmd_train(const std::string& config_path, const std::string& out_dir,
              long long seed_override) {
  harness::ExperimentConfig cfg = harness::load_experiment_config(config_path);
  if (seed_override >= 0)
    cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
  auto result = harness::run_experiment(cfg, out_dir);
  std::printf("experiment written to %s\n", result.out_dir.c_str());
  for (const auto& row : result.summary)
    std::printf("%s agent %d: return %.3f +- %.3f, safety %.2f\n",
                row.variant.c_str(), row.agent, row.mean_return_stl,
                row.std_return_stl, row.safety);
  return result.all_succeeded ? 0 : 1;
}

int cmd_eval(const std::string& checkpoint_path, int episodes) {
  nn::Checkpoint ck = nn::Checkpoint::load(checkpoint_path);
  if (!ck.meta.count("experiment"))
    throw harness::ConfigError("checkpoint has no embedded experiment config");
  harness::ExperimentConfig cfg =
      harness::parse_experiment_config(ck.meta.at("experiment"));
  std::string tag = ck.meta.value("variant", "stl_noshield");
  bool shield = tag.find("_shield") != std::string::npos;
  auto env = harness::make_env(cfg, shield);
  marl::TrainConfig tc = cfg.train;
  tc.seed = ck.meta.value("seed", 1);
  tc.reward_mode = tag.rfind("stl", 0) == 0 ? marl::RewardMode::Stl
                                            : marl::RewardMode::Baseline;
  marl::Trainer trainer(tc, *env);
  trainer.load_checkpoint(checkpoint_path);
  auto rows = trainer.evaluate(episodes);
  std::printf("episode,agent,return_stl,return_baseline,collisions,reached_dest\n");
  for (const auto& r : rows)
    std::printf("%d,%d,%.6f,%.6f,%d,%d\n", r.episode, r.agent, r.return_stl,
                r.return_baseline, r.collisions, r.reached_dest ? 1 : 0);
  double safety = harness::safety_rate(rows);
  std::printf("safety_rate %.4f over %d episodes\n", safety, episodes);
  return 0;
}

int cmd_summarize(const std::string& runs_dir, const std::string& out_file) {
  auto rows = harness::summarize_runs(runs_dir);
  if (!out_file.empty()) {
    harness::write_summary_csv(rows, out_file);
    std::printf("summary written to %s\n", out_file.c_str());
  }
  for (const auto& row : rows)
    std::printf("%s agent %d: return %.3f +- %.3f, safety %.2f\n",
                row.variant.c_str(), row.agent, row.mean_return_stl,
                row.std_return_stl, row.safety);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STL-guided multi-agent RL workbench"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Run the experiment matrix from a config");
  std::string config_path, out_dir = "runs";
  long long seed_override = -1;
  train->add_option("--config", config_path, "Experiment config (JSON)")->required();
  train->add_option("--out", out_dir, "Output directory");
  train->add_option("--seed", seed_override, "Override the config's seed list");

  auto* eval = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  std::string checkpoint_path;
  int episodes = 20;
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes");

  auto* monitor = app.add_subcommand("monitor", "Evaluate an STL formula on a trace");
  std::string formula_path, trace_path;
  std::size_t t = 0;
  monitor->add_option("--formula", formula_path, "Formula file")->required();
  monitor->add_option("--trace", trace_path, "Trace CSV")->required();
  monitor->add_option("--t", t, "Evaluation step index");

  auto* summarize = app.add_subcommand("summarize", "Rebuild a summary from run metrics");
  std::string runs_dir, summary_out;
  summarize->add_option("--runs", runs_dir, "Experiment output directory")->required();
  summarize->add_option("--out", summary_out, "Where to write summary.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, out_dir, seed_override);
    if (eval->parsed()) return cmd_eval(checkpoint_path, episodes);
    if (monitor->parsed())
      return harness::run_monitor(formula_path, trace_path, t, std::cout, std::cerr);
    if (summarize->parsed()) return cmd_summarize(runs_dir, summary_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
