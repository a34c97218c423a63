#pragma once

#include <json.hpp>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "stlmarl/env/lane_env.hpp"
#include "stlmarl/env/particle_env.hpp"
#include "stlmarl/marl/trainer.hpp"

namespace stlmarl::harness {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct VariantSpec {
  marl::RewardMode reward = marl::RewardMode::Stl;
  bool shield = false;
  std::string tag() const;
};

struct ExperimentConfig {
  std::string env_kind = "particle";  // "particle" | "lane"
  env::ParticleConfig particle;
  env::LaneConfig lane;
  marl::TrainConfig train;
  std::vector<VariantSpec> variants;
  std::vector<std::uint64_t> seeds;
  int eval_episodes = 20;
  bool export_traces = false;
  double gamma_cbf = 0.5;
  nlohmann::json raw;  // source document, embedded into checkpoints
};

/// Strict parser: unknown keys anywhere in the document are hard errors.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

std::unique_ptr<env::MultiAgentEnv> make_env(const ExperimentConfig& cfg,
                                             bool shield_enabled);

/// Fraction of episodes with no collision event; order-independent.
/// Throws ConfigError on empty input.
double safety_rate(const std::vector<marl::MetricsRow>& episode_records);

struct RunSummaryRow {
  std::string variant;
  int agent = 0;
  double mean_return_stl = 0.0;
  double std_return_stl = 0.0;
  double mean_return_baseline = 0.0;
  double safety = 0.0;
  int eval_episodes = 0;
  int train_episodes = 0;
  int seeds = 0;
};

struct ExperimentResult {
  std::string out_dir;  // actual directory used (suffixed if needed)
  std::vector<RunSummaryRow> summary;
  bool all_succeeded = true;
};

/// Trains every (variant, seed) run, evaluates greedy episodes, and writes
/// per-run metrics.csv/run.json/checkpoint.json plus experiment-level
/// summary.csv and curves.csv. Never overwrites: an existing nonempty output
/// directory gets a numeric suffix.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir);

/// Rebuilds summary rows from the per-run metrics.csv/run.json files.
std::vector<RunSummaryRow> summarize_runs(const std::string& out_dir);

void write_summary_csv(const std::vector<RunSummaryRow>& rows,
                       const std::string& path);

/// Reads a metrics.csv back into rows (used by summarize and the tests).
std::vector<marl::MetricsRow> read_metrics_csv(const std::string& path);

}  // namespace stlmarl::harness
