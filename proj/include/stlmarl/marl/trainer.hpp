#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "stlmarl/env/multi_agent_env.hpp"
#include "stlmarl/marl/losses.hpp"
#include "stlmarl/nn/adam.hpp"
#include "stlmarl/nn/checkpoint.hpp"
#include "stlmarl/nn/policy.hpp"

namespace stlmarl::marl {

enum class RewardMode { Stl, Baseline };

struct TrainConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double entropy_coef = 0.01;
  int rollout_len = 15;  // L
  int batch_size = 0;    // transitions per minibatch; 0 = the full rollout
  int episodes = 100;    // M
  int max_steps = 0;     // t_max; 0 = the environment's episode length
  double lr = 1e-3;
  int epochs = 4;  // update epochs per rollout
  int hidden = 64;
  RewardMode reward_mode = RewardMode::Stl;
  bool shield_enabled = false;  // informational; the environment owns the shield
  std::uint64_t seed = 1;
  bool normalize_advantages = true;
  double max_grad_norm = 10.0;  // 0 disables clipping
  double policy_out_gain = 0.01;

  void validate() const;
};

struct StepRecord {
  nn::Vec global_state;
  std::vector<nn::Vec> obs;
  std::vector<int> actions;  // applied actions
  std::vector<double> logp;  // behavior log-prob of the applied action
  std::vector<double> value;
  std::vector<double> reward;  // training reward (mode-selected)
  std::vector<double> reward_stl;
  std::vector<double> reward_baseline;
};

struct Window {
  std::vector<StepRecord> steps;
  std::vector<nn::Vec> actor_h0;  // per-agent hidden states at window start
  std::vector<nn::Vec> critic_h0;
  std::vector<double> bootstrap;  // per agent; 0 when the episode ended
  bool terminal = false;
  std::vector<std::vector<double>> advantages;  // [agent][step]
  std::vector<std::vector<double>> returns;
};

struct RolloutBuffer {
  std::vector<Window> windows;
  int collisions = 0;
  int shield_fallbacks = 0;
  std::vector<double> return_stl;       // per agent, undiscounted episode sum
  std::vector<double> return_baseline;  // per agent
  std::vector<bool> reached_dest;
  std::size_t transitions() const;
};

struct MetricsRow {
  int episode = 0;
  int agent = 0;
  double return_stl = 0.0;
  double return_baseline = 0.0;
  int collisions = 0;
  bool reached_dest = false;
  int shield_fallbacks = 0;
};

struct AgentLearner {
  nn::PolicyParams actor;
  nn::PolicyParams critic;
  nn::Adam actor_opt;
  nn::Adam critic_opt;
};

/// Centralized-training/decentralized-execution trainer: shielded rollouts in
/// windows of length L, STL-robustness (or baseline) rewards, GAE advantages,
/// clipped actor objective and clipped value loss, per-agent updates.
class Trainer {
public:
  Trainer(TrainConfig cfg, env::MultiAgentEnv& env);

  /// Full run of cfg.episodes episodes starting at `start_episode` (used for
  /// resuming); appends one metrics row per agent per episode.
  std::vector<MetricsRow> train();

  /// Collects one complete episode in windows of length L.
  RolloutBuffer collect_episode(int episode_index);

  /// One update phase (cfg.epochs over the rollout) for every agent.
  void update(RolloutBuffer& buffer);

  /// Greedy-policy evaluation episodes (argmax actions, no exploration).
  std::vector<MetricsRow> evaluate(int episodes, int episode_tag_base = 0);

  std::vector<AgentLearner>& learners() { return learners_; }
  int trained_episodes() const { return trained_episodes_; }

  /// Per-episode hook, called after the update with the fresh buffer (used
  /// for trace export and audits).
  std::function<void(int episode, const RolloutBuffer&, const stl::Trace&)>
      episode_hook;

  void save_checkpoint(const std::string& path, const nlohmann::json& meta) const;
  void load_checkpoint(const std::string& path);

private:
  nn::Vec concat_obs(const std::vector<nn::Vec>& obs) const;
  void update_agent(int agent, RolloutBuffer& buffer, std::mt19937_64& rng);

  TrainConfig cfg_;
  env::MultiAgentEnv& env_;
  std::vector<AgentLearner> learners_;
  std::mt19937_64 policy_rng_;
  int trained_episodes_ = 0;
};

}  // namespace stlmarl::marl
