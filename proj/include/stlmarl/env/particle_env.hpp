#pragma once

#include <Eigen/Dense>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "stlmarl/env/multi_agent_env.hpp"

namespace stlmarl::env {

enum class ParticleTask { CoordinationII, SpreadII };

/// Discrete particle actions; accelerations of fixed magnitude per axis.
enum class ParticleAction { Stay = 0, Left, Right, Up, Down };
inline constexpr int kParticleActionCount = 5;

struct ParticleConfig {
  int n_agents = 3;
  double arena = 1.0;  // half-width
  double dt = 0.1;
  double damping = 0.25;
  double force = 1.0;
  double mass = 1.0;
  double collision_radius = 0.1;
  double collision_penalty = -1.0;
  double c1 = 1.0;  // goal-stage distance weight
  double c2 = 0.1;  // other-stage distance weight (sign as published)
  int episode_len = 25;
  ParticleTask task = ParticleTask::CoordinationII;
  stl::FormulaConfig stl_params;

  void validate() const;
};

struct ParticleState {
  std::vector<Eigen::Vector2d> pos;
  std::vector<Eigen::Vector2d> vel;
  std::vector<Eigen::Vector2d> landmarks_first;
  std::vector<Eigen::Vector2d> landmarks_second;
  std::vector<bool> first_visited;   // per first-stage landmark, latched
  std::vector<bool> second_visited;  // per second-stage landmark, latched
  bool second_stage = false;         // goal stage flag
  int step_count = 0;
};

/// Observation of one agent: own velocity, relative positions of all
/// first-stage then second-stage landmarks, then relative positions of the
/// other agents in index order.
Vec particle_observe(const ParticleConfig& cfg, const ParticleState& s, int agent);
int particle_obs_dim(const ParticleConfig& cfg);

/// Shared baseline reward of the published tasks, including the collision
/// penalty for this step's events.
double particle_baseline_reward(const ParticleConfig& cfg, const ParticleState& s,
                                int collision_events);

/// Per-agent formula texts over the distance channels; all parse via
/// parse_formula.
std::vector<std::vector<std::string>> particle_formula_texts(const ParticleConfig& cfg);

std::vector<std::string> particle_channel_names(const ParticleConfig& cfg);
std::map<std::string, double> particle_trace_row(const ParticleConfig& cfg,
                                                 const ParticleState& s);

class ParticleEnv : public MultiAgentEnv {
public:
  explicit ParticleEnv(ParticleConfig cfg);

  int num_agents() const override { return cfg_.n_agents; }
  int obs_dim() const override { return particle_obs_dim(cfg_); }
  int num_actions() const override { return kParticleActionCount; }
  int episode_len() const override { return cfg_.episode_len; }

  std::vector<Vec> reset(std::uint64_t seed) override;
  EnvStep step(const std::vector<int>& requested_actions) override;

  const stl::Trace& episode_trace() const override { return trace_; }
  const std::vector<std::vector<stl::FormulaPtr>>& formulas() const override {
    return formulas_;
  }
  const stl::FormulaConfig& formula_config() const override {
    return cfg_.stl_params;
  }
  bool reached_dest(int agent) const override;

  const ParticleConfig& config() const { return cfg_; }
  const ParticleState& state() const { return state_; }
  /// Scenario injection for tests and scripted episodes.
  void set_state(ParticleState s) { state_ = std::move(s); }

private:
  void update_visit_flags();

  ParticleConfig cfg_;
  ParticleState state_;
  stl::Trace trace_;
  std::vector<std::vector<stl::FormulaPtr>> formulas_;
};

}  // namespace stlmarl::env
