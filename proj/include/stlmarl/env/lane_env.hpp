#pragma once

#include <map>
#include <string>
#include <vector>

#include "stlmarl/env/lane_world.hpp"
#include "stlmarl/shield/cbf_shield.hpp"

namespace stlmarl::env {

/// Per-agent, per-step shield audit record.
struct LaneShieldAudit {
  int agent = 0;
  int requested = 0;
  int applied = 0;
  bool shield_active = false;
  bool feasible = false;
  bool fallback = false;
  bool open_loop = false;
  double h_front_current = std::numeric_limits<double>::infinity();
  double h_front_target = std::numeric_limits<double>::infinity();
  double h_back_target = std::numeric_limits<double>::infinity();
  double min_slack = std::numeric_limits<double>::infinity();
  Control control;
  shield::QpProblem problem;  // the applied problem, for invariance rechecks
};

Vec lane_observe(const LaneWorld& w, int agent);
int lane_obs_dim(const LaneConfig& cfg);

/// w1 |v|/v_max - w2 I_col + w3 (c - |p - p_dest|).
double lane_baseline_reward(const LaneWorld& w, int agent, bool collided);

std::vector<std::vector<std::string>> lane_formula_texts(const LaneConfig& cfg);
std::vector<std::string> lane_channel_names(const LaneConfig& cfg);
std::map<std::string, double> lane_trace_row(const LaneWorld& w);

class LaneEnv : public MultiAgentEnv {
public:
  LaneEnv(LaneConfig cfg, bool shield_enabled, double gamma_cbf = 0.5);

  int num_agents() const override { return cfg_.n_agents; }
  int obs_dim() const override { return lane_obs_dim(cfg_); }
  int num_actions() const override { return lane_action_count(cfg_); }
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
  bool reached_dest(int agent) const override { return reached_[agent]; }

  const LaneConfig& config() const { return cfg_; }
  const LaneWorld& world() const { return world_; }
  void set_world(LaneWorld w) { world_ = std::move(w); }
  bool shield_enabled() const { return shield_enabled_; }
  double gamma_cbf() const { return gamma_cbf_; }
  const std::vector<LaneShieldAudit>& last_audits() const { return audits_; }

private:
  LaneConfig cfg_;
  bool shield_enabled_;
  double gamma_cbf_;
  LaneWorld world_;
  stl::Trace trace_;
  std::vector<std::vector<stl::FormulaPtr>> formulas_;
  std::vector<bool> reached_;
  std::vector<LaneShieldAudit> audits_;
};

}  // namespace stlmarl::env
