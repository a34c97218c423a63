#include "stlmarl/env/lane_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "stlmarl/stl/parser.hpp"

namespace stlmarl::env {

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string margin_channel(int i, int j) {
  return "margin_a" + std::to_string(i + 1) + "_a" + std::to_string(j + 1);
}
std::string agent_channel(const char* base, int i) {
  return std::string(base) + "_a" + std::to_string(i + 1);
}

}  // namespace

int lane_obs_dim(const LaneConfig& cfg) { return 10 + 5 * (cfg.n_agents - 1); }

Vec lane_observe(const LaneWorld& w, int agent) {
  const LaneConfig& cfg = w.cfg;
  const VehicleState& s = w.agents[agent];
  const double x_scale = cfg.x_road + cfg.dest_offset;
  Vec obs(lane_obs_dim(cfg));
  int k = 0;
  obs[k++] = s.pos.x() / x_scale;
  obs[k++] = s.pos.y() / cfg.road_width();
  obs[k++] = s.v / cfg.v_max;
  obs[k++] = s.a / cfg.a_limit;
  obs[k++] = s.psi;
  obs[k++] = (w.dest[agent].x() - s.pos.x()) / x_scale;
  obs[k++] = (w.dest[agent].y() - s.pos.y()) / cfg.road_width();
  obs[k++] = (w.road_point.x() - s.pos.x()) / x_scale;
  obs[k++] = (w.road_point.y() - s.pos.y()) / cfg.road_width();
  obs[k++] = static_cast<double>(s.t_wait) / cfg.t_max_wait;
  for (int j = 0; j < cfg.n_agents; ++j) {
    if (j == agent) continue;
    const VehicleState& o = w.agents[j];
    obs[k++] = (o.pos.x() - s.pos.x()) / x_scale;
    obs[k++] = (o.pos.y() - s.pos.y()) / cfg.road_width();
    obs[k++] = o.v / cfg.v_max;
    obs[k++] = o.a / cfg.a_limit;
    obs[k++] = o.psi;
  }
  return obs;
}

double lane_baseline_reward(const LaneWorld& w, int agent, bool collided) {
  const LaneConfig& cfg = w.cfg;
  const VehicleState& s = w.agents[agent];
  double r_speed = std::fabs(s.v) / cfg.v_max;
  double r_col = collided ? -1.0 : 0.0;
  double r_dest = -(s.pos - w.dest[agent]).norm() + w.dest_initial_dist[agent];
  return cfg.w1 * r_speed + cfg.w2 * r_col + cfg.w3 * r_dest;
}

std::vector<std::string> lane_channel_names(const LaneConfig& cfg) {
  std::vector<std::string> names;
  for (int i = 0; i < cfg.n_agents; ++i) {
    for (int j = 0; j < cfg.n_agents; ++j)
      if (j != i) names.push_back(margin_channel(i, j));
    names.push_back(agent_channel("dist_dest", i));
    names.push_back(agent_channel("dist_road", i));
    names.push_back(agent_channel("vgap", i));
    names.push_back(agent_channel("t_wait", i));
    names.push_back(agent_channel("speed", i));
  }
  return names;
}

std::map<std::string, double> lane_trace_row(const LaneWorld& w) {
  const LaneConfig& cfg = w.cfg;
  std::map<std::string, double> row;
  for (int i = 0; i < cfg.n_agents; ++i) {
    const VehicleState& s = w.agents[i];
    for (int j = 0; j < cfg.n_agents; ++j) {
      if (j == i) continue;
      const VehicleState& o = w.agents[j];
      double gap = (s.pos - o.pos).norm();
      double margin = gap - (o.v - s.v) * (o.v - s.v) / (2.0 * cfg.a_limit);
      if (!cfg.phi1_all_pairs && std::abs(s.lane - o.lane) > 1) {
        // Out-of-scope pair this step: never counts as a violation.
        margin = std::max(margin, cfg.stl_params.eps1);
      }
      row[margin_channel(i, j)] = margin;
    }
    row[agent_channel("dist_dest", i)] = (s.pos - w.dest[i]).norm();
    row[agent_channel("dist_road", i)] = (s.pos - w.road_point).norm();
    row[agent_channel("vgap", i)] = s.v - cfg.v_stop;
    row[agent_channel("t_wait", i)] = static_cast<double>(s.t_wait);
    row[agent_channel("speed", i)] = s.v;
  }
  return row;
}

std::vector<std::vector<std::string>> lane_formula_texts(const LaneConfig& cfg) {
  const auto& sp = cfg.stl_params;
  std::vector<std::vector<std::string>> per_agent(cfg.n_agents);
  for (int i = 0; i < cfg.n_agents; ++i) {
    std::string phi1;
    if (cfg.n_agents > 1) {
      std::string conj;
      for (int j = 0; j < cfg.n_agents; ++j) {
        if (j == i) continue;
        if (!conj.empty()) conj += " & ";
        conj += "(" + margin_channel(i, j) + " >= " + fmt_num(sp.eps1) + ")";
      }
      phi1 = "G[0,T-1] (" + conj + ")";
    } else {
      phi1 = "G[0,T-1] (0 >= -1)";  // no other agents: trivially safe
    }
    std::string dd = agent_channel("dist_dest", i);
    std::string dr = agent_channel("dist_road", i);
    std::string vg = agent_channel("vgap", i);
    std::string tw = agent_channel("t_wait", i);
    std::string phi2 = "F[0,T-1] (" + dd + " <= " + fmt_num(sp.eps2) + ")";
    std::string phi3 = "G[0,T-1] (!(" + dr + " <= " + fmt_num(cfg.road_radius) +
                       ") | F[0," + std::to_string(cfg.tau) + "] (" + vg +
                       " <= 0))";
    std::string phi4 = "G[0,T-1] (!(" + dr + " <= " + fmt_num(cfg.road_radius) +
                       ") | (" + tw + " <= " + std::to_string(cfg.t_max_wait - 1) +
                       "))";
    per_agent[i] = {phi1, phi2, phi3, phi4};
  }
  return per_agent;
}

LaneEnv::LaneEnv(LaneConfig cfg, bool shield_enabled, double gamma_cbf)
    : cfg_(std::move(cfg)), shield_enabled_(shield_enabled), gamma_cbf_(gamma_cbf) {
  cfg_.validate();
  if (gamma_cbf_ < 0.0 || gamma_cbf_ > 1.0)
    throw EnvError("lane: gamma_cbf must be in [0,1]");
  for (const auto& agent_texts : lane_formula_texts(cfg_)) {
    std::vector<stl::FormulaPtr> fs;
    for (const auto& text : agent_texts) fs.push_back(stl::parse_formula(text));
    formulas_.push_back(std::move(fs));
  }
}

std::vector<Vec> LaneEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int n = cfg_.n_agents;

  world_ = LaneWorld{};
  world_.cfg = cfg_;
  world_.road_point =
      Eigen::Vector2d(cfg_.x_road, cfg_.lane_center(cfg_.open_lane));
  for (int k = 0; k < cfg_.lane_count; ++k)
    if (k != cfg_.open_lane)
      world_.wrecks.push_back({{cfg_.x_road, cfg_.lane_center(k)}, k});

  // Agents in distinct random lanes, staggered upstream of the blockage.
  std::vector<int> lanes(cfg_.lane_count);
  for (int k = 0; k < cfg_.lane_count; ++k) lanes[k] = k;
  std::shuffle(lanes.begin(), lanes.end(), rng);

  // Slot-based staggering: sorted jitters keep every pair at least
  // agent_gap_min apart while filling the configured start range.
  const double slack =
      (cfg_.start_max_back - cfg_.start_min_back) - (n - 1) * cfg_.agent_gap_min;
  std::uniform_real_distribution<double> jitter(0.0, slack);
  std::vector<double> js(n);
  for (double& j : js) j = jitter(rng);
  std::sort(js.begin(), js.end());
  std::vector<double> offsets(n);
  for (int i = 0; i < n; ++i)
    offsets[i] = cfg_.start_min_back + i * cfg_.agent_gap_min + js[i];
  std::shuffle(offsets.begin(), offsets.end(), rng);

  world_.agents.resize(n);
  world_.dest.resize(n);
  world_.dest_initial_dist.resize(n);
  for (int i = 0; i < n; ++i) {
    VehicleState s;
    s.lane = lanes[i];
    s.pos = Eigen::Vector2d(cfg_.x_road - offsets[i], cfg_.lane_center(lanes[i]));
    world_.agents[i] = s;
    world_.dest[i] =
        Eigen::Vector2d(cfg_.x_road + cfg_.dest_offset, cfg_.lane_center(lanes[i]));
    world_.dest_initial_dist[i] = (world_.dest[i] - s.pos).norm();
  }

  trace_ = stl::Trace{};
  trace_.dt = cfg_.dt;
  reached_.assign(n, false);
  audits_.clear();

  std::vector<Vec> obs(n);
  for (int i = 0; i < n; ++i) obs[i] = lane_observe(world_, i);
  return obs;
}

EnvStep LaneEnv::step(const std::vector<int>& requested_actions) {
  const int n = cfg_.n_agents;
  if (static_cast<int>(requested_actions.size()) != n)
    throw EnvError("lane: one action per agent required");

  std::vector<Control> controls(n);
  std::vector<int> applied(n);
  audits_.assign(n, LaneShieldAudit{});
  int fallbacks = 0;

  for (int i = 0; i < n; ++i) {
    LaneShieldAudit& audit = audits_[i];
    audit.agent = i;
    audit.requested = requested_actions[i];
    audit.shield_active = shield_enabled_;
    if (shield_enabled_) {
      auto decision = shield::shield_action(world_, i, requested_actions[i], gamma_cbf_);
      controls[i] = decision.control;
      applied[i] = decision.applied_action;
      audit.applied = decision.applied_action;
      audit.feasible = decision.feasible;
      audit.fallback = decision.fallback;
      audit.open_loop = decision.open_loop_brake;
      audit.h_front_current = decision.barriers.h_front_current;
      audit.h_front_target = decision.barriers.h_front_target;
      audit.h_back_target = decision.barriers.h_back_target;
      audit.control = decision.control;
      audit.problem = decision.problem;
      if (decision.feasible && !decision.qp.slacks.empty())
        audit.min_slack =
            *std::min_element(decision.qp.slacks.begin(), decision.qp.slacks.end());
      if (decision.fallback) ++fallbacks;
    } else {
      bool invalid = false;
      controls[i] = action_to_control(world_, i, requested_actions[i], &invalid);
      applied[i] = invalid ? static_cast<int>(LaneAction::Keep) : requested_actions[i];
      audit.applied = applied[i];
      audit.control = controls[i];
    }
    apply_action_latch(world_, i, applied[i]);
  }

  LaneEvents events = lane_world_step(world_, controls);
  trace_.append_step(lane_trace_row(world_));

  EnvStep out;
  out.applied_actions = applied;
  out.collisions = events.collisions;
  out.shield_fallbacks = fallbacks;
  out.done = world_.step_count >= cfg_.episode_len;
  out.baseline_rewards.resize(n);
  out.obs.resize(n);
  for (int i = 0; i < n; ++i) {
    out.baseline_rewards[i] = lane_baseline_reward(world_, i, events.agent_collided[i]);
    out.obs[i] = lane_observe(world_, i);
    if ((world_.agents[i].pos - world_.dest[i]).norm() <= cfg_.stl_params.eps2)
      reached_[i] = true;
  }
  return out;
}

}  // namespace stlmarl::env
