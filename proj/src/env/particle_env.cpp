#include "stlmarl/env/particle_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "stlmarl/stl/parser.hpp"

namespace stlmarl::env {

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string lm_channel(int agent, int stage, int landmark) {
  return "d_a" + std::to_string(agent + 1) + "_lm" + std::to_string(stage) + "_" +
         std::to_string(landmark + 1);
}

std::string pair_channel(int i, int j) {
  return "d_a" + std::to_string(i + 1) + "_a" + std::to_string(j + 1);
}

}  // namespace

void ParticleConfig::validate() const {
  if (n_agents < 1) throw EnvError("particle: n_agents must be >= 1");
  if (arena <= 0 || dt <= 0 || force <= 0 || mass <= 0 || collision_radius <= 0)
    throw EnvError("particle: physical constants must be positive");
  if (damping < 0 || damping >= 1) throw EnvError("particle: damping must be in [0,1)");
  if (episode_len < 1) throw EnvError("particle: episode_len must be >= 1");
  if (stl_params.eps1 <= 0 || stl_params.eps2 <= 0 || stl_params.d_safe <= 0)
    throw EnvError("particle: thresholds must be positive");
}

int particle_obs_dim(const ParticleConfig& cfg) {
  return 2 + 2 * (2 * cfg.n_agents) + 2 * (cfg.n_agents - 1);
}

Vec particle_observe(const ParticleConfig& cfg, const ParticleState& s, int agent) {
  const int n = cfg.n_agents;
  Vec obs(particle_obs_dim(cfg));
  int k = 0;
  obs[k++] = s.vel[agent].x();
  obs[k++] = s.vel[agent].y();
  for (const auto& lm : s.landmarks_first) {
    obs[k++] = lm.x() - s.pos[agent].x();
    obs[k++] = lm.y() - s.pos[agent].y();
  }
  for (const auto& lm : s.landmarks_second) {
    obs[k++] = lm.x() - s.pos[agent].x();
    obs[k++] = lm.y() - s.pos[agent].y();
  }
  for (int j = 0; j < n; ++j) {
    if (j == agent) continue;
    obs[k++] = s.pos[j].x() - s.pos[agent].x();
    obs[k++] = s.pos[j].y() - s.pos[agent].y();
  }
  return obs;
}

double particle_baseline_reward(const ParticleConfig& cfg, const ParticleState& s,
                                int collision_events) {
  const int n = cfg.n_agents;
  const auto& goal = s.second_stage ? s.landmarks_second : s.landmarks_first;
  const auto& others = s.second_stage ? s.landmarks_first : s.landmarks_second;
  double goal_term = 0.0, other_term = 0.0;
  if (cfg.task == ParticleTask::CoordinationII) {
    for (int i = 0; i < n; ++i) {
      goal_term += (s.pos[i] - goal[i]).norm();
      other_term += (s.pos[i] - others[i]).norm();
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double d_goal = std::numeric_limits<double>::infinity();
      double d_other = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        d_goal = std::min(d_goal, (s.pos[j] - goal[i]).norm());
        d_other = std::min(d_other, (s.pos[j] - others[i]).norm());
      }
      goal_term += d_goal;
      other_term += d_other;
    }
  }
  return -cfg.c1 * goal_term + cfg.c2 * other_term +
         cfg.collision_penalty * collision_events;
}

std::vector<std::string> particle_channel_names(const ParticleConfig& cfg) {
  std::vector<std::string> names;
  for (int i = 0; i < cfg.n_agents; ++i) {
    for (int k = 0; k < cfg.n_agents; ++k) {
      names.push_back(lm_channel(i, 1, k));
      names.push_back(lm_channel(i, 2, k));
    }
    for (int j = 0; j < cfg.n_agents; ++j)
      if (j != i) names.push_back(pair_channel(i, j));
  }
  return names;
}

std::map<std::string, double> particle_trace_row(const ParticleConfig& cfg,
                                                 const ParticleState& s) {
  std::map<std::string, double> row;
  for (int i = 0; i < cfg.n_agents; ++i) {
    for (int k = 0; k < cfg.n_agents; ++k) {
      row[lm_channel(i, 1, k)] = (s.pos[i] - s.landmarks_first[k]).norm();
      row[lm_channel(i, 2, k)] = (s.pos[i] - s.landmarks_second[k]).norm();
    }
    for (int j = 0; j < cfg.n_agents; ++j)
      if (j != i) row[pair_channel(i, j)] = (s.pos[i] - s.pos[j]).norm();
  }
  return row;
}

std::vector<std::vector<std::string>> particle_formula_texts(const ParticleConfig& cfg) {
  const int n = cfg.n_agents;
  const auto& sp = cfg.stl_params;

  // Distance of landmark k (stage) from its covering agent: the paired agent
  // for coordination, the closest agent for spread.
  auto cover_expr = [&](int stage, int k) -> std::string {
    if (cfg.task == ParticleTask::CoordinationII) return lm_channel(k, stage, k);
    std::string e = lm_channel(n - 1, stage, k);
    for (int j = n - 2; j >= 0; --j)
      e = "min(" + lm_channel(j, stage, k) + ", " + e + ")";
    return e;
  };

  auto conj = [](const std::vector<std::string>& terms) {
    std::string out = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) out += " & " + terms[i];
    return out;
  };

  std::vector<std::string> first_terms, second_terms;
  for (int k = 0; k < n; ++k) {
    first_terms.push_back("(" + cover_expr(1, k) + " <= " + fmt_num(sp.eps1) + ")");
    second_terms.push_back("(" + cover_expr(2, k) + " <= " + fmt_num(sp.eps2) + ")");
  }
  std::string phi1 = "F[0,T-1] (" + conj(first_terms) + ")";
  std::string phi2 = "F[0,T-1] (G[0," + std::to_string(sp.hold_steps) + "] (" +
                     conj(second_terms) + "))";

  std::vector<std::vector<std::string>> per_agent(n);
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> safety_terms;
    for (int j = 0; j < n; ++j)
      if (j != i)
        safety_terms.push_back("(" + pair_channel(i, j) +
                               " >= " + fmt_num(sp.d_safe) + ")");
    std::string phi3 = safety_terms.empty()
                           ? std::string()
                           : "G[0,T-1] (" + conj(safety_terms) + ")";
    per_agent[i] = {phi1, phi2};
    if (!phi3.empty()) per_agent[i].push_back(phi3);
  }
  return per_agent;
}

ParticleEnv::ParticleEnv(ParticleConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (const auto& agent_texts : particle_formula_texts(cfg_)) {
    std::vector<stl::FormulaPtr> fs;
    for (const auto& text : agent_texts) fs.push_back(stl::parse_formula(text));
    formulas_.push_back(std::move(fs));
  }
}

std::vector<Vec> ParticleEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-cfg_.arena, cfg_.arena);
  const int n = cfg_.n_agents;

  std::vector<Eigen::Vector2d> points;
  const int total = 3 * n;  // agents + two landmark stages
  int attempts = 0;
  while (static_cast<int>(points.size()) < total) {
    if (++attempts > 1000 * total)
      throw EnvError("particle: placement failed, arena too crowded");
    Eigen::Vector2d p(coord(rng), coord(rng));
    bool ok = true;
    for (const auto& q : points)
      if ((p - q).norm() <= cfg_.collision_radius) {
        ok = false;
        break;
      }
    if (ok) points.push_back(p);
  }

  state_ = ParticleState{};
  state_.pos.assign(points.begin(), points.begin() + n);
  state_.vel.assign(n, Eigen::Vector2d::Zero());
  state_.landmarks_first.assign(points.begin() + n, points.begin() + 2 * n);
  state_.landmarks_second.assign(points.begin() + 2 * n, points.end());
  state_.first_visited.assign(n, false);
  state_.second_visited.assign(n, false);
  state_.second_stage = false;
  state_.step_count = 0;
  update_visit_flags();

  trace_ = stl::Trace{};
  trace_.dt = cfg_.dt;

  std::vector<Vec> obs(n);
  for (int i = 0; i < n; ++i) obs[i] = particle_observe(cfg_, state_, i);
  return obs;
}

void ParticleEnv::update_visit_flags() {
  const int n = cfg_.n_agents;
  for (int k = 0; k < n; ++k) {
    auto visited_by = [&](const Eigen::Vector2d& lm, double eps) {
      if (cfg_.task == ParticleTask::CoordinationII)
        return (state_.pos[k] - lm).norm() <= eps;
      for (int j = 0; j < n; ++j)
        if ((state_.pos[j] - lm).norm() <= eps) return true;
      return false;
    };
    if (!state_.first_visited[k] &&
        visited_by(state_.landmarks_first[k], cfg_.stl_params.eps1))
      state_.first_visited[k] = true;
    if (!state_.second_visited[k] &&
        visited_by(state_.landmarks_second[k], cfg_.stl_params.eps2))
      state_.second_visited[k] = true;
  }
  if (!state_.second_stage &&
      std::all_of(state_.first_visited.begin(), state_.first_visited.end(),
                  [](bool b) { return b; }))
    state_.second_stage = true;
}

EnvStep ParticleEnv::step(const std::vector<int>& requested_actions) {
  const int n = cfg_.n_agents;
  if (static_cast<int>(requested_actions.size()) != n)
    throw EnvError("particle: one action per agent required");

  for (int i = 0; i < n; ++i) {
    Eigen::Vector2d accel = Eigen::Vector2d::Zero();
    switch (static_cast<ParticleAction>(requested_actions[i])) {
      case ParticleAction::Stay: break;
      case ParticleAction::Left: accel.x() = -cfg_.force / cfg_.mass; break;
      case ParticleAction::Right: accel.x() = cfg_.force / cfg_.mass; break;
      case ParticleAction::Up: accel.y() = cfg_.force / cfg_.mass; break;
      case ParticleAction::Down: accel.y() = -cfg_.force / cfg_.mass; break;
      default: throw EnvError("particle: unknown action");
    }
    state_.vel[i] = (1.0 - cfg_.damping) * state_.vel[i] + accel * cfg_.dt;
    state_.pos[i] += state_.vel[i] * cfg_.dt;
    state_.pos[i] = state_.pos[i].cwiseMax(-cfg_.arena).cwiseMin(cfg_.arena);
  }
  ++state_.step_count;
  update_visit_flags();

  int collisions = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((state_.pos[i] - state_.pos[j]).norm() < 2.0 * cfg_.collision_radius)
        ++collisions;

  trace_.append_step(particle_trace_row(cfg_, state_));

  EnvStep out;
  out.applied_actions = requested_actions;
  out.collisions = collisions;
  out.done = state_.step_count >= cfg_.episode_len;
  double shared = particle_baseline_reward(cfg_, state_, collisions);
  out.baseline_rewards.assign(n, shared);
  out.obs.resize(n);
  for (int i = 0; i < n; ++i) out.obs[i] = particle_observe(cfg_, state_, i);
  return out;
}

bool ParticleEnv::reached_dest(int agent) const {
  if (cfg_.task == ParticleTask::CoordinationII)
    return state_.second_visited[agent];
  return std::all_of(state_.second_visited.begin(), state_.second_visited.end(),
                     [](bool b) { return b; });
}

}  // namespace stlmarl::env
