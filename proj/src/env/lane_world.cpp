#include "stlmarl/env/lane_world.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stlmarl::env {

int LaneConfig::lane_of(double y) const {
  int k = static_cast<int>(std::floor(y / lane_width));
  return std::clamp(k, 0, lane_count - 1);
}

void LaneConfig::validate() const {
  if (lane_count < 2) throw EnvError("lane: need at least 2 lanes");
  if (n_agents < 1) throw EnvError("lane: n_agents must be >= 1");
  if (n_agents > lane_count)
    throw EnvError("lane: agents must fit in distinct lanes");
  if (open_lane < 0 || open_lane >= lane_count)
    throw EnvError("lane: open_lane out of range");
  if (throttle_table.empty()) throw EnvError("lane: need at least one throttle level");
  if (a_limit <= 0 || dt <= 0 || lane_width <= 0 || v_max <= 0)
    throw EnvError("lane: physical constants must be positive");
  if (t_max_wait < 1) throw EnvError("lane: t_max_wait must be >= 1");
  if (episode_len < 1) throw EnvError("lane: episode_len must be >= 1");
  if (start_max_back - start_min_back < (n_agents - 1) * agent_gap_min)
    throw EnvError("lane: start range too small for the agent gap");
  for (double a : throttle_table)
    if (std::fabs(a) > a_limit)
      throw EnvError("lane: throttle entries must respect the acceleration limit");
}

int lane_action_count(const LaneConfig& cfg) {
  return static_cast<int>(LaneAction::ThrottleBase) +
         static_cast<int>(cfg.throttle_table.size());
}

int lane_change_target(const LaneWorld& w, int agent, int action) {
  const auto& s = w.agents[agent];
  if (action == static_cast<int>(LaneAction::Left))
    return s.lane + 1 < w.cfg.lane_count ? s.lane + 1 : -1;
  if (action == static_cast<int>(LaneAction::Right))
    return s.lane - 1 >= 0 ? s.lane - 1 : -1;
  return -1;
}

Control action_to_control(const LaneWorld& w, int agent, int action,
                          bool* invalid) {
  const LaneConfig& cfg = w.cfg;
  const VehicleState& s = w.agents[agent];
  if (invalid) *invalid = false;
  if (action < 0 || action >= lane_action_count(cfg))
    throw EnvError("lane: unknown action");

  if (action == static_cast<int>(LaneAction::Keep)) return {0.0, 0.0};
  if (action == static_cast<int>(LaneAction::Brake)) return {-cfg.a_limit, 0.0};
  if (action >= static_cast<int>(LaneAction::ThrottleBase)) {
    int k = action - static_cast<int>(LaneAction::ThrottleBase);
    return {cfg.throttle_table[static_cast<std::size_t>(k)], 0.0};
  }

  int target = lane_change_target(w, agent, action);
  if (target < 0) {
    if (invalid) *invalid = true;
    return {0.0, 0.0};
  }
  double y_err = cfg.lane_center(target) - s.pos.y();
  double steer = cfg.steer_gain_y * y_err - cfg.steer_gain_psi * s.psi;
  steer = std::clamp(steer, -cfg.delta_max, cfg.delta_max);
  return {0.0, steer};
}

namespace {

struct VehicleRef {
  double x, v;
  int id;
};

// A vehicle counts as occupying every lane its bounding circle overlaps, so
// boundary-straddling vehicles stay visible to both lanes' barriers.
bool occupies_lane(const LaneConfig& cfg, double y, int lane) {
  return y + cfg.vehicle_radius > lane * cfg.lane_width &&
         y - cfg.vehicle_radius < (lane + 1) * cfg.lane_width;
}

std::vector<VehicleRef> vehicles_in_lane(const LaneWorld& w, int lane, int skip_agent) {
  std::vector<VehicleRef> out;
  for (int j = 0; j < static_cast<int>(w.agents.size()); ++j) {
    if (j == skip_agent) continue;
    if (occupies_lane(w.cfg, w.agents[j].pos.y(), lane))
      out.push_back({w.agents[j].pos.x(), w.agents[j].v, j});
  }
  for (int k = 0; k < static_cast<int>(w.wrecks.size()); ++k) {
    if (occupies_lane(w.cfg, w.wrecks[k].pos.y(), lane))
      out.push_back({w.wrecks[k].pos.x(), 0.0,
                     static_cast<int>(w.agents.size()) + k});
  }
  return out;
}

}  // namespace

NeighborInfo front_vehicle(const LaneWorld& w, int agent, int lane) {
  NeighborInfo info;
  double x = w.agents[agent].pos.x();
  for (const auto& v : vehicles_in_lane(w, lane, agent)) {
    if (v.x < x) continue;
    double gap = (v.x - x) - 2.0 * w.cfg.vehicle_radius;
    if (gap < info.gap) {
      info = {true, gap, v.v, v.id};
    }
  }
  return info;
}

NeighborInfo back_vehicle(const LaneWorld& w, int agent, int lane) {
  NeighborInfo info;
  double x = w.agents[agent].pos.x();
  for (const auto& v : vehicles_in_lane(w, lane, agent)) {
    if (v.x >= x) continue;
    double gap = (x - v.x) - 2.0 * w.cfg.vehicle_radius;
    if (gap < info.gap) {
      info = {true, gap, v.v, v.id};
    }
  }
  return info;
}

void apply_action_latch(LaneWorld& w, int agent, int applied_action) {
  int target = lane_change_target(w, agent, applied_action);
  if (target >= 0) w.agents[agent].changing_to = target;
}

LaneEvents lane_world_step(LaneWorld& w, const std::vector<Control>& controls) {
  const LaneConfig& cfg = w.cfg;
  if (controls.size() != w.agents.size())
    throw EnvError("lane: one control per agent required");

  for (std::size_t i = 0; i < w.agents.size(); ++i) {
    VehicleState& s = w.agents[i];
    const Control& u = controls[i];
    double beta = std::atan(cfg.lr / (cfg.lf + cfg.lr) * std::tan(u.steer));
    double v_old = s.v;
    s.pos.x() += v_old * std::cos(s.psi + beta) * cfg.dt;
    s.pos.y() += v_old * std::sin(s.psi + beta) * cfg.dt;
    s.psi += v_old / cfg.lr * std::sin(beta) * cfg.dt;
    s.v = std::max(0.0, v_old + u.accel * cfg.dt);
    s.a = u.accel;
    s.beta = beta;
    // Road edges: the center stays between the outermost lane centerlines.
    s.pos.y() = std::clamp(s.pos.y(), 0.5 * cfg.lane_width,
                           cfg.road_width() - 0.5 * cfg.lane_width);
    s.lane = cfg.lane_of(s.pos.y());
    if (s.changing_to >= 0 && s.lane == s.changing_to) s.changing_to = -1;
    if ((s.pos - w.road_point).norm() <= cfg.road_radius && s.v <= cfg.v_stop)
      ++s.t_wait;
  }
  ++w.step_count;

  LaneEvents ev;
  ev.agent_collided.assign(w.agents.size(), false);
  const double limit = 2.0 * cfg.vehicle_radius;
  for (std::size_t i = 0; i < w.agents.size(); ++i) {
    for (std::size_t j = i + 1; j < w.agents.size(); ++j) {
      if ((w.agents[i].pos - w.agents[j].pos).norm() < limit) {
        ++ev.collisions;
        ev.agent_collided[i] = ev.agent_collided[j] = true;
      }
    }
    for (const auto& wreck : w.wrecks) {
      if ((w.agents[i].pos - wreck.pos).norm() < limit) {
        ++ev.collisions;
        ev.agent_collided[i] = true;
      }
    }
  }
  return ev;
}

std::string lane_world_dump(const LaneWorld& w) {
  std::ostringstream os;
  os << "lanes=" << w.cfg.lane_count << " width=" << w.cfg.lane_width
     << " road=(" << w.road_point.x() << "," << w.road_point.y() << ")\n";
  for (std::size_t i = 0; i < w.agents.size(); ++i) {
    const auto& s = w.agents[i];
    os << "agent " << i << ": pos=(" << s.pos.x() << "," << s.pos.y() << ") v="
       << s.v << " psi=" << s.psi << " lane=" << s.lane
       << " changing_to=" << s.changing_to << " t_wait=" << s.t_wait
       << " dest=(" << w.dest[i].x() << "," << w.dest[i].y() << ")\n";
  }
  for (const auto& wreck : w.wrecks)
    os << "wreck: pos=(" << wreck.pos.x() << "," << wreck.pos.y() << ") lane="
       << wreck.lane << "\n";
  return os.str();
}

}  // namespace stlmarl::env
