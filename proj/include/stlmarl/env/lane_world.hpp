#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "stlmarl/env/multi_agent_env.hpp"

namespace stlmarl::env {

/// Geometry and physics of the multi-lane traffic-jam world. The road runs
/// along +x; lane k occupies the lateral band [k*w, (k+1)*w) and "left" means
/// +y (higher lane index).
struct LaneConfig {
  int lane_count = 4;
  double lane_width = 3.5;
  int n_agents = 3;
  int open_lane = 0;  // the one lane not blocked at the narrow road
  std::vector<double> throttle_table = {1.0, 2.0, -1.0};  // m/s^2
  double a_limit = 4.0;  // a_l
  double dt = 0.1;
  double lf = 1.5, lr = 1.5;
  double headway_eps = 0.1;   // eps in the (1+eps) v headway term
  double road_radius = 15.0;  // L: proximity radius around p_road
  int tau = 20;               // stopping window, steps
  int t_max_wait = 50;        // T_max, steps
  double v_stop = 0.1;
  int episode_len = 150;
  double w1 = 1.0, w2 = 10.0, w3 = 0.05;  // baseline reward weights
  double v_max = 15.0;
  double vehicle_radius = 2.0;
  double delta_max = 0.4;       // steering bound, rad
  double steer_gain_y = 0.15;   // rad per meter of lateral error
  double steer_gain_psi = 1.2;  // heading alignment gain
  double x_road = 60.0;         // blockage longitudinal position
  double dest_offset = 30.0;    // destination x past the blockage
  double start_min_back = 20.0;
  double start_max_back = 45.0;
  double agent_gap_min = 10.0;  // minimum longitudinal start separation
  bool phi1_all_pairs = false;  // braking-margin spec scope: all pairs vs
                                // same-and-adjacent lanes per step
  stl::FormulaConfig stl_params;

  double road_width() const { return lane_count * lane_width; }
  double lane_center(int k) const { return (k + 0.5) * lane_width; }
  int lane_of(double y) const;
  void validate() const;
};

struct VehicleState {
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  double v = 0.0;     // speed, m/s, >= 0
  double a = 0.0;     // last commanded acceleration
  double psi = 0.0;   // heading, rad, 0 = +x
  double beta = 0.0;  // slip angle, derived each step
  int lane = 0;
  int changing_to = -1;  // latched lane-change target, -1 = none
  int t_wait = 0;        // blocked-duration counter, steps
};

struct Wreck {
  Eigen::Vector2d pos;
  int lane;
};

struct LaneWorld {
  LaneConfig cfg;
  std::vector<VehicleState> agents;
  std::vector<Wreck> wrecks;
  Eigen::Vector2d road_point = Eigen::Vector2d::Zero();  // p_road
  std::vector<Eigen::Vector2d> dest;
  std::vector<double> dest_initial_dist;  // baseline constant c per agent
  int step_count = 0;
};

/// Discrete driving actions: fixed prefix, then one entry per throttle level.
enum class LaneAction { Keep = 0, Left = 1, Right = 2, Brake = 3, ThrottleBase = 4 };
int lane_action_count(const LaneConfig& cfg);

struct Control {
  double accel = 0.0;
  double steer = 0.0;
};

/// Target lane of a lane-change action, or -1 when the action is not a
/// lane change or no adjacent lane exists.
int lane_change_target(const LaneWorld& w, int agent, int action);

/// Nominal control of a discrete action. A lane change with no adjacent lane
/// maps to keep and sets *invalid.
Control action_to_control(const LaneWorld& w, int agent, int action,
                          bool* invalid = nullptr);

/// Nearest vehicle ahead of/behind an agent in a lane. `gap` is the
/// longitudinal clearance between bounding circles (center distance minus
/// both radii); absent neighbors report present=false and an infinite gap.
struct NeighborInfo {
  bool present = false;
  double gap = std::numeric_limits<double>::infinity();
  double v = 0.0;
  int id = -1;  // agent index, or n_agents + wreck index
};
NeighborInfo front_vehicle(const LaneWorld& w, int agent, int lane);
NeighborInfo back_vehicle(const LaneWorld& w, int agent, int lane);

/// Updates the lane-change latch for an applied discrete action.
void apply_action_latch(LaneWorld& w, int agent, int applied_action);

struct LaneEvents {
  int collisions = 0;  // pair overlap events, agents and wrecks
  std::vector<bool> agent_collided;
};

/// Integrates one kinematic-bicycle step for every agent with the given
/// controls, then updates lanes, latches, wait timers, and collisions.
LaneEvents lane_world_step(LaneWorld& w, const std::vector<Control>& controls);

/// Scenario layout as human-readable text, for debugging.
std::string lane_world_dump(const LaneWorld& w);

}  // namespace stlmarl::env
