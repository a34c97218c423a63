#include "stlmarl/shield/cbf_shield.hpp"

#include <cmath>

namespace stlmarl::shield {

double safe_distance_front(double v, double v_fv, double a_limit, double eps) {
  double dv = v - v_fv;
  return (1.0 + eps) * v + dv * dv / (2.0 * a_limit);
}

double safe_distance_back(double v, double v_bv, double a_limit, double eps) {
  double dv = v_bv - v;
  return (1.0 + eps) * v + dv * dv / (2.0 * a_limit);
}

namespace {

// Lane-change target relevant for the shield: a requested lane change wins,
// otherwise a latched in-progress change.
int shield_target_lane(const LaneWorld& w, int agent, int action) {
  int target = env::lane_change_target(w, agent, action);
  if (target >= 0) return target;
  return w.agents[agent].changing_to;
}

CbfConstraint front_constraint(const LaneWorld& w, int agent,
                               const env::NeighborInfo& nb, double gamma,
                               const std::string& source) {
  const auto& cfg = w.cfg;
  const auto& s = w.agents[agent];
  double h = nb.gap - safe_distance_front(s.v, nb.v, cfg.a_limit, cfg.headway_eps);
  double d_dv = (1.0 + cfg.headway_eps) + (s.v - nb.v) / cfg.a_limit;
  CbfConstraint c;
  c.grad_u = Eigen::Vector2d(-(0.5 * cfg.dt * cfg.dt + d_dv * cfg.dt), 0.0);
  c.offset = gamma * h + (nb.v - s.v) * cfg.dt;
  c.source = source;
  c.h = h;
  return c;
}

CbfConstraint back_constraint(const LaneWorld& w, int agent,
                              const env::NeighborInfo& nb, double gamma,
                              const std::string& source) {
  const auto& cfg = w.cfg;
  const auto& s = w.agents[agent];
  double h = nb.gap - safe_distance_back(s.v, nb.v, cfg.a_limit, cfg.headway_eps);
  double d_dv = (1.0 + cfg.headway_eps) - (nb.v - s.v) / cfg.a_limit;
  CbfConstraint c;
  c.grad_u = Eigen::Vector2d(0.5 * cfg.dt * cfg.dt - d_dv * cfg.dt, 0.0);
  c.offset = gamma * h + (s.v - nb.v) * cfg.dt;
  c.source = source;
  c.h = h;
  return c;
}

}  // namespace

BarrierValues cbf_values(const LaneWorld& w, int agent, int target_lane) {
  const auto& cfg = w.cfg;
  const auto& s = w.agents[agent];
  BarrierValues out;
  auto fc = env::front_vehicle(w, agent, s.lane);
  if (fc.present)
    out.h_front_current =
        fc.gap - safe_distance_front(s.v, fc.v, cfg.a_limit, cfg.headway_eps);
  if (target_lane >= 0) {
    auto ft = env::front_vehicle(w, agent, target_lane);
    if (ft.present)
      out.h_front_target =
          ft.gap - safe_distance_front(s.v, ft.v, cfg.a_limit, cfg.headway_eps);
    auto bt = env::back_vehicle(w, agent, target_lane);
    if (bt.present)
      out.h_back_target =
          bt.gap - safe_distance_back(s.v, bt.v, cfg.a_limit, cfg.headway_eps);
  }
  return out;
}

QpProblem build_cbf_qp(const LaneWorld& w, int agent, int action, double gamma_cbf) {
  const auto& cfg = w.cfg;
  QpProblem qp;
  qp.u_nominal = Eigen::Vector2d::Zero();
  bool invalid = false;
  Control nominal = env::action_to_control(w, agent, action, &invalid);
  qp.u_nominal << nominal.accel, nominal.steer;
  qp.lo << -cfg.a_limit, -cfg.delta_max;
  qp.hi << cfg.a_limit, cfg.delta_max;

  int current = w.agents[agent].lane;
  auto fc = env::front_vehicle(w, agent, current);
  if (fc.present)
    qp.constraints.push_back(front_constraint(
        w, agent, fc, gamma_cbf, "front:lane" + std::to_string(current)));

  int target = shield_target_lane(w, agent, invalid ? 0 : action);
  if (target >= 0 && target != current) {
    auto ft = env::front_vehicle(w, agent, target);
    if (ft.present)
      qp.constraints.push_back(front_constraint(
          w, agent, ft, gamma_cbf, "front:lane" + std::to_string(target)));
    auto bt = env::back_vehicle(w, agent, target);
    if (bt.present)
      qp.constraints.push_back(back_constraint(
          w, agent, bt, gamma_cbf, "back:lane" + std::to_string(target)));
  }
  return qp;
}

double modelled_next_h(const CbfConstraint& c, const Eigen::Vector2d& u,
                       double gamma_cbf) {
  // The row encodes h_next(u) - (1-gamma) h >= 0, so h_next = slack + (1-gamma) h.
  double slack = c.grad_u.dot(u) + c.offset;
  return slack + (1.0 - gamma_cbf) * c.h;
}

ShieldDecision shield_action(const LaneWorld& w, int agent, int requested_action,
                             double gamma_cbf) {
  ShieldDecision out;
  out.requested_action = requested_action;

  bool invalid = false;
  env::action_to_control(w, agent, requested_action, &invalid);
  int effective = invalid ? static_cast<int>(env::LaneAction::Keep) : requested_action;

  QpProblem qp = build_cbf_qp(w, agent, effective, gamma_cbf);
  QpSolution sol = solve_qp(qp);
  int target = shield_target_lane(w, agent, effective);
  out.barriers = cbf_values(w, agent, target);
  if (sol.feasible) {
    out.applied_action = effective;
    out.control = {sol.u[0], sol.u[1]};
    out.feasible = true;
    out.problem = std::move(qp);
    out.qp = std::move(sol);
    return out;
  }

  // Brake fallback: the conservative longitudinal substitute.
  int brake = static_cast<int>(env::LaneAction::Brake);
  QpProblem brake_qp = build_cbf_qp(w, agent, brake, gamma_cbf);
  QpSolution brake_sol = solve_qp(brake_qp);
  out.applied_action = brake;
  out.fallback = true;
  if (brake_sol.feasible) {
    out.control = {brake_sol.u[0], brake_sol.u[1]};
    out.feasible = true;
  } else {
    out.control = {-w.cfg.a_limit, 0.0};
    out.open_loop_brake = true;
  }
  out.problem = std::move(brake_qp);
  out.qp = std::move(brake_sol);
  return out;
}

}  // namespace stlmarl::shield
