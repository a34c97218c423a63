#pragma once

#include "stlmarl/env/lane_world.hpp"
#include "stlmarl/shield/qp.hpp"

namespace stlmarl::shield {

using env::Control;
using env::LaneWorld;

/// (1+eps) v + (v - v_fv)^2 / (2 a_l)
double safe_distance_front(double v, double v_fv, double a_limit, double eps);
/// (1+eps) v + (v_bv - v)^2 / (2 a_l)
double safe_distance_back(double v, double v_bv, double a_limit, double eps);

/// Barrier values toward the nearest front vehicle in the agent's current
/// lane and, for a lane change, the nearest front and back vehicles in the
/// target lane. Absent vehicles yield +inf (no constraint).
struct BarrierValues {
  double h_front_current = std::numeric_limits<double>::infinity();
  double h_front_target = std::numeric_limits<double>::infinity();
  double h_back_target = std::numeric_limits<double>::infinity();
};
/// target_lane < 0 means keep-lane (only the current-lane front barrier).
BarrierValues cbf_values(const LaneWorld& w, int agent, int target_lane);

/// Builds the one-step CBF-QP around the nominal control of `action`:
/// for each relevant barrier, h_next(u) - h >= -gamma_cbf h with h_next the
/// affine-in-control model under the longitudinal point-mass surrogate
/// x' = x + v dt + (1/2) a dt^2, v' = v + a dt and safe distances expanded to
/// first order in the speed change. Keep-lane actions use the current-lane
/// front barrier; lane changes (requested or latched) add the target-lane
/// front and back barriers.
QpProblem build_cbf_qp(const LaneWorld& w, int agent, int action, double gamma_cbf);

/// Affine model of the next-step barrier value used by the constraint for
/// control u: h + (constraint slack at u) - gamma_cbf h... recovered from the
/// stored rows; exposed so audits can recheck the decrease condition.
double modelled_next_h(const CbfConstraint& c, const Eigen::Vector2d& u,
                       double gamma_cbf);

struct ShieldDecision {
  int requested_action = 0;
  int applied_action = 0;
  Control control;
  bool feasible = false;        // final QP feasible
  bool fallback = false;        // brake substitution engaged
  bool open_loop_brake = false; // even the brake QP was infeasible
  QpProblem problem;            // the problem actually applied
  QpSolution qp;
  BarrierValues barriers;
};

/// Solves the QP for the requested action; on infeasibility retries with the
/// brake action; if that is also infeasible applies maximal braking open
/// loop and flags it.
ShieldDecision shield_action(const LaneWorld& w, int agent, int requested_action,
                             double gamma_cbf);

}  // namespace stlmarl::shield
