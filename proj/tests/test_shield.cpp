#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qp_grid_oracle.hpp"
#include "stlmarl/env/lane_env.hpp"
#include "stlmarl/shield/cbf_shield.hpp"
#include "stlmarl/shield/qp.hpp"

using namespace stlmarl;
using namespace stlmarl::shield;
using stlmarl::env::LaneAction;
using stlmarl::env::LaneConfig;
using stlmarl::env::LaneEnv;
using stlmarl::env::LaneWorld;
using stlmarl::env::VehicleState;

namespace {

// A bare two-lane world for hand-built scenarios. Gaps are bounding-circle
// clearances, so the leader sits at ego.x + clearance + 2 r. The geometry
// keeps vehicles inside a single lane band.
LaneWorld two_vehicle_world(double clearance, double ego_v, double leader_v,
                            int leader_lane = 0) {
  LaneConfig cfg;
  cfg.n_agents = 2;
  cfg.lane_width = 4.0;
  cfg.vehicle_radius = 1.5;
  LaneWorld w;
  w.cfg = cfg;
  w.road_point = {cfg.x_road, cfg.lane_center(cfg.open_lane)};
  VehicleState ego;
  ego.pos = {20.0, cfg.lane_center(0)};
  ego.lane = 0;
  ego.v = ego_v;
  VehicleState leader;
  leader.pos = {20.0 + clearance + 2.0 * cfg.vehicle_radius,
                cfg.lane_center(leader_lane)};
  leader.lane = leader_lane;
  leader.v = leader_v;
  w.agents = {ego, leader};
  w.dest = {{100.0, cfg.lane_center(0)}, {100.0, cfg.lane_center(leader_lane)}};
  w.dest_initial_dist = {80.0, 80.0};
  return w;
}

QpProblem random_problem(std::mt19937_64& rng, bool force_infeasible) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.2, 2.0);
  QpProblem p;
  p.lo = Eigen::Vector2d(-4.0, -4.0);
  p.hi = Eigen::Vector2d(4.0, 4.0);
  p.u_nominal = Eigen::Vector2d(3.0 * unit(rng), 3.0 * unit(rng));
  if (force_infeasible) {
    Eigen::Vector2d a(unit(rng), unit(rng));
    if (a.norm() < 0.3) a = Eigen::Vector2d(1.0, 0.0);
    double b = unit(rng);
    p.constraints.push_back({a, b, "c0", 0.0});
    p.constraints.push_back({-a, -b - 1.0, "c1", 0.0});
    return p;
  }
  // Slater point: every constraint keeps a margin around z.
  Eigen::Vector2d z(3.0 * unit(rng), 3.0 * unit(rng));
  int m = 1 + static_cast<int>(rng() % 3);
  for (int k = 0; k < m; ++k) {
    Eigen::Vector2d a(unit(rng), unit(rng));
    double norm = a.norm();
    if (norm < 0.3) {
      a = Eigen::Vector2d(0.7, 0.7);
      norm = a.norm();
    }
    a /= norm;
    double margin = pos(rng);
    double b = margin - a.dot(z);
    p.constraints.push_back({a, b, "c" + std::to_string(k), 0.0});
  }
  return p;
}

}  // namespace

TEST_CASE("safe distances: arithmetic cases") {
  CHECK(safe_distance_front(0, 0, 4.0, 0.1) == 0.0);
  CHECK(safe_distance_front(10, 10, 4.0, 0.1) == doctest::Approx(11.0));
  // (1+0)*10 + (10-6)^2/(2*4) = 10 + 2
  CHECK(safe_distance_front(10, 6, 4.0, 0.0) == doctest::Approx(12.0));

  CHECK(safe_distance_back(5, 5, 4.0, 0.2) == doctest::Approx(6.0));
  // (1)*4 + (8-4)^2/8 = 4 + 2
  CHECK(safe_distance_back(4, 8, 4.0, 0.0) == doctest::Approx(6.0));
  CHECK(safe_distance_back(0, 0, 4.0, 0.3) == 0.0);
}

TEST_CASE("cbf_values: sentinels and hand-built cases") {
  // No vehicle ahead in the ego lane: +inf sentinel, no constraint.
  LaneWorld w = two_vehicle_world(30.0, 0.0, 0.0, /*leader_lane=*/1);
  auto vals = cbf_values(w, 0, -1);
  CHECK(std::isinf(vals.h_front_current));
  QpProblem qp = build_cbf_qp(w, 0, static_cast<int>(LaneAction::Keep), 0.5);
  CHECK(qp.constraints.empty());

  // Stationary leader 10 m ahead of a stationary ego: D_fv = 0, h = 10.
  LaneWorld w2 = two_vehicle_world(10.0, 0.0, 0.0);
  auto vals2 = cbf_values(w2, 0, -1);
  CHECK(vals2.h_front_current == doctest::Approx(10.0));

  // Hand-built case matches the direct formula.
  LaneWorld w3 = two_vehicle_world(25.0, 8.0, 3.0);
  auto vals3 = cbf_values(w3, 0, -1);
  double expected = 25.0 - safe_distance_front(8.0, 3.0, w3.cfg.a_limit,
                                               w3.cfg.headway_eps);
  CHECK(vals3.h_front_current == doctest::Approx(expected).epsilon(1e-12));

  // Lane change adds target-lane values.
  LaneWorld w4 = two_vehicle_world(12.0, 5.0, 2.0, /*leader_lane=*/1);
  auto vals4 = cbf_values(w4, 0, 1);
  CHECK(std::isinf(vals4.h_front_current));
  CHECK(vals4.h_front_target ==
        doctest::Approx(12.0 - safe_distance_front(5.0, 2.0, w4.cfg.a_limit,
                                                   w4.cfg.headway_eps)));
}

TEST_CASE("build_cbf_qp: affine coefficients match symbolic expansion") {
  LaneWorld w = two_vehicle_world(25.0, 8.0, 3.0);
  const auto& cfg = w.cfg;
  const double gamma = 0.5;
  QpProblem qp = build_cbf_qp(w, 0, static_cast<int>(LaneAction::Keep), gamma);
  REQUIRE(qp.constraints.size() == 1);
  const auto& c = qp.constraints[0];

  // Hand expansion: h(x_next(u)) - h(x) >= -gamma h with
  //   gap_next = gap + (v_f - v) dt - 0.5 a dt^2
  //   D_next  ~= D + dD/dv * a dt,  dD/dv = (1+eps) + (v - v_f)/a_l
  const double v = 8.0, v_f = 3.0, dt = cfg.dt;
  const double d_dv = (1.0 + cfg.headway_eps) + (v - v_f) / cfg.a_limit;
  const double expect_a_coef = -(0.5 * dt * dt + d_dv * dt);
  const double h = 25.0 - safe_distance_front(v, v_f, cfg.a_limit, cfg.headway_eps);
  const double expect_offset = gamma * h + (v_f - v) * dt;
  CHECK(c.grad_u[0] == doctest::Approx(expect_a_coef).epsilon(1e-12));
  CHECK(c.grad_u[1] == 0.0);  // steering does not enter the longitudinal barrier
  CHECK(c.offset == doctest::Approx(expect_offset).epsilon(1e-12));
  CHECK(c.h == doctest::Approx(h).epsilon(1e-12));

  // gamma = 1 reduces the condition to h_next >= 0.
  QpProblem qp1 = build_cbf_qp(w, 0, static_cast<int>(LaneAction::Keep), 1.0);
  const auto& c1 = qp1.constraints[0];
  Eigen::Vector2d u(1.3, 0.0);
  CHECK(modelled_next_h(c1, u, 1.0) ==
        doctest::Approx(c1.grad_u.dot(u) + c1.offset).epsilon(1e-12));
  // And the affine model is consistent across gammas.
  CHECK(modelled_next_h(c, u, gamma) ==
        doctest::Approx(modelled_next_h(c1, u, 1.0)).epsilon(1e-9));
}

TEST_CASE("solve_qp: nominal already feasible returns it unchanged") {
  QpProblem p;
  p.u_nominal = Eigen::Vector2d(0.5, -0.25);
  p.lo = Eigen::Vector2d(-4, -4);
  p.hi = Eigen::Vector2d(4, 4);
  p.constraints.push_back({Eigen::Vector2d(1.0, 0.0), 2.0, "c", 0.0});
  auto sol = solve_qp(p);
  REQUIRE(sol.feasible);
  CHECK(sol.u == p.u_nominal);
  CHECK(sol.objective == 0.0);
  CHECK(sol.kkt_residual <= 1e-12);
}

TEST_CASE("solve_qp: single violated halfspace matches analytic projection") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    QpProblem p;
    p.u_nominal = Eigen::Vector2d(3.0 * unit(rng), 3.0 * unit(rng));
    Eigen::Vector2d a(unit(rng), unit(rng));
    if (a.norm() < 0.2) continue;
    double b = -a.dot(p.u_nominal) - std::fabs(unit(rng)) - 0.1;  // violated at u_q
    p.constraints.push_back({a, b, "c", 0.0});
    auto sol = solve_qp(p);
    REQUIRE(sol.feasible);
    Eigen::Vector2d expected =
        p.u_nominal - ((a.dot(p.u_nominal) + b) / a.squaredNorm()) * a;
    CHECK((sol.u - expected).norm() <= 1e-10);
    CHECK(sol.kkt_residual <= 1e-8);
    for (double lambda : sol.multipliers) CHECK(lambda >= -1e-8);
  }
}

TEST_CASE("solve_qp: random problems match the grid-search oracle") {
  std::mt19937_64 rng(22);
  int feasible_checked = 0, infeasible_checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    bool force_infeasible = trial % 6 == 5;
    QpProblem p = random_problem(rng, force_infeasible);
    auto sol = solve_qp(p);
    auto grid = qp_oracle::grid_search(p);
    if (!sol.feasible) {
      CHECK_FALSE(grid.has_value());
      ++infeasible_checked;
      continue;
    }
    REQUIRE(grid.has_value());
    CHECK(std::fabs(sol.objective - grid->objective) <= 1e-6);
    CHECK(sol.kkt_residual <= 1e-8);
    for (double lambda : sol.multipliers) CHECK(lambda >= -1e-8);
    for (double s : sol.slacks) CHECK(s >= -1e-8);
    ++feasible_checked;
  }
  CHECK(feasible_checked >= 80);
  CHECK(infeasible_checked >= 10);
}

TEST_CASE("solve_qp: control-independent constraints") {
  QpProblem p;
  p.u_nominal = Eigen::Vector2d(0.0, 0.0);
  p.constraints.push_back({Eigen::Vector2d(0.0, 0.0), 1.0, "vacuous", 0.0});
  auto sol = solve_qp(p);
  CHECK(sol.feasible);
  CHECK(sol.u == p.u_nominal);

  p.constraints.push_back({Eigen::Vector2d(0.0, 0.0), -0.5, "impossible", 0.0});
  auto sol2 = solve_qp(p);
  CHECK_FALSE(sol2.feasible);
}

TEST_CASE("shield_action: open road passes the request through") {
  LaneWorld w = two_vehicle_world(60.0, 3.0, 3.0, /*leader_lane=*/1);
  int throttle = static_cast<int>(LaneAction::ThrottleBase);
  auto decision = shield_action(w, 0, throttle, 0.5);
  CHECK(decision.applied_action == throttle);
  CHECK_FALSE(decision.fallback);
  CHECK(decision.feasible);
  CHECK(decision.control.accel == doctest::Approx(w.cfg.throttle_table[0]));
  CHECK(decision.control.steer == 0.0);
}

TEST_CASE("shield_action: tailgating throttle is reduced, slacks nonnegative") {
  // Closing on a slow leader with a thin positive barrier: the decrease
  // condition binds and forces deceleration.
  LaneWorld w = two_vehicle_world(13.8, 8.0, 2.0);
  int throttle1 = static_cast<int>(LaneAction::ThrottleBase) + 1;  // +2 m/s^2
  auto decision = shield_action(w, 0, throttle1, 0.5);
  REQUIRE(decision.feasible);
  CHECK(decision.control.accel <= w.cfg.throttle_table[1]);
  for (double s : decision.qp.slacks) CHECK(s >= -1e-8);
  // The corrected control still satisfies the decrease condition.
  for (const auto& c : decision.problem.constraints) {
    Eigen::Vector2d u(decision.control.accel, decision.control.steer);
    CHECK(modelled_next_h(c, u, 0.5) >= (1.0 - 0.5) * c.h - 1e-8);
  }
}

TEST_CASE("shield_action: infeasible lane change falls back to brake") {
  // A fast rear vehicle in the target lane makes the change unsafe in a way
  // no admissible acceleration can fix.
  LaneConfig cfg;
  cfg.n_agents = 2;
  cfg.lane_width = 4.0;
  cfg.vehicle_radius = 1.5;
  LaneWorld w;
  w.cfg = cfg;
  w.road_point = {cfg.x_road, cfg.lane_center(cfg.open_lane)};
  VehicleState ego;
  ego.pos = {40.0, cfg.lane_center(0)};
  ego.lane = 0;
  ego.v = 1.0;
  VehicleState rear;
  rear.pos = {39.0, cfg.lane_center(1)};  // beside/behind in the target lane
  rear.lane = 1;
  rear.v = 14.0;
  w.agents = {ego, rear};
  w.dest = {{100.0, cfg.lane_center(0)}, {100.0, cfg.lane_center(1)}};
  w.dest_initial_dist = {60.0, 60.0};

  auto decision = shield_action(w, 0, static_cast<int>(LaneAction::Left), 0.5);
  CHECK(decision.fallback);
  CHECK(decision.applied_action == static_cast<int>(LaneAction::Brake));
}
