#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

namespace stlmarl::shield {

/// One affine inequality grad_u . u + offset >= 0 derived from a barrier. A
/// zero gradient row is control-independent: it is either vacuous
/// (offset >= 0) or makes the problem infeasible.
struct CbfConstraint {
  Eigen::Vector2d grad_u = Eigen::Vector2d::Zero();
  double offset = 0.0;
  std::string source;
  double h = std::numeric_limits<double>::infinity();  // h(x^t) for auditing
};

struct QpProblem {
  Eigen::Vector2d u_nominal = Eigen::Vector2d::Zero();
  Eigen::Vector2d lo =
      Eigen::Vector2d::Constant(-std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi =
      Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  std::vector<CbfConstraint> constraints;
};

struct QpSolution {
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();  // 0.5|u-u_q|^2
  std::vector<double> slacks;       // constraint slacks at u (excludes bounds)
  std::vector<int> active;          // active rows (constraints then bounds)
  std::vector<double> multipliers;  // KKT multipliers of the active rows
  double kkt_residual = std::numeric_limits<double>::infinity();
};

/// Exact minimizer of 0.5 |u - u_nominal|^2 subject to the constraint rows
/// and box bounds, by enumeration of candidate active sets of size <= 2 (each
/// solved in closed form, feasibility-checked, best feasible kept). An
/// infeasible problem is a result (feasible=false), not an error.
QpSolution solve_qp(const QpProblem& problem);

}  // namespace stlmarl::shield
