#include "stlmarl/shield/qp.hpp"

#include <cmath>
#include <stdexcept>

namespace stlmarl::shield {

namespace {

constexpr double kFeasTol = 1e-9;

struct Row {
  Eigen::Vector2d a;
  double b;  // a.u + b >= 0
};

struct Candidate {
  Eigen::Vector2d u;
  double objective;
  std::vector<int> active;
  std::vector<double> multipliers;
  double min_multiplier;
};

bool feasible_point(const std::vector<Row>& rows, const Eigen::Vector2d& u) {
  for (const auto& r : rows)
    if (r.a.dot(u) + r.b < -kFeasTol) return false;
  return true;
}

}  // namespace

QpSolution solve_qp(const QpProblem& problem) {
  if ((problem.lo.array() > problem.hi.array()).any())
    throw std::invalid_argument("solve_qp: unordered bounds");
  if (problem.constraints.size() > 16)
    throw std::invalid_argument("solve_qp: too many constraints");

  QpSolution sol;
  sol.u = problem.u_nominal;

  // Unified row list: barrier constraints first, then finite bounds.
  std::vector<Row> rows;
  bool impossible = false;
  for (const auto& c : problem.constraints) {
    if (c.grad_u.norm() == 0.0) {
      // Control-independent: decided by the offset alone.
      if (c.offset < -kFeasTol) impossible = true;
      continue;
    }
    rows.push_back({c.grad_u, c.offset});
  }
  for (int d = 0; d < 2; ++d) {
    if (std::isfinite(problem.lo[d])) {
      Eigen::Vector2d a = Eigen::Vector2d::Zero();
      a[d] = 1.0;
      rows.push_back({a, -problem.lo[d]});
    }
    if (std::isfinite(problem.hi[d])) {
      Eigen::Vector2d a = Eigen::Vector2d::Zero();
      a[d] = -1.0;
      rows.push_back({a, problem.hi[d]});
    }
  }

  auto slacks_at = [&](const Eigen::Vector2d& u) {
    std::vector<double> s;
    s.reserve(problem.constraints.size());
    for (const auto& c : problem.constraints) s.push_back(c.grad_u.dot(u) + c.offset);
    return s;
  };

  if (impossible) {
    sol.feasible = false;
    sol.slacks = slacks_at(problem.u_nominal);
    return sol;
  }

  const Eigen::Vector2d& uq = problem.u_nominal;
  const int m = static_cast<int>(rows.size());
  std::vector<Candidate> best_pool;
  double best_obj = std::numeric_limits<double>::infinity();

  auto consider = [&](const Eigen::Vector2d& u, std::vector<int> active,
                      std::vector<double> mult) {
    if (!u.allFinite() || !feasible_point(rows, u)) return;
    double obj = 0.5 * (u - uq).squaredNorm();
    double min_mult = 0.0;
    for (double lambda : mult) min_mult = std::min(min_mult, lambda);
    if (obj < best_obj - 1e-12) {
      best_pool.clear();
      best_obj = obj;
    }
    if (obj <= best_obj + 1e-12)
      best_pool.push_back({u, obj, std::move(active), std::move(mult), min_mult});
  };

  // Empty active set.
  consider(uq, {}, {});

  // Single active row: projection onto its hyperplane.
  for (int i = 0; i < m; ++i) {
    double nn = rows[i].a.squaredNorm();
    double viol = rows[i].a.dot(uq) + rows[i].b;
    Eigen::Vector2d u = uq - (viol / nn) * rows[i].a;
    consider(u, {i}, {-viol / nn});
  }

  // Pairs of active rows: intersection point of the two hyperplanes.
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      Eigen::Matrix2d A;
      A.row(0) = rows[i].a.transpose();
      A.row(1) = rows[j].a.transpose();
      double det = A.determinant();
      double scale = rows[i].a.norm() * rows[j].a.norm();
      if (std::fabs(det) <= 1e-12 * std::max(scale, 1e-12)) continue;
      Eigen::Vector2d rhs(-rows[i].b, -rows[j].b);
      Eigen::Vector2d u = A.inverse() * rhs;
      // Stationarity: u - uq = lambda_i a_i + lambda_j a_j.
      Eigen::Matrix2d N;
      N.col(0) = rows[i].a;
      N.col(1) = rows[j].a;
      Eigen::Vector2d lambda = N.inverse() * (u - uq);
      consider(u, {i, j}, {lambda[0], lambda[1]});
    }
  }

  if (best_pool.empty()) {
    sol.feasible = false;
    sol.slacks = slacks_at(problem.u_nominal);
    return sol;
  }

  // Among ties, return the candidate whose multipliers best certify
  // optimality (duplicated constraints can give an equality-solve with a
  // spurious negative multiplier for the same point).
  const Candidate* best = &best_pool.front();
  for (const auto& c : best_pool)
    if (c.min_multiplier > best->min_multiplier) best = &c;

  sol.u = best->u;
  sol.feasible = true;
  sol.objective = best->objective;
  sol.active = best->active;
  sol.multipliers = best->multipliers;
  sol.slacks = slacks_at(sol.u);

  Eigen::Vector2d residual = sol.u - uq;
  for (std::size_t k = 0; k < sol.active.size(); ++k)
    residual -= sol.multipliers[k] * rows[static_cast<std::size_t>(sol.active[k])].a;
  sol.kkt_residual = residual.norm();
  return sol;
}

}  // namespace stlmarl::shield
