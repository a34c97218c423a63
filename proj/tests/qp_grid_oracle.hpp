#pragma once

// Brute-force oracle for the shield QP, independent of the active-set
// solver. The minimizer of a 2D box QP is either the nominal point (if
// feasible) or lies on one of the boundary loci: a constraint line or a box
// edge. The oracle densely samples every locus with a multi-level 1D grid
// (the restricted objective is strictly convex, so the refinement cannot
// lose the optimum), plus a coarse 2D grid that detects feasibility of
// regions not touching any sampled locus.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "stlmarl/shield/qp.hpp"

namespace qp_oracle {

using stlmarl::shield::QpProblem;

struct GridBest {
  Eigen::Vector2d u;
  double objective;
};

inline bool grid_feasible(const QpProblem& p, const Eigen::Vector2d& u,
                          double tol = 1e-9) {
  if ((u.array() < p.lo.array() - tol).any()) return false;
  if ((u.array() > p.hi.array() + tol).any()) return false;
  for (const auto& c : p.constraints) {
    if (c.grad_u.norm() == 0.0) {
      if (c.offset < -tol) return false;
      continue;
    }
    if (c.grad_u.dot(u) + c.offset < -tol) return false;
  }
  return true;
}

namespace detail {

inline void consider(const QpProblem& p, const Eigen::Vector2d& u,
                     std::optional<GridBest>& best) {
  if (!grid_feasible(p, u)) return;
  double obj = 0.5 * (u - p.u_nominal).squaredNorm();
  if (!best || obj < best->objective) best = {u, obj};
}

// Dense multi-level 1D sweep of u(s) = origin + s * dir over [s_lo, s_hi].
inline void sweep_line(const QpProblem& p, const Eigen::Vector2d& origin,
                       const Eigen::Vector2d& dir, double s_lo, double s_hi,
                       std::optional<GridBest>& best) {
  const int K = 513;
  for (int level = 0; level < 12; ++level) {
    double cell = (s_hi - s_lo) / (K - 1);
    std::optional<double> best_s;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int i = 0; i < K; ++i) {
      double s = s_lo + i * cell;
      Eigen::Vector2d u = origin + s * dir;
      if (!grid_feasible(p, u)) continue;
      double obj = 0.5 * (u - p.u_nominal).squaredNorm();
      if (obj < best_obj) {
        best_obj = obj;
        best_s = s;
      }
    }
    if (!best_s) return;  // no feasible sample on this locus at this scale
    consider(p, origin + *best_s * dir, best);
    s_lo = *best_s - 4.0 * cell;
    s_hi = *best_s + 4.0 * cell;
  }
}

}  // namespace detail

inline std::optional<GridBest> grid_search(const QpProblem& p) {
  std::optional<GridBest> best;

  // Interior candidate.
  detail::consider(p, p.u_nominal, best);

  // Coarse 2D pass: detects feasibility even when no locus sweep does.
  {
    const int K = 65;
    Eigen::Vector2d cell = (p.hi - p.lo) / (K - 1);
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j)
        detail::consider(
            p, Eigen::Vector2d(p.lo.x() + i * cell.x(), p.lo.y() + j * cell.y()),
            best);
  }

  const double reach = (p.hi - p.lo).norm() + (p.hi - p.u_nominal).norm() +
                       (p.u_nominal - p.lo).norm();

  // Constraint lines.
  for (const auto& c : p.constraints) {
    double nn = c.grad_u.squaredNorm();
    if (nn == 0.0) continue;
    Eigen::Vector2d origin = -(c.offset / nn) * c.grad_u;
    Eigen::Vector2d dir(-c.grad_u.y(), c.grad_u.x());
    dir.normalize();
    detail::sweep_line(p, origin, dir, -reach, reach, best);
  }

  // Box edges.
  for (int d = 0; d < 2; ++d) {
    for (double v : {p.lo[d], p.hi[d]}) {
      if (!std::isfinite(v)) continue;
      Eigen::Vector2d origin = Eigen::Vector2d::Zero();
      origin[d] = v;
      Eigen::Vector2d dir = Eigen::Vector2d::Zero();
      dir[1 - d] = 1.0;
      double lo = p.lo[1 - d], hi = p.hi[1 - d];
      if (!std::isfinite(lo)) lo = -reach;
      if (!std::isfinite(hi)) hi = reach;
      detail::sweep_line(p, origin, dir, lo, hi, best);
    }
  }

  return best;
}

}  // namespace qp_oracle
