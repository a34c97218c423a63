#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "stlmarl/stl/ast.hpp"
#include "stlmarl/stl/trace.hpp"

namespace stlmarl::stl {

class EvalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Scalar value of `e` at step t. Throws EvalError on out-of-range index,
/// missing channel, or non-finite result (division by zero, sqrt of a
/// negative).
double eval_expr(const Expr& e, const Trace& trace, std::size_t t);

/// Quantitative semantics rho(f, trace, t). Temporal windows [t+a, t+b] are
/// clamped to the end of the trace; an empty window after clamping is an
/// EvalError. The formula must not contain unresolved horizon-relative
/// bounds.
double robustness(const Formula& f, const Trace& trace, std::size_t t);

/// rho >= 0 (boundary counts as satisfied).
bool satisfies(const Formula& f, const Trace& trace, std::size_t t);

/// Robustness of `f` over the sub-trace [window_start, window_start +
/// window_len), with time rebased so the window's first step is formula time
/// 0 and horizon-relative bounds resolved against window_len.
double window_robustness(const Formula& f, const Trace& trace,
                         std::size_t window_start, std::size_t window_len);

/// Parameters shared by the environments' formula builders and the
/// STL-reward computation.
struct FormulaConfig {
  double eps1 = 0.1;
  double eps2 = 0.1;
  double d_safe = 0.15;
  int horizon = 25;             // T, steps
  int tau = 20;                 // stopping window in the lane task, steps
  int t_max_wait = 50;          // T_max, steps
  int hold_steps = 3;           // inner always-window of eventually-always
  std::vector<double> weights;  // c_j, one per formula; empty = all 1
  double offset = 0.0;          // b

  double weight(std::size_t j) const {
    return j < weights.size() ? weights[j] : 1.0;
  }
};

}  // namespace stlmarl::stl
