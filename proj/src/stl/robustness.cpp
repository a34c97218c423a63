#include "stlmarl/stl/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stlmarl::stl {

double eval_expr(const Expr& e, const Trace& trace, std::size_t t) {
  if (t >= trace.length) throw EvalError("step index out of range");
  double v = 0.0;
  switch (e.kind) {
    case ExprKind::Constant:
      v = e.value;
      break;
    case ExprKind::Channel: {
      auto it = trace.channels.find(e.name);
      if (it == trace.channels.end())
        throw EvalError("unknown channel '" + e.name + "'");
      v = it->second[t];
      break;
    }
    case ExprKind::Add:
      v = eval_expr(*e.lhs, trace, t) + eval_expr(*e.rhs, trace, t);
      break;
    case ExprKind::Sub:
      v = eval_expr(*e.lhs, trace, t) - eval_expr(*e.rhs, trace, t);
      break;
    case ExprKind::Mul:
      v = eval_expr(*e.lhs, trace, t) * eval_expr(*e.rhs, trace, t);
      break;
    case ExprKind::Div: {
      double num = eval_expr(*e.lhs, trace, t);
      double den = eval_expr(*e.rhs, trace, t);
      if (den == 0.0) throw EvalError("division by zero");
      v = num / den;
      break;
    }
    case ExprKind::Neg:
      v = -eval_expr(*e.lhs, trace, t);
      break;
    case ExprKind::Abs:
      v = std::fabs(eval_expr(*e.lhs, trace, t));
      break;
    case ExprKind::Sqrt: {
      double a = eval_expr(*e.lhs, trace, t);
      if (a < 0.0) throw EvalError("sqrt of negative value");
      v = std::sqrt(a);
      break;
    }
    case ExprKind::Min:
      v = std::min(eval_expr(*e.lhs, trace, t), eval_expr(*e.rhs, trace, t));
      break;
    case ExprKind::Max:
      v = std::max(eval_expr(*e.lhs, trace, t), eval_expr(*e.rhs, trace, t));
      break;
  }
  if (!std::isfinite(v)) throw EvalError("non-finite expression value");
  return v;
}

namespace {

// Window [t+a, min(t+b, end)] as inclusive step indices; empty is an error.
std::pair<std::size_t, std::size_t> clamp_window(const Interval& i, std::size_t t,
                                                 std::size_t trace_len) {
  if (i.lo.horizon_relative || i.hi.horizon_relative)
    throw EvalError("formula has unresolved horizon-relative bounds");
  std::size_t lo = t + static_cast<std::size_t>(i.lo.offset);
  std::size_t hi = t + static_cast<std::size_t>(i.hi.offset);
  std::size_t end = trace_len - 1;
  if (lo > end) throw EvalError("empty temporal window after clamping");
  return {lo, std::min(hi, end)};
}

}  // namespace

double robustness(const Formula& f, const Trace& trace, std::size_t t) {
  if (t >= trace.length) throw EvalError("step index out of range");
  switch (f.kind) {
    case FormulaKind::Predicate: {
      double v = eval_expr(*f.expr, trace, t);
      return f.cmp == Cmp::Ge ? v - f.threshold : f.threshold - v;
    }
    case FormulaKind::Not:
      return -robustness(*f.left, trace, t);
    case FormulaKind::And:
      return std::min(robustness(*f.left, trace, t), robustness(*f.right, trace, t));
    case FormulaKind::Or:
      return std::max(robustness(*f.left, trace, t), robustness(*f.right, trace, t));
    case FormulaKind::Always: {
      auto [lo, hi] = clamp_window(f.interval, t, trace.length);
      double v = robustness(*f.left, trace, lo);
      for (std::size_t u = lo + 1; u <= hi; ++u)
        v = std::min(v, robustness(*f.left, trace, u));
      return v;
    }
    case FormulaKind::Eventually: {
      auto [lo, hi] = clamp_window(f.interval, t, trace.length);
      double v = robustness(*f.left, trace, lo);
      for (std::size_t u = lo + 1; u <= hi; ++u)
        v = std::max(v, robustness(*f.left, trace, u));
      return v;
    }
    case FormulaKind::Until: {
      auto [lo, hi] = clamp_window(f.interval, t, trace.length);
      double best = -std::numeric_limits<double>::infinity();
      double hold = std::numeric_limits<double>::infinity();
      // hold tracks inf_{t'' in [t, u]} rho(left); extend it incrementally.
      for (std::size_t u = t; u <= hi; ++u) {
        hold = std::min(hold, robustness(*f.left, trace, u));
        if (u >= lo)
          best = std::max(best, std::min(robustness(*f.right, trace, u), hold));
      }
      return best;
    }
  }
  throw EvalError("unreachable formula kind");
}

bool satisfies(const Formula& f, const Trace& trace, std::size_t t) {
  return robustness(f, trace, t) >= 0.0;
}

double window_robustness(const Formula& f, const Trace& trace,
                         std::size_t window_start, std::size_t window_len) {
  if (window_len == 0) throw EvalError("empty window");
  if (window_start + window_len > trace.length)
    throw EvalError("window exceeds trace length");
  Trace sub = trace.window(window_start, window_len);
  FormulaPtr inst;
  try {
    inst = instantiate_horizon(std::make_shared<Formula>(f),
                               static_cast<int>(window_len));
  } catch (const FormulaError& e) {
    throw EvalError(e.what());
  }
  return robustness(*inst, sub, 0);
}

}  // namespace stlmarl::stl
