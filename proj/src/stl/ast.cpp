#include "stlmarl/stl/ast.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace stlmarl::stl {

namespace {

ExprPtr make_expr(ExprKind k, ExprPtr l = nullptr, ExprPtr r = nullptr) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

std::shared_ptr<Formula> make_formula(FormulaKind k, FormulaPtr l = nullptr,
                                      FormulaPtr r = nullptr) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->left = std::move(l);
  f->right = std::move(r);
  return f;
}

void check_literal_interval(const Interval& i) {
  if (!i.lo.horizon_relative && i.lo.offset < 0)
    throw FormulaError("negative interval bound");
  if (!i.hi.horizon_relative && i.hi.offset < 0)
    throw FormulaError("negative interval bound");
  if (!i.lo.horizon_relative && !i.hi.horizon_relative && i.lo.offset > i.hi.offset)
    throw FormulaError("empty interval: lower bound exceeds upper bound");
}

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_bound(const Bound& b) {
  if (!b.horizon_relative) return std::to_string(b.offset);
  if (b.offset == 0) return "T";
  if (b.offset > 0) return "T+" + std::to_string(b.offset);
  return "T-" + std::to_string(-b.offset);
}

std::string fmt_interval(const Interval& i) {
  return "[" + fmt_bound(i.lo) + "," + fmt_bound(i.hi) + "]";
}

}  // namespace

ExprPtr constant(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Constant;
  e->value = v;
  return e;
}

ExprPtr channel_ref(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Channel;
  e->name = std::move(name);
  return e;
}

ExprPtr add(ExprPtr l, ExprPtr r) { return make_expr(ExprKind::Add, std::move(l), std::move(r)); }
ExprPtr sub(ExprPtr l, ExprPtr r) { return make_expr(ExprKind::Sub, std::move(l), std::move(r)); }
ExprPtr mul(ExprPtr l, ExprPtr r) { return make_expr(ExprKind::Mul, std::move(l), std::move(r)); }
ExprPtr div(ExprPtr l, ExprPtr r) { return make_expr(ExprKind::Div, std::move(l), std::move(r)); }

ExprPtr neg(ExprPtr e) {
  if (e->kind == ExprKind::Constant) return constant(-e->value);
  return make_expr(ExprKind::Neg, std::move(e));
}

ExprPtr abs_of(ExprPtr e) { return make_expr(ExprKind::Abs, std::move(e)); }
ExprPtr sqrt_of(ExprPtr e) { return make_expr(ExprKind::Sqrt, std::move(e)); }
ExprPtr min_of(ExprPtr l, ExprPtr r) { return make_expr(ExprKind::Min, std::move(l), std::move(r)); }
ExprPtr max_of(ExprPtr l, ExprPtr r) { return make_expr(ExprKind::Max, std::move(l), std::move(r)); }

FormulaPtr pred(ExprPtr e, Cmp cmp, double threshold) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Predicate;
  f->expr = std::move(e);
  f->cmp = cmp;
  f->threshold = threshold;
  return f;
}

FormulaPtr f_not(FormulaPtr f) { return make_formula(FormulaKind::Not, std::move(f)); }
FormulaPtr f_and(FormulaPtr l, FormulaPtr r) { return make_formula(FormulaKind::And, std::move(l), std::move(r)); }
FormulaPtr f_or(FormulaPtr l, FormulaPtr r) { return make_formula(FormulaKind::Or, std::move(l), std::move(r)); }

FormulaPtr always(Interval i, FormulaPtr f) {
  check_literal_interval(i);
  auto out = make_formula(FormulaKind::Always, std::move(f));
  out->interval = i;
  return out;
}

FormulaPtr eventually(Interval i, FormulaPtr f) {
  check_literal_interval(i);
  auto out = make_formula(FormulaKind::Eventually, std::move(f));
  out->interval = i;
  return out;
}

FormulaPtr until(Interval i, FormulaPtr l, FormulaPtr r) {
  check_literal_interval(i);
  auto out = make_formula(FormulaKind::Until, std::move(l), std::move(r));
  out->interval = i;
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::Constant:
      return a.value == b.value;
    case ExprKind::Channel:
      return a.name == b.name;
    default:
      if ((a.lhs == nullptr) != (b.lhs == nullptr)) return false;
      if ((a.rhs == nullptr) != (b.rhs == nullptr)) return false;
      if (a.lhs && !structurally_equal(*a.lhs, *b.lhs)) return false;
      if (a.rhs && !structurally_equal(*a.rhs, *b.rhs)) return false;
      return true;
  }
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == FormulaKind::Predicate)
    return a.cmp == b.cmp && a.threshold == b.threshold &&
           structurally_equal(*a.expr, *b.expr);
  switch (a.kind) {
    case FormulaKind::Always:
    case FormulaKind::Eventually:
    case FormulaKind::Until:
      if (!(a.interval == b.interval)) return false;
      break;
    default:
      break;
  }
  if ((a.left == nullptr) != (b.left == nullptr)) return false;
  if ((a.right == nullptr) != (b.right == nullptr)) return false;
  if (a.left && !structurally_equal(*a.left, *b.left)) return false;
  if (a.right && !structurally_equal(*a.right, *b.right)) return false;
  return true;
}

bool has_horizon_refs(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::Predicate:
      return false;
    case FormulaKind::Always:
    case FormulaKind::Eventually:
    case FormulaKind::Until:
      if (f.interval.lo.horizon_relative || f.interval.hi.horizon_relative)
        return true;
      break;
    default:
      break;
  }
  if (f.left && has_horizon_refs(*f.left)) return true;
  if (f.right && has_horizon_refs(*f.right)) return true;
  return false;
}

FormulaPtr instantiate_horizon(const FormulaPtr& f, int horizon_steps) {
  if (f->kind == FormulaKind::Predicate) return f;
  FormulaPtr left = f->left ? instantiate_horizon(f->left, horizon_steps) : nullptr;
  FormulaPtr right = f->right ? instantiate_horizon(f->right, horizon_steps) : nullptr;
  auto out = std::make_shared<Formula>(*f);
  out->left = std::move(left);
  out->right = std::move(right);
  if (f->kind == FormulaKind::Always || f->kind == FormulaKind::Eventually ||
      f->kind == FormulaKind::Until) {
    int lo = f->interval.lo.resolve(horizon_steps);
    int hi = f->interval.hi.resolve(horizon_steps);
    if (lo < 0 || hi < 0)
      throw FormulaError("negative interval bound after horizon substitution");
    if (lo > hi)
      throw FormulaError("empty interval after horizon substitution");
    out->interval = Interval{Bound::steps(lo), Bound::steps(hi)};
  }
  return out;
}

std::string to_text(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Constant:
      return fmt_num(e.value);
    case ExprKind::Channel:
      return e.name;
    case ExprKind::Add:
      return "(" + to_text(*e.lhs) + " + " + to_text(*e.rhs) + ")";
    case ExprKind::Sub:
      return "(" + to_text(*e.lhs) + " - " + to_text(*e.rhs) + ")";
    case ExprKind::Mul:
      return "(" + to_text(*e.lhs) + " * " + to_text(*e.rhs) + ")";
    case ExprKind::Div:
      return "(" + to_text(*e.lhs) + " / " + to_text(*e.rhs) + ")";
    case ExprKind::Neg:
      return "-(" + to_text(*e.lhs) + ")";
    case ExprKind::Abs:
      return "abs(" + to_text(*e.lhs) + ")";
    case ExprKind::Sqrt:
      return "sqrt(" + to_text(*e.lhs) + ")";
    case ExprKind::Min:
      return "min(" + to_text(*e.lhs) + ", " + to_text(*e.rhs) + ")";
    case ExprKind::Max:
      return "max(" + to_text(*e.lhs) + ", " + to_text(*e.rhs) + ")";
  }
  return {};
}

std::string to_text(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::Predicate:
      return "(" + to_text(*f.expr) + (f.cmp == Cmp::Ge ? " >= " : " <= ") +
             fmt_num(f.threshold) + ")";
    case FormulaKind::Not:
      return "!" + to_text(*f.left);
    case FormulaKind::And:
      return "(" + to_text(*f.left) + " & " + to_text(*f.right) + ")";
    case FormulaKind::Or:
      return "(" + to_text(*f.left) + " | " + to_text(*f.right) + ")";
    case FormulaKind::Always:
      return "G" + fmt_interval(f.interval) + " " + to_text(*f.left);
    case FormulaKind::Eventually:
      return "F" + fmt_interval(f.interval) + " " + to_text(*f.left);
    case FormulaKind::Until:
      return "((" + to_text(*f.left) + ") U" + fmt_interval(f.interval) + " (" +
             to_text(*f.right) + "))";
  }
  return {};
}

}  // namespace stlmarl::stl
