#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace stlmarl::stl {

// ---------------------------------------------------------------------------
// Arithmetic expressions over trace channels (the f in predicates f ~ c).
// ---------------------------------------------------------------------------

enum class ExprKind { Constant, Channel, Add, Sub, Mul, Div, Neg, Abs, Sqrt, Min, Max };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::Constant;
  double value = 0.0;   // Constant
  std::string name;     // Channel
  ExprPtr lhs, rhs;     // children; rhs null for unary nodes
};

ExprPtr constant(double v);
ExprPtr channel_ref(std::string name);
ExprPtr add(ExprPtr l, ExprPtr r);
ExprPtr sub(ExprPtr l, ExprPtr r);
ExprPtr mul(ExprPtr l, ExprPtr r);
ExprPtr div(ExprPtr l, ExprPtr r);
/// Negation; folds constants so that -3 and neg(3) are the same node.
ExprPtr neg(ExprPtr e);
ExprPtr abs_of(ExprPtr e);
ExprPtr sqrt_of(ExprPtr e);
ExprPtr min_of(ExprPtr l, ExprPtr r);
ExprPtr max_of(ExprPtr l, ExprPtr r);

// ---------------------------------------------------------------------------
// Formulas with bounded temporal operators.
// ---------------------------------------------------------------------------

/// One endpoint of a temporal interval, in integer step offsets. A bound may
/// be horizon-relative ("T-1"): its concrete value is fixed only when the
/// formula is instantiated for a given horizon.
struct Bound {
  int offset = 0;
  bool horizon_relative = false;

  static Bound steps(int k) { return Bound{k, false}; }
  static Bound horizon(int delta = 0) { return Bound{delta, true}; }

  int resolve(int horizon_steps) const {
    return horizon_relative ? horizon_steps + offset : offset;
  }
  bool operator==(const Bound& o) const = default;
};

struct Interval {
  Bound lo, hi;
  bool operator==(const Interval& o) const = default;
};

enum class FormulaKind { Predicate, Not, And, Or, Always, Eventually, Until };
enum class Cmp { Ge, Le };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  FormulaKind kind = FormulaKind::Predicate;
  // Predicate
  ExprPtr expr;
  Cmp cmp = Cmp::Ge;
  double threshold = 0.0;
  // Children
  FormulaPtr left, right;
  // Temporal window
  Interval interval;
};

class FormulaError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

FormulaPtr pred(ExprPtr e, Cmp cmp, double threshold);
FormulaPtr f_not(FormulaPtr f);
FormulaPtr f_and(FormulaPtr l, FormulaPtr r);
FormulaPtr f_or(FormulaPtr l, FormulaPtr r);
/// Throws FormulaError if both bounds are literal and lo > b or lo < 0.
FormulaPtr always(Interval i, FormulaPtr f);
FormulaPtr eventually(Interval i, FormulaPtr f);
FormulaPtr until(Interval i, FormulaPtr l, FormulaPtr r);

bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Formula& a, const Formula& b);

/// True if any temporal bound in the tree is horizon-relative.
bool has_horizon_refs(const Formula& f);

/// Replaces horizon-relative bounds by their concrete value for
/// `horizon_steps`. Throws FormulaError if a resolved interval is invalid
/// (negative endpoint or lo > hi).
FormulaPtr instantiate_horizon(const FormulaPtr& f, int horizon_steps);

/// Canonical text; parse_formula(to_text(f)) is structurally equal to f.
std::string to_text(const Expr& e);
std::string to_text(const Formula& f);

}  // namespace stlmarl::stl
