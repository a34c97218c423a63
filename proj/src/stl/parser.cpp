#include "stlmarl/stl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

namespace stlmarl::stl {

ParseError::ParseError(const std::string& msg, int line, int col)
    : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                         std::to_string(col) + ": " + msg),
      line_(line),
      col_(col) {}

namespace {

enum class Tok {
  Num, Ident, LParen, RParen, LBracket, RBracket, Comma,
  Amp, Pipe, Bang, Plus, Minus, Star, Slash, Le, Ge, End
};

struct Token {
  Tok type;
  double num = 0.0;
  std::string text;
  int line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string& s) : src_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_ws();
      Token t;
      t.line = line_;
      t.col = col_;
      if (pos_ >= src_.size()) {
        t.type = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        t.type = Tok::Num;
        t.num = lex_number(t.text);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.type = Tok::Ident;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          t.text.push_back(advance());
      } else {
        switch (c) {
          case '(': t.type = Tok::LParen; break;
          case ')': t.type = Tok::RParen; break;
          case '[': t.type = Tok::LBracket; break;
          case ']': t.type = Tok::RBracket; break;
          case ',': t.type = Tok::Comma; break;
          case '&': t.type = Tok::Amp; break;
          case '|': t.type = Tok::Pipe; break;
          case '!': t.type = Tok::Bang; break;
          case '+': t.type = Tok::Plus; break;
          case '-': t.type = Tok::Minus; break;
          case '*': t.type = Tok::Star; break;
          case '/': t.type = Tok::Slash; break;
          case '<':
          case '>': {
            char first = advance();
            if (pos_ >= src_.size() || src_[pos_] != '=')
              throw ParseError(std::string("expected '") + first + "='", t.line, t.col);
            advance();
            t.type = first == '<' ? Tok::Le : Tok::Ge;
            out.push_back(t);
            continue;
          }
          default:
            throw ParseError(std::string("unexpected character '") + c + "'",
                             t.line, t.col);
        }
        advance();
      }
      out.push_back(t);
    }
  }

private:
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      advance();
  }

  double lex_number(std::string& text) {
    int line = line_, col = col_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      text.push_back(advance());
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      text.push_back(advance());
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
        text.push_back(advance());
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        text.push_back(advance());
    }
    try {
      std::size_t used = 0;
      double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw ParseError("malformed number '" + text + "'", line, col);
    }
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  FormulaPtr run() {
    FormulaPtr f = parse_formula();
    expect(Tok::End, "unexpected trailing input");
    return f;
  }

private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t n = 1) const {
    return toks_[std::min(pos_ + n, toks_.size() - 1)];
  }
  void next() { if (cur().type != Tok::End) ++pos_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, cur().line, cur().col);
  }

  void expect(Tok t, const std::string& msg) {
    if (cur().type != t) fail(msg);
    next();
  }

  bool accept(Tok t) {
    if (cur().type != t) return false;
    next();
    return true;
  }

  FormulaPtr parse_formula() { return parse_disj(); }

  FormulaPtr parse_disj() {
    FormulaPtr f = parse_conj();
    while (accept(Tok::Pipe)) f = f_or(f, parse_conj());
    return f;
  }

  FormulaPtr parse_conj() {
    FormulaPtr f = parse_unary();
    while (accept(Tok::Amp)) f = f_and(f, parse_unary());
    return f;
  }

  FormulaPtr parse_unary() {
    if (accept(Tok::Bang)) return f_not(parse_unary());
    if (cur().type == Tok::Ident && (cur().text == "G" || cur().text == "F") &&
        peek().type == Tok::LBracket) {
      bool is_always = cur().text == "G";
      next();
      Interval i = parse_interval();
      FormulaPtr child = parse_unary();
      return is_always ? always(i, child) : eventually(i, child);
    }
    FormulaPtr f = parse_atom();
    if (cur().type == Tok::Ident && cur().text == "U" &&
        peek().type == Tok::LBracket) {
      next();
      Interval i = parse_interval();
      FormulaPtr rhs = parse_unary();
      return until(i, f, rhs);
    }
    return f;
  }

  FormulaPtr parse_atom() {
    // "(" can open either a parenthesized formula or a parenthesized
    // arithmetic expression; try the formula reading first and backtrack.
    // If both readings fail, report the error that made more progress.
    if (cur().type == Tok::LParen) {
      std::size_t save = pos_;
      next();
      try {
        FormulaPtr f = parse_formula();
        expect(Tok::RParen, "expected ')'");
        return f;
      } catch (const ParseError& formula_err) {
        pos_ = save;
        try {
          return parse_cmp_atom();
        } catch (const ParseError& expr_err) {
          if (std::pair(formula_err.line(), formula_err.col()) >=
              std::pair(expr_err.line(), expr_err.col()))
            throw formula_err;
          throw;
        }
      }
    }
    return parse_cmp_atom();
  }

  FormulaPtr parse_cmp_atom() {
    ExprPtr e = parse_expr();
    Cmp cmp;
    if (accept(Tok::Le)) {
      cmp = Cmp::Le;
    } else if (accept(Tok::Ge)) {
      cmp = Cmp::Ge;
    } else {
      fail("expected '<=' or '>=' after expression");
    }
    bool negative = accept(Tok::Minus);
    if (cur().type != Tok::Num) fail("expected number after comparator");
    double c = cur().num;
    next();
    return pred(e, cmp, negative ? -c : c);
  }

  Interval parse_interval() {
    expect(Tok::LBracket, "expected '[' after temporal operator");
    Bound lo = parse_bound();
    expect(Tok::Comma, "expected ',' in interval");
    Bound hi = parse_bound();
    int line = cur().line, col = cur().col;
    expect(Tok::RBracket, "expected ']' closing interval");
    if (!lo.horizon_relative && !hi.horizon_relative && lo.offset > hi.offset)
      throw ParseError("empty interval: lower bound exceeds upper bound", line, col);
    return Interval{lo, hi};
  }

  Bound parse_bound() {
    if (cur().type == Tok::Minus)
      fail("interval bounds must be nonnegative");
    if (cur().type == Tok::Ident && cur().text == "T") {
      next();
      int delta = 0;
      if (cur().type == Tok::Plus || cur().type == Tok::Minus) {
        bool minus = cur().type == Tok::Minus;
        next();
        delta = parse_int();
        if (minus) delta = -delta;
      }
      return Bound::horizon(delta);
    }
    return Bound::steps(parse_int());
  }

  int parse_int() {
    if (cur().type != Tok::Num) fail("expected integer interval bound");
    double v = cur().num;
    if (v != std::floor(v) || v > 1e9)
      fail("interval bound must be an integer");
    next();
    return static_cast<int>(v);
  }

  ExprPtr parse_expr() {
    ExprPtr e = parse_term();
    while (true) {
      if (accept(Tok::Plus)) {
        e = add(e, parse_term());
      } else if (accept(Tok::Minus)) {
        e = sub(e, parse_term());
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_factor();
    while (true) {
      if (accept(Tok::Star)) {
        e = mul(e, parse_factor());
      } else if (accept(Tok::Slash)) {
        e = div(e, parse_factor());
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_factor() {
    if (cur().type == Tok::Num) {
      double v = cur().num;
      next();
      return constant(v);
    }
    if (accept(Tok::Minus)) return neg(parse_factor());
    if (accept(Tok::LParen)) {
      ExprPtr e = parse_expr();
      expect(Tok::RParen, "expected ')'");
      return e;
    }
    if (cur().type == Tok::Ident) {
      std::string name = cur().text;
      if (peek().type == Tok::LParen &&
          (name == "abs" || name == "sqrt" || name == "min" || name == "max")) {
        next();
        next();  // '('
        ExprPtr a = parse_expr();
        ExprPtr e;
        if (name == "abs" || name == "sqrt") {
          e = name == "abs" ? abs_of(a) : sqrt_of(a);
        } else {
          expect(Tok::Comma, "expected ',' in " + name + "()");
          ExprPtr b = parse_expr();
          e = name == "min" ? min_of(a, b) : max_of(a, b);
        }
        expect(Tok::RParen, "expected ')'");
        return e;
      }
      next();
      return channel_ref(name);
    }
    fail("expected expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

FormulaPtr parse_formula(const std::string& text) {
  Lexer lex(text);
  Parser p(lex.run());
  try {
    return p.run();
  } catch (const FormulaError& e) {
    throw ParseError(e.what(), 1, 1);
  }
}

}  // namespace stlmarl::stl
