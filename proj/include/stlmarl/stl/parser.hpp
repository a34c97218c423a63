#pragma once

#include <stdexcept>
#include <string>

#include "stlmarl/stl/ast.hpp"

namespace stlmarl::stl {

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, int line, int col);
  int line() const { return line_; }
  int col() const { return col_; }

private:
  int line_, col_;
};

/// Parses a formula in the concrete grammar:
///
///   formula := disj
///   disj    := conj { "|" conj }
///   conj    := unary { "&" unary }
///   unary   := "!" unary | "G[" bound "," bound "]" unary
///            | "F[" bound "," bound "]" unary
///            | atom [ "U[" bound "," bound "]" unary ]
///   atom    := "(" formula ")" | expr ("<="|">=") number
///   expr    := term { ("+"|"-") term }
///   term    := factor { ("*"|"/") factor }
///   factor  := number | ident | "-" factor | "(" expr ")"
///            | "abs(" expr ")" | "sqrt(" expr ")"
///            | "min(" expr "," expr ")" | "max(" expr "," expr ")"
///   bound   := int | "T" [ ("+"|"-") int ]
///
/// Whitespace-insensitive. Horizon-relative bounds ("T-1") are resolved by
/// instantiate_horizon before evaluation.
FormulaPtr parse_formula(const std::string& text);

}  // namespace stlmarl::stl
