#pragma once

// Text grammar (whitespace-insensitive):
//
//   formula  := "true" | "false" | pred | "!" formula | formula "||" formula
//             | formula "&&" formula | formula "U[" num "," num "]" formula
//             | "F[" num "," num "]" formula | "G[" num "," num "]" formula
//             | "*" [int] formula | "(" formula ")"
//   pred     := linexpr ("<=" | ">=" | "<" | ">") linexpr
//   linexpr  := ["-"] term (("+" | "-") term)*
//   term     := [num "*"] ident ["*" [int]] | num
//
// Precedence: unary > && > || > U, with U right-associative. A bare
// `ident*` or `*` without an index means index 1.

#include <cmath>
#include <string>
#include <string_view>

#include "stlstar/error.hpp"
#include "stlstar/formula.hpp"
#include "stlstar/lexer.hpp"

namespace stlstar {

namespace detail {

class FormulaParser {
public:
  explicit FormulaParser(std::string_view text) : ts_(tokenize(text)) {}

  Formula parse_all() {
    Formula f = parse_until();
    if (!ts_.at_end()) throw ParseError("unexpected trailing input '" + ts_.peek().text + "'", ts_.peek().pos);
    return f;
  }

private:
  bool at_temporal(std::string_view name) const {
    return ts_.peek().is_ident(name) && ts_.peek(1).is("[");
  }

  Formula parse_until() {
    Formula lhs = parse_or();
    if (at_temporal("U")) {
      ts_.next();
      TimeInterval interval = parse_interval();
      Formula rhs = parse_until();
      return make_until(interval, lhs, rhs);
    }
    return lhs;
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (ts_.accept("||")) f = make_or(f, parse_and());
    return f;
  }

  Formula parse_and() {
    Formula f = parse_unary();
    while (ts_.accept("&&")) f = make_and(f, parse_unary());
    return f;
  }

  Formula parse_unary() {
    if (ts_.accept("!")) return make_not(parse_unary());
    if (ts_.peek().is("*")) {
      ts_.next();
      FrozenIndex index = 1;
      if (ts_.peek().kind == TokenKind::Number) index = parse_index(ts_.next());
      return make_freeze(index, parse_unary());
    }
    if (at_temporal("F")) {
      ts_.next();
      TimeInterval interval = parse_interval();
      return make_eventually(interval, parse_unary());
    }
    if (at_temporal("G")) {
      ts_.next();
      TimeInterval interval = parse_interval();
      return make_globally(interval, parse_unary());
    }
    return parse_primary();
  }

  Formula parse_primary() {
    const Token& t = ts_.peek();
    if (t.is_ident("true")) {
      ts_.next();
      return make_true();
    }
    if (t.is_ident("false")) {
      ts_.next();
      return make_not(make_true());
    }
    if (ts_.accept("(")) {
      Formula f = parse_until();
      ts_.expect(")");
      return f;
    }
    if (t.kind == TokenKind::Number || t.kind == TokenKind::Ident || t.is("-") || t.is("+"))
      return parse_predicate();
    throw ParseError("expected formula" + ts_.found(), t.pos);
  }

  TimeInterval parse_interval() {
    const std::size_t start = ts_.expect("[").pos;
    const double lo = parse_bound();
    ts_.expect(",");
    const double hi = parse_bound();
    ts_.expect("]");
    if (!(lo < hi)) throw ParseError("time interval must satisfy lo < hi", start);
    return TimeInterval(lo, hi);
  }

  double parse_bound() {
    const Token& t = ts_.peek();
    if (t.is("-")) throw ParseError("negative interval bound", t.pos);
    if (t.kind != TokenKind::Number) throw ParseError("expected interval bound" + ts_.found(), t.pos);
    ts_.next();
    if (!std::isfinite(t.number)) throw ParseError("interval bound must be finite", t.pos);
    return t.number;
  }

  static FrozenIndex parse_index(const Token& t) {
    if (t.text.find_first_not_of("0123456789") != std::string::npos || t.number < 1 || t.number > 1e6)
      throw ParseError("frozen index must be a positive integer", t.pos);
    return static_cast<FrozenIndex>(t.number);
  }

  // Accumulates sign * linexpr into coeffs/offset.
  void parse_linexpr(double sign, LinearPredicate::Coefficients& coeffs, double& offset) {
    double term_sign = 1.0;
    if (ts_.accept("-")) term_sign = -1.0;
    else ts_.accept("+");
    parse_term(sign * term_sign, coeffs, offset);
    for (;;) {
      if (ts_.accept("+")) term_sign = 1.0;
      else if (ts_.accept("-")) term_sign = -1.0;
      else break;
      parse_term(sign * term_sign, coeffs, offset);
    }
  }

  void parse_term(double sign, LinearPredicate::Coefficients& coeffs, double& offset) {
    const Token& t = ts_.peek();
    double scale = 1.0;
    if (t.kind == TokenKind::Number) {
      ts_.next();
      scale = t.number;
      if (!ts_.peek().is("*")) {
        offset += sign * scale;
        return;
      }
      ts_.next();
    }
    const Token& name = ts_.peek();
    if (name.kind != TokenKind::Ident) throw ParseError("expected variable name" + ts_.found(), name.pos);
    ts_.next();
    FrozenIndex index = 0;
    if (ts_.accept("*")) {
      index = 1;
      if (ts_.peek().kind == TokenKind::Number) index = parse_index(ts_.next());
    }
    coeffs[{index, name.text}] += sign * scale;
  }

  Formula parse_predicate() {
    const std::size_t start = ts_.peek().pos;
    LinearPredicate::Coefficients coeffs;
    double offset = 0.0;
    LinearPredicate::Coefficients rhs_coeffs;
    double rhs_offset = 0.0;
    parse_linexpr(1.0, coeffs, offset);

    const Token& rel = ts_.peek();
    if (rel.is("==") || rel.is("!="))
      throw ParseError("equality predicates are not supported; use an inequality", rel.pos);
    double sign = 0.0;
    if (rel.is(">=") || rel.is(">")) sign = 1.0;
    else if (rel.is("<=") || rel.is("<")) sign = -1.0;
    else throw ParseError("expected comparison operator" + ts_.found(), rel.pos);
    ts_.next();
    parse_linexpr(1.0, rhs_coeffs, rhs_offset);

    // Normalize lhs REL rhs into sign * (lhs - rhs) >= 0.
    LinearPredicate::Coefficients merged;
    for (const auto& [k, v] : coeffs) merged[k] += sign * v;
    for (const auto& [k, v] : rhs_coeffs) merged[k] -= sign * v;
    const double b = sign * (offset - rhs_offset);
    bool any = false;
    for (const auto& [k, v] : merged) any = any || v != 0.0;
    if (!any) throw ParseError("predicate has only zero coefficients", start);
    return make_pred(LinearPredicate(std::move(merged), b));
  }

  TokenStream ts_;
};

}  // namespace detail

/// Parses formula text. Throws ParseError with a byte position.
inline Formula parse(std::string_view text) {
  try {
    return detail::FormulaParser(text).parse_all();
  } catch (const FormulaError& e) {
    throw ParseError(e.what(), 0);
  }
}

}  // namespace stlstar
