#pragma once

// Arithmetic right-hand-side expressions for user-defined ODE models:
// + - * / over constants, state variables and parameters, with parentheses
// and unary minus.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stlstar/error.hpp"
#include "stlstar/lexer.hpp"

namespace stlstar {

class Expression {
public:
  enum class Kind { Constant, Variable, Parameter, Negate, Add, Sub, Mul, Div };

  /// Compiles `text`; identifiers are resolved against `variables` first,
  /// then `parameters`.
  static Expression compile(std::string_view text, const std::vector<std::string>& variables,
                            const std::vector<std::string>& parameters) {
    Compiler c(text, variables, parameters);
    Expression e;
    e.root_ = c.parse_all();
    return e;
  }

  double evaluate(std::span<const double> state, std::span<const double> params) const {
    return eval(*root_, state, params);
  }

private:
  struct Node {
    Kind kind;
    double value = 0.0;
    std::size_t slot = 0;
    std::unique_ptr<Node> lhs;
    std::unique_ptr<Node> rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  static double eval(const Node& n, std::span<const double> x, std::span<const double> p) {
    switch (n.kind) {
      case Kind::Constant: return n.value;
      case Kind::Variable: return x[n.slot];
      case Kind::Parameter: return p[n.slot];
      case Kind::Negate: return -eval(*n.lhs, x, p);
      case Kind::Add: return eval(*n.lhs, x, p) + eval(*n.rhs, x, p);
      case Kind::Sub: return eval(*n.lhs, x, p) - eval(*n.rhs, x, p);
      case Kind::Mul: return eval(*n.lhs, x, p) * eval(*n.rhs, x, p);
      case Kind::Div: return eval(*n.lhs, x, p) / eval(*n.rhs, x, p);
    }
    return 0.0;
  }

  class Compiler {
  public:
    Compiler(std::string_view text, const std::vector<std::string>& vars,
             const std::vector<std::string>& params)
        : ts_(detail::tokenize(text)), vars_(vars), params_(params) {}

    NodePtr parse_all() {
      auto n = parse_sum();
      if (!ts_.at_end()) throw ParseError("unexpected trailing input '" + ts_.peek().text + "'", ts_.peek().pos);
      return NodePtr(std::move(n));
    }

  private:
    static std::unique_ptr<Node> binary(Kind k, std::unique_ptr<Node> a, std::unique_ptr<Node> b) {
      auto n = std::make_unique<Node>();
      n->kind = k;
      n->lhs = std::move(a);
      n->rhs = std::move(b);
      return n;
    }

    std::unique_ptr<Node> parse_sum() {
      auto n = parse_product();
      for (;;) {
        if (ts_.accept("+")) n = binary(Kind::Add, std::move(n), parse_product());
        else if (ts_.accept("-")) n = binary(Kind::Sub, std::move(n), parse_product());
        else return n;
      }
    }

    std::unique_ptr<Node> parse_product() {
      auto n = parse_factor();
      for (;;) {
        if (ts_.accept("*")) n = binary(Kind::Mul, std::move(n), parse_factor());
        else if (ts_.accept("/")) n = binary(Kind::Div, std::move(n), parse_factor());
        else return n;
      }
    }

    std::unique_ptr<Node> parse_factor() {
      if (ts_.accept("-")) {
        auto n = std::make_unique<Node>();
        n->kind = Kind::Negate;
        n->lhs = parse_factor();
        return n;
      }
      if (ts_.accept("+")) return parse_factor();
      if (ts_.accept("(")) {
        auto n = parse_sum();
        ts_.expect(")");
        return n;
      }
      const auto& t = ts_.peek();
      auto n = std::make_unique<Node>();
      if (t.kind == detail::TokenKind::Number) {
        n->kind = Kind::Constant;
        n->value = t.number;
      } else if (t.kind == detail::TokenKind::Ident) {
        if (auto v = find(vars_, t.text); v < vars_.size()) {
          n->kind = Kind::Variable;
          n->slot = v;
        } else if (auto q = find(params_, t.text); q < params_.size()) {
          n->kind = Kind::Parameter;
          n->slot = q;
        } else {
          throw ParseError("unknown identifier '" + t.text + "'", t.pos);
        }
      } else {
        throw ParseError("expected number, identifier or '('" + ts_.found(), t.pos);
      }
      ts_.next();
      return n;
    }

    static std::size_t find(const std::vector<std::string>& names, const std::string& name) {
      for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
      return names.size();
    }

    detail::TokenStream ts_;
    const std::vector<std::string>& vars_;
    const std::vector<std::string>& params_;
  };

  NodePtr root_;
};

}  // namespace stlstar
