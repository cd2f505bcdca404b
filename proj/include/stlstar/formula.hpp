#pragma once

// STL* abstract syntax.
//
// A formula is an immutable tree of FormulaNode values shared through
// `Formula` (a shared_ptr to const). Every node receives a process-unique
// id at construction; the monitor uses it as the memoization key, so two
// structurally equal subtrees at different positions are distinct keys.
//
// Basic constructors: true, predicate, not, or, until, freeze.
// Derived constructors kept natively for speed: and, eventually, globally.
// `desugar` rewrites the derived ones into the basic ones.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "stlstar/error.hpp"

namespace stlstar {

/// Frozen-time index. Index 0 is reserved for "current time" inside
/// predicate coefficient tables; freeze operators use indices >= 1.
using FrozenIndex = int;

/// Closed, bounded, non-singular time interval [lo, hi].
struct TimeInterval {
  double lo = 0.0;
  double hi = 1.0;

  TimeInterval() = default;
  TimeInterval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw FormulaError("time interval bounds must be finite");
    if (lo < 0.0) throw FormulaError("time interval bounds must be non-negative");
    if (!(lo < hi)) throw FormulaError("time interval must be non-singular with lo < hi");
  }

  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

/// Linear predicate  sum_j a_0j x_j + sum_i sum_j a_ij x_j*i + b >= 0.
///
/// Coefficients are keyed by (frozen index, variable name); index 0 is the
/// current time. Zero coefficients are never stored. The ordering of the
/// map fixes the summation order used for robustness.
class LinearPredicate {
public:
  using Key = std::pair<FrozenIndex, std::string>;
  using Coefficients = std::map<Key, double>;

  LinearPredicate(Coefficients coeffs, double offset) : offset_(offset) {
    if (!std::isfinite(offset)) throw FormulaError("predicate offset must be finite");
    for (auto& [key, value] : coeffs) {
      if (key.first < 0) throw FormulaError("frozen index must be non-negative");
      if (!std::isfinite(value)) throw FormulaError("predicate coefficients must be finite");
      if (value != 0.0) coeffs_.emplace(key, value);
    }
    if (coeffs_.empty())
      throw FormulaError("predicate has only zero coefficients and is trivially true or false");
  }

  const Coefficients& coefficients() const noexcept { return coeffs_; }
  double offset() const noexcept { return offset_; }

  double coefficient(FrozenIndex index, const std::string& var) const {
    auto it = coeffs_.find({index, var});
    return it == coeffs_.end() ? 0.0 : it->second;
  }

  /// Frozen indices (>= 1) with at least one non-zero coefficient.
  std::set<FrozenIndex> frozen_indices() const {
    std::set<FrozenIndex> out;
    for (const auto& [key, value] : coeffs_)
      if (key.first != 0) out.insert(key.first);
    return out;
  }

  /// sum over i in {0} u I of the Euclidean norm of coefficient block i.
  double denominator() const {
    double total = 0.0;
    auto it = coeffs_.begin();
    while (it != coeffs_.end()) {
      const FrozenIndex block = it->first.first;
      double squares = 0.0;
      for (; it != coeffs_.end() && it->first.first == block; ++it) squares += it->second * it->second;
      total += std::sqrt(squares);
    }
    return total;
  }

  friend bool operator==(const LinearPredicate&, const LinearPredicate&) = default;

private:
  Coefficients coeffs_;
  double offset_;
};

enum class Op { True, Pred, Not, Or, And, Until, Eventually, Globally, Freeze };

class FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

class FormulaNode {
  struct Private {};

public:
  FormulaNode(Private, Op op, std::optional<LinearPredicate> pred, TimeInterval interval,
              FrozenIndex index, Formula lhs, Formula rhs)
      : op_(op),
        id_(next_id()),
        pred_(std::move(pred)),
        interval_(interval),
        index_(index),
        lhs_(std::move(lhs)),
        rhs_(std::move(rhs)) {
    const double l = lhs_ ? lhs_->length_ : 0.0;
    const double r = rhs_ ? rhs_->length_ : 0.0;
    switch (op_) {
      case Op::True:
      case Op::Pred: length_ = 0.0; break;
      case Op::Not:
      case Op::Freeze: length_ = l; break;
      case Op::Or:
      case Op::And: length_ = std::max(l, r); break;
      case Op::Until: length_ = std::max(l, r) + interval_.hi; break;
      case Op::Eventually:
      case Op::Globally: length_ = l + interval_.hi; break;
    }
    size_ = 1 + (lhs_ ? lhs_->size_ : 0) + (rhs_ ? rhs_->size_ : 0);
  }

  Op op() const noexcept { return op_; }
  std::uint64_t id() const noexcept { return id_; }

  /// Valid only for Op::Pred.
  const LinearPredicate& predicate() const { return *pred_; }
  /// Valid for Until, Eventually, Globally.
  const TimeInterval& interval() const noexcept { return interval_; }
  /// Valid for Freeze.
  FrozenIndex index() const noexcept { return index_; }

  /// Single child of unary nodes; left operand of binary nodes.
  const Formula& child() const noexcept { return lhs_; }
  const Formula& lhs() const noexcept { return lhs_; }
  const Formula& rhs() const noexcept { return rhs_; }

  /// Necessary input length, computed bottom-up at construction.
  double necessary_length() const noexcept { return length_; }
  /// Number of nodes in the tree.
  std::size_t size() const noexcept { return size_; }

  bool is_binary() const noexcept { return op_ == Op::Or || op_ == Op::And || op_ == Op::Until; }
  bool is_temporal() const noexcept {
    return op_ == Op::Until || op_ == Op::Eventually || op_ == Op::Globally;
  }

  static Formula make(Op op, std::optional<LinearPredicate> pred, TimeInterval interval,
                      FrozenIndex index, Formula lhs, Formula rhs) {
    return std::make_shared<const FormulaNode>(Private{}, op, std::move(pred), interval, index,
                                               std::move(lhs), std::move(rhs));
  }

private:
  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{0};
    return ++counter;
  }

  Op op_;
  std::uint64_t id_;
  std::optional<LinearPredicate> pred_;
  TimeInterval interval_;
  FrozenIndex index_ = 0;
  Formula lhs_;
  Formula rhs_;
  double length_ = 0.0;
  std::size_t size_ = 1;
};

// ---------------------------------------------------------------------------
// Constructors

inline Formula make_true() { return FormulaNode::make(Op::True, std::nullopt, {}, 0, nullptr, nullptr); }

inline Formula make_pred(LinearPredicate pred) {
  return FormulaNode::make(Op::Pred, std::move(pred), {}, 0, nullptr, nullptr);
}

inline Formula make_not(Formula f) {
  return FormulaNode::make(Op::Not, std::nullopt, {}, 0, std::move(f), nullptr);
}

inline Formula make_or(Formula a, Formula b) {
  return FormulaNode::make(Op::Or, std::nullopt, {}, 0, std::move(a), std::move(b));
}

inline Formula make_and(Formula a, Formula b) {
  return FormulaNode::make(Op::And, std::nullopt, {}, 0, std::move(a), std::move(b));
}

inline Formula make_until(TimeInterval interval, Formula a, Formula b) {
  return FormulaNode::make(Op::Until, std::nullopt, interval, 0, std::move(a), std::move(b));
}

inline Formula make_eventually(TimeInterval interval, Formula f) {
  return FormulaNode::make(Op::Eventually, std::nullopt, interval, 0, std::move(f), nullptr);
}

inline Formula make_globally(TimeInterval interval, Formula f) {
  return FormulaNode::make(Op::Globally, std::nullopt, interval, 0, std::move(f), nullptr);
}

inline Formula make_freeze(FrozenIndex index, Formula f) {
  if (index < 1) throw FormulaError("freeze index must be a positive integer");
  return FormulaNode::make(Op::Freeze, std::nullopt, {}, index, std::move(f), nullptr);
}

/// Rebuilds `f` with new children, keeping operator and payload.
inline Formula with_children(const Formula& f, Formula lhs, Formula rhs = nullptr) {
  switch (f->op()) {
    case Op::True:
    case Op::Pred: return f;
    case Op::Not: return make_not(std::move(lhs));
    case Op::Or: return make_or(std::move(lhs), std::move(rhs));
    case Op::And: return make_and(std::move(lhs), std::move(rhs));
    case Op::Until: return make_until(f->interval(), std::move(lhs), std::move(rhs));
    case Op::Eventually: return make_eventually(f->interval(), std::move(lhs));
    case Op::Globally: return make_globally(f->interval(), std::move(lhs));
    case Op::Freeze: return make_freeze(f->index(), std::move(lhs));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Static analyses

inline double necessary_length(const Formula& f) { return f->necessary_length(); }

/// Indices used in a predicate and not in the scope of a matching freeze.
inline std::set<FrozenIndex> free_indices(const Formula& f) {
  switch (f->op()) {
    case Op::True: return {};
    case Op::Pred: return f->predicate().frozen_indices();
    case Op::Freeze: {
      auto inner = free_indices(f->child());
      inner.erase(f->index());
      return inner;
    }
    default: {
      auto out = free_indices(f->lhs());
      if (f->rhs()) {
        auto r = free_indices(f->rhs());
        out.insert(r.begin(), r.end());
      }
      return out;
    }
  }
}

/// Every index mentioned anywhere, by a freeze operator or a predicate.
inline std::set<FrozenIndex> all_indices(const Formula& f) {
  std::set<FrozenIndex> out;
  auto visit = [&](auto&& self, const Formula& g) -> void {
    if (g->op() == Op::Pred) {
      auto p = g->predicate().frozen_indices();
      out.insert(p.begin(), p.end());
    }
    if (g->op() == Op::Freeze) out.insert(g->index());
    if (g->lhs()) self(self, g->lhs());
    if (g->rhs()) self(self, g->rhs());
  };
  visit(visit, f);
  return out;
}

inline std::size_t index_count(const Formula& f) { return all_indices(f).size(); }

/// Largest number of free indices over all subformulas (root included).
inline std::size_t max_free_index_count(const Formula& f) {
  std::size_t best = free_indices(f).size();
  if (f->lhs()) best = std::max(best, max_free_index_count(f->lhs()));
  if (f->rhs()) best = std::max(best, max_free_index_count(f->rhs()));
  return best;
}

inline bool structurally_equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op() != b->op()) return false;
  switch (a->op()) {
    case Op::True: return true;
    case Op::Pred: return a->predicate() == b->predicate();
    case Op::Freeze:
      if (a->index() != b->index()) return false;
      break;
    case Op::Until:
    case Op::Eventually:
    case Op::Globally:
      if (!(a->interval() == b->interval())) return false;
      break;
    default: break;
  }
  return structurally_equal(a->lhs(), b->lhs()) && structurally_equal(a->rhs(), b->rhs());
}

/// Rewrites F, G and && into true, !, || and U.
inline Formula desugar(const Formula& f) {
  switch (f->op()) {
    case Op::True:
    case Op::Pred: return f;
    case Op::Not: return make_not(desugar(f->child()));
    case Op::Or: return make_or(desugar(f->lhs()), desugar(f->rhs()));
    case Op::And:
      return make_not(make_or(make_not(desugar(f->lhs())), make_not(desugar(f->rhs()))));
    case Op::Until: return make_until(f->interval(), desugar(f->lhs()), desugar(f->rhs()));
    case Op::Eventually: return make_until(f->interval(), make_true(), desugar(f->child()));
    case Op::Globally:
      return make_not(make_until(f->interval(), make_true(), make_not(desugar(f->child()))));
    case Op::Freeze: return make_freeze(f->index(), desugar(f->child()));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Printing

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string format(const LinearPredicate& p) {
  std::string out;
  bool first = true;
  for (const auto& [key, coef] : p.coefficients()) {
    const double mag = std::abs(coef);
    if (first) {
      if (coef < 0) out += "-";
    } else {
      out += coef < 0 ? " - " : " + ";
    }
    if (mag != 1.0) out += format_number(mag) + "*";
    out += key.second;
    if (key.first != 0) out += "*" + std::to_string(key.first);
    first = false;
  }
  out += " >= ";
  out += format_number(-p.offset());
  return out;
}

inline std::string format(const Formula& f);

namespace detail {

inline std::string format_interval(const TimeInterval& i) {
  return "[" + format_number(i.lo) + ", " + format_number(i.hi) + "]";
}

inline std::string wrap_operand(const Formula& f) {
  return f->is_binary() ? "(" + format(f) + ")" : format(f);
}

inline std::string wrap_unary_child(const Formula& f) {
  return (f->is_binary() || f->op() == Op::Pred) ? "(" + format(f) + ")" : format(f);
}

}  // namespace detail

/// Concrete syntax accepted by `parse`.
inline std::string format(const Formula& f) {
  using detail::wrap_operand;
  using detail::wrap_unary_child;
  switch (f->op()) {
    case Op::True: return "true";
    case Op::Pred: return format(f->predicate());
    case Op::Not: return "!" + wrap_unary_child(f->child());
    case Op::Or: return wrap_operand(f->lhs()) + " || " + wrap_operand(f->rhs());
    case Op::And: return wrap_operand(f->lhs()) + " && " + wrap_operand(f->rhs());
    case Op::Until:
      return wrap_operand(f->lhs()) + " U" + detail::format_interval(f->interval()) + " " +
             wrap_operand(f->rhs());
    case Op::Eventually: return "F" + detail::format_interval(f->interval()) + "(" + format(f->child()) + ")";
    case Op::Globally: return "G" + detail::format_interval(f->interval()) + "(" + format(f->child()) + ")";
    case Op::Freeze: return "*" + std::to_string(f->index()) + " " + wrap_unary_child(f->child());
  }
  return {};
}

}  // namespace stlstar
