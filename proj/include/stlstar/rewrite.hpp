#pragma once

// Satisfaction-preserving formula rewrites that shrink the set of frozen
// indices the monitor has to enumerate.
//
//   distribute_freeze            *i!p -> !*ip,  *i(p||q) -> *ip || *iq, ...
//   merge_freeze_into_predicate  *i mu -> mu with block i folded into block 0
//   merge_consecutive_freezes    *i*j p -> *k p[i/k][j/k], k fresh
//   minimize_indices             DFS renaming onto {1..max free count}
//   optimize                     the four passes above, to a fixpoint

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stlstar/error.hpp"
#include "stlstar/formula.hpp"

namespace stlstar {

/// Source index -> destination index. Indices without an entry map to
/// themselves.
using Renaming = std::map<FrozenIndex, FrozenIndex>;

namespace detail {

inline FrozenIndex apply(const Renaming& pi, FrozenIndex i) {
  auto it = pi.find(i);
  return it == pi.end() ? i : it->second;
}

/// Predicate with every frozen block relabelled through `map_index`;
/// colliding blocks are summed. A predicate whose coefficients all cancel
/// becomes the constant it denotes.
template <typename MapIndex>
Formula relabel_predicate(const LinearPredicate& p, MapIndex&& map_index) {
  LinearPredicate::Coefficients out;
  for (const auto& [key, coef] : p.coefficients()) out[{map_index(key.first), key.second}] += coef;
  bool any = false;
  for (const auto& [key, coef] : out) any = any || coef != 0.0;
  if (!any) return p.offset() >= 0.0 ? make_true() : make_not(make_true());
  return make_pred(LinearPredicate(std::move(out), p.offset()));
}

/// Renames free occurrences of `from` to `to`; binders of `from` stop the
/// substitution.
inline Formula substitute_free(const Formula& f, FrozenIndex from, FrozenIndex to) {
  switch (f->op()) {
    case Op::True: return f;
    case Op::Pred:
      if (!f->predicate().frozen_indices().contains(from)) return f;
      return relabel_predicate(f->predicate(), [&](FrozenIndex i) { return i == from ? to : i; });
    case Op::Freeze:
      if (f->index() == from) return f;
      return make_freeze(f->index(), substitute_free(f->child(), from, to));
    default:
      return with_children(f, substitute_free(f->lhs(), from, to),
                           f->rhs() ? substitute_free(f->rhs(), from, to) : nullptr);
  }
}

inline Formula push_freeze(FrozenIndex i, const Formula& f) {
  if (f->op() == Op::True) return f;
  if (!free_indices(f).contains(i)) return f;
  switch (f->op()) {
    case Op::Not: return make_not(push_freeze(i, f->child()));
    case Op::Or: return make_or(push_freeze(i, f->lhs()), push_freeze(i, f->rhs()));
    case Op::And: return make_and(push_freeze(i, f->lhs()), push_freeze(i, f->rhs()));
    default: return make_freeze(i, f);
  }
}

inline Formula minimize(const Formula& f, const Renaming& pi) {
  switch (f->op()) {
    case Op::True: return f;
    case Op::Pred:
      return relabel_predicate(f->predicate(), [&](FrozenIndex i) { return i == 0 ? 0 : apply(pi, i); });
    case Op::Freeze: {
      const FrozenIndex source = f->index();
      auto inner_free = free_indices(f->child());
      if (!inner_free.contains(source)) return minimize(f->child(), pi);
      std::set<FrozenIndex> occupied;
      for (FrozenIndex k : inner_free)
        if (k != source) occupied.insert(apply(pi, k));
      FrozenIndex dest = 1;
      while (occupied.contains(dest)) ++dest;
      Renaming inner = pi;
      inner[source] = dest;
      return make_freeze(dest, minimize(f->child(), inner));
    }
    default:
      return with_children(f, minimize(f->lhs(), pi), f->rhs() ? minimize(f->rhs(), pi) : nullptr);
  }
}

}  // namespace detail

/// Applies `pi` to every predicate coefficient and every freeze operator.
/// Throws RenamingError if a free index would be captured by a binder.
inline Formula rename(const Formula& f, const Renaming& pi) {
  using detail::apply;
  switch (f->op()) {
    case Op::True: return f;
    case Op::Pred:
      return detail::relabel_predicate(f->predicate(), [&](FrozenIndex i) { return i == 0 ? 0 : apply(pi, i); });
    case Op::Freeze: {
      const FrozenIndex dest = apply(pi, f->index());
      for (FrozenIndex j : free_indices(f->child()))
        if (j != f->index() && apply(pi, j) == dest)
          throw RenamingError("renaming index " + std::to_string(j) + " to " + std::to_string(dest) +
                              " would be captured by *" + std::to_string(dest));
      return make_freeze(dest, rename(f->child(), pi));
    }
    default: return with_children(f, rename(f->lhs(), pi), f->rhs() ? rename(f->rhs(), pi) : nullptr);
  }
}

/// Moves freeze operators below Boolean connectives until they sit on a
/// temporal operator, a predicate or another freeze. Freezes of indices
/// that are not free in their scope are dropped.
inline Formula distribute_freeze(const Formula& f) {
  switch (f->op()) {
    case Op::True:
    case Op::Pred: return f;
    case Op::Freeze: return detail::push_freeze(f->index(), distribute_freeze(f->child()));
    default:
      return with_children(f, distribute_freeze(f->lhs()), f->rhs() ? distribute_freeze(f->rhs()) : nullptr);
  }
}

/// *i mu  ->  mu'  with a'_0j = a_0j + a_ij and a'_ij = 0.
inline Formula merge_freeze_into_predicate(const Formula& f) {
  switch (f->op()) {
    case Op::True:
    case Op::Pred: return f;
    case Op::Freeze: {
      Formula child = merge_freeze_into_predicate(f->child());
      if (child->op() != Op::Pred) return make_freeze(f->index(), child);
      const FrozenIndex i = f->index();
      return detail::relabel_predicate(child->predicate(), [i](FrozenIndex k) { return k == i ? 0 : k; });
    }
    default:
      return with_children(f, merge_freeze_into_predicate(f->lhs()),
                           f->rhs() ? merge_freeze_into_predicate(f->rhs()) : nullptr);
  }
}

/// *i *j phi  ->  *k phi[i/k][j/k] with k an index unused anywhere in the
/// formula (max used index + 1, then counting up).
inline Formula merge_consecutive_freezes(const Formula& f) {
  auto used = all_indices(f);
  FrozenIndex fresh = used.empty() ? 1 : *used.rbegin() + 1;
  auto go = [&fresh](auto&& self, const Formula& g) -> Formula {
    switch (g->op()) {
      case Op::True:
      case Op::Pred: return g;
      case Op::Freeze: {
        Formula child = self(self, g->child());
        if (child->op() != Op::Freeze) return make_freeze(g->index(), child);
        const FrozenIndex k = fresh++;
        Formula body = detail::substitute_free(child->child(), g->index(), k);
        body = detail::substitute_free(body, child->index(), k);
        return make_freeze(k, body);
      }
      default: return with_children(g, self(self, g->lhs()), g->rhs() ? self(self, g->rhs()) : nullptr);
    }
  };
  return go(go, f);
}

/// Renames frozen indices so that the result uses exactly as many indices
/// as the largest number of free indices in any subformula. At each freeze
/// the smallest destination not held by another index free below it is
/// taken; top-level free indices are assigned 1..m first. Vacuous freezes
/// are dropped.
inline Formula minimize_indices(const Formula& f) {
  Renaming pi;
  FrozenIndex next = 1;
  for (FrozenIndex i : free_indices(f)) pi[i] = next++;
  return detail::minimize(f, pi);
}

struct OptimizationStep {
  std::string pass;
  Formula result;
};

struct OptimizationReport {
  Formula original;
  Formula optimized;
  std::size_t indices_before = 0;
  std::size_t indices_after = 0;
  std::size_t iterations = 0;
  /// Result after every pass that changed the formula, in order.
  std::vector<OptimizationStep> steps;
};

inline constexpr std::size_t kMaxOptimizeIterations = 100;

inline OptimizationReport optimize_with_report(const Formula& f) {
  OptimizationReport report;
  report.original = f;
  report.indices_before = index_count(f);

  using Pass = Formula (*)(const Formula&);
  static constexpr std::pair<const char*, Pass> passes[] = {
      {"distribute_freeze", &distribute_freeze},
      {"merge_freeze_into_predicate", &merge_freeze_into_predicate},
      {"merge_consecutive_freezes", &merge_consecutive_freezes},
      {"minimize_indices", &minimize_indices},
  };

  Formula current = f;
  while (report.iterations < kMaxOptimizeIterations) {
    ++report.iterations;
    Formula before = current;
    for (const auto& [name, pass] : passes) {
      Formula next = pass(current);
      if (!structurally_equal(next, current)) report.steps.push_back({name, next});
      current = next;
    }
    if (structurally_equal(before, current)) break;
  }
  report.optimized = current;
  report.indices_after = index_count(current);
  return report;
}

inline Formula optimize(const Formula& f) { return optimize_with_report(f).optimized; }

}  // namespace stlstar
