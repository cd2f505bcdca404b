#pragma once

// Discrete STL* robustness monitoring.
//
// `Monitor` evaluates robustness at sample positions with a frozen state
// vector (sample positions per frozen index). Temporal nodes are
// precomputed for every admissible base position the first time they are
// requested for a given frozen state vector, and the whole array is kept
// in a memo table keyed by (node id, frozen positions of the node's free
// indices). Base position i is admissible when
//
//     tau_i + b + l <= l(tau),   l = necessary length of the operands.
//
// Requests outside the precomputed range fall back to evaluating the single
// position directly, with windows truncated at the end of the sequence.
//
// Eventually/Globally nodes are served by a monotonic-deque sliding window
// extremum (O(n) per precomputation); Until nodes and the non-sliding path
// scan each window explicitly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "stlstar/error.hpp"
#include "stlstar/formula.hpp"
#include "stlstar/signal.hpp"

namespace stlstar {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Robustness as text: 12 significant digits, "inf" / "-inf" for infinities.
inline std::string format_robustness(double value) {
  if (value == kInfinity) return "inf";
  if (value == -kInfinity) return "-inf";
  if (std::isnan(value)) return "nan";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

enum class Extremum { Min, Max };

/// Windowed extremum over time windows [tau_i + a, tau_i + b].
///
/// `value_at(k)` is called at most once per position, and only for
/// positions that fall inside some window. Emits one value for each base
/// position i < count. Empty windows produce the identity of the
/// operation (-inf for max, +inf for min).
template <typename ValueAt>
std::vector<double> sliding_extrema(std::span<const double> times, ValueAt&& value_at, double a,
                                    double b, Extremum mode, std::size_t count) {
  const bool is_max = mode == Extremum::Max;
  const double empty = is_max ? -kInfinity : kInfinity;
  auto dominated = [is_max](double kept, double incoming) {
    return is_max ? kept <= incoming : kept >= incoming;
  };

  struct Entry {
    std::size_t pos;
    double value;
  };
  std::deque<Entry> window;
  std::vector<double> out;
  out.reserve(count);
  std::size_t next = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double lo = times[i] + a;
    const double hi = times[i] + b;
    while (next < times.size() && times[next] <= hi) {
      if (times[next] >= lo) {
        const double v = value_at(next);
        while (!window.empty() && dominated(window.back().value, v)) window.pop_back();
        window.push_back({next, v});
      }
      ++next;
    }
    while (!window.empty() && times[window.front().pos] < lo) window.pop_front();
    out.push_back(window.empty() ? empty : window.front().value);
  }
  return out;
}

/// Array form: out[i] = extremum of values[k] with tau_k in [tau_i + a,
/// tau_i + b], for every i whose window ends inside the sequence.
inline std::vector<double> sliding_extrema(std::span<const double> values,
                                           std::span<const double> times, TimeInterval window,
                                           Extremum mode) {
  if (values.size() != times.size()) throw SignalError("values and times must have equal length");
  if (times.empty()) return {};
  std::size_t count = 0;
  while (count < times.size() && times[count] + window.hi <= times.back()) ++count;
  return sliding_extrema(
      times, [&](std::size_t k) { return values[k]; }, window.lo, window.hi, mode, count);
}

namespace detail {

/// Predicate with variable names resolved to sequence columns.
struct BoundPredicate {
  struct Term {
    FrozenIndex index;
    std::size_t column;
    double coef;
  };
  std::vector<Term> terms;
  double offset = 0.0;
  double denominator = 1.0;

  BoundPredicate(const LinearPredicate& pred, const TimedStateSequence& seq)
      : offset(pred.offset()), denominator(pred.denominator()) {
    for (const auto& [key, coef] : pred.coefficients()) {
      const auto col = seq.variable(key.second);
      if (col < 0) throw SignalError("formula refers to unknown variable '" + key.second + "'");
      terms.push_back({key.first, static_cast<std::size_t>(col), coef});
    }
  }

  /// Left-hand side value: sum of coefficient * state value, plus offset.
  double numerator(const TimedStateSequence& seq, std::size_t pos,
                   const FrozenStateVector& frozen) const {
    double sum = 0.0;
    for (const auto& t : terms) {
      const std::size_t at = t.index == 0 ? pos : frozen[static_cast<std::size_t>(t.index)];
      sum += t.coef * seq.value(at, t.column);
    }
    return sum + offset;
  }

  double robustness(const TimedStateSequence& seq, std::size_t pos,
                    const FrozenStateVector& frozen) const {
    return numerator(seq, pos, frozen) / denominator;
  }
};

inline void check_positions(const TimedStateSequence& seq, std::size_t pos,
                            const FrozenStateVector& frozen) {
  if (pos >= seq.size()) throw SignalError("sample position out of range");
  for (std::size_t p : frozen)
    if (p >= seq.size()) throw SignalError("frozen sample position out of range");
}

inline std::size_t frozen_slots(const Formula& phi) {
  auto indices = all_indices(phi);
  return indices.empty() ? 1 : static_cast<std::size_t>(*indices.rbegin()) + 1;
}

/// Binds every free index at the start of the sequence.
inline Formula close_free_indices(Formula phi) {
  for (FrozenIndex i : free_indices(phi)) phi = make_freeze(i, phi);
  return phi;
}

inline void check_length(const Formula& phi, const TimedStateSequence& seq) {
  if (seq.duration() < phi->necessary_length())
    throw LengthError(phi->necessary_length(), seq.duration());
}

}  // namespace detail

/// Robustness of a linear predicate at `pos` with frozen positions `frozen`
/// (slot i holds the position frozen for index i).
inline double predicate_robustness(const LinearPredicate& mu, const TimedStateSequence& seq,
                                   std::size_t pos, const FrozenStateVector& frozen) {
  detail::check_positions(seq, pos, frozen);
  for (FrozenIndex i : mu.frozen_indices())
    if (static_cast<std::size_t>(i) >= frozen.size())
      throw SignalError("frozen state vector has no slot for index " + std::to_string(i));
  return detail::BoundPredicate(mu, seq).robustness(seq, pos, frozen);
}

struct MonitorOptions {
  /// Keep precomputed temporal arrays across requests.
  bool memoize = true;
  /// Use the monotonic-deque path for Eventually/Globally.
  bool sliding_window = true;
};

/// Robustness evaluator bound to one sequence. Not thread-safe; use one
/// instance per thread.
class Monitor {
public:
  explicit Monitor(const TimedStateSequence& seq, MonitorOptions options = {})
      : seq_(seq), options_(options) {}

  /// rho(phi, seq) at position 0 with the zero frozen state vector.
  double robustness(const Formula& phi) {
    detail::check_length(phi, seq_);
    Formula closed = detail::close_free_indices(phi);
    FrozenStateVector zero(detail::frozen_slots(closed), 0);
    return evaluate(closed, 0, zero);
  }

  /// Robustness of `phi` at `pos` under `frozen`.
  double evaluate(const Formula& phi, std::size_t pos, const FrozenStateVector& frozen) {
    switch (phi->op()) {
      case Op::True: return kInfinity;
      case Op::Pred: return bound(*phi).robustness(seq_, pos, frozen);
      case Op::Not: return -evaluate(phi->child(), pos, frozen);
      case Op::Or: return std::max(evaluate(phi->lhs(), pos, frozen), evaluate(phi->rhs(), pos, frozen));
      case Op::And: return std::min(evaluate(phi->lhs(), pos, frozen), evaluate(phi->rhs(), pos, frozen));
      case Op::Freeze: {
        FrozenStateVector stored = frozen;
        const auto slot = static_cast<std::size_t>(phi->index());
        if (stored.size() <= slot) stored.resize(slot + 1, 0);
        stored[slot] = pos;
        return evaluate(phi->child(), pos, stored);
      }
      case Op::Until:
      case Op::Eventually:
      case Op::Globally: return temporal(phi, pos, frozen);
    }
    return 0.0;
  }

  /// Robustness of the temporal node `phi` for every admissible base
  /// position under `frozen`.
  std::vector<double> precompute(const Formula& phi, const FrozenStateVector& frozen) {
    const std::size_t count = admissible_count(*phi);
    const auto& iv = phi->interval();
    const auto times = std::span<const double>(seq_.times());

    if (phi->op() != Op::Until && options_.sliding_window) {
      const Formula& child = phi->child();
      auto value_at = [&](std::size_t k) { return evaluate(child, k, frozen); };
      const auto mode = phi->op() == Op::Eventually ? Extremum::Max : Extremum::Min;
      return sliding_extrema(times, value_at, iv.lo, iv.hi, mode, count);
    }

    // Operand values are fetched once per position (NaN marks "not yet").
    const double unset = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> left(seq_.size(), unset);
    std::vector<double> right(seq_.size(), unset);
    auto cached = [&](std::vector<double>& cache, const Formula& f, std::size_t k) {
      if (std::isnan(cache[k])) cache[k] = evaluate(f, k, frozen);
      return cache[k];
    };
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
      out[i] = scan_window(phi, i, [&](bool lhs, std::size_t k) {
        return lhs ? cached(left, phi->lhs(), k) : cached(right, phi->op() == Op::Until ? phi->rhs() : phi->child(), k);
      });
    }
    return out;
  }

  /// Number of precomputed arrays currently held.
  std::size_t memo_size() const noexcept { return memo_.size(); }

private:
  struct MemoKey {
    std::uint64_t node;
    FrozenStateVector frozen;
    bool operator==(const MemoKey&) const = default;
  };
  struct MemoKeyHash {
    std::size_t operator()(const MemoKey& k) const noexcept {
      std::size_t h = std::hash<std::uint64_t>{}(k.node);
      for (auto p : k.frozen) h ^= std::hash<std::size_t>{}(p) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      return h;
    }
  };

  const detail::BoundPredicate& bound(const FormulaNode& node) {
    auto it = predicates_.find(node.id());
    if (it == predicates_.end()) it = predicates_.emplace(node.id(), detail::BoundPredicate(node.predicate(), seq_)).first;
    return it->second;
  }

  const std::vector<FrozenIndex>& node_free_indices(const Formula& phi) {
    auto it = free_.find(phi->id());
    if (it == free_.end()) {
      auto s = free_indices(phi);
      it = free_.emplace(phi->id(), std::vector<FrozenIndex>(s.begin(), s.end())).first;
    }
    return it->second;
  }

  std::size_t admissible_count(const FormulaNode& node) const {
    double l = node.lhs()->necessary_length();
    if (node.rhs()) l = std::max(l, node.rhs()->necessary_length());
    const double b = node.interval().hi;
    const double end = seq_.duration();
    std::size_t count = 0;
    while (count < seq_.size() && seq_.time(count) + b + l <= end) ++count;
    return count;
  }

  /// One base position of the until recursion. `operand(true, k)` is the
  /// left operand at k, `operand(false, k)` the right one. Eventually and
  /// Globally are read as true U phi and !(true U !phi).
  template <typename Operand>
  double scan_window(const Formula& phi, std::size_t i, Operand&& operand) const {
    const auto& iv = phi->interval();
    const double lo = seq_.time(i) + iv.lo;
    const double hi = seq_.time(i) + iv.hi;
    const std::size_t n = seq_.size();
    switch (phi->op()) {
      case Op::Eventually: {
        double r = -kInfinity;
        for (std::size_t k = i; k < n && seq_.time(k) <= hi; ++k)
          if (seq_.time(k) >= lo) r = std::max(r, operand(false, k));
        return r;
      }
      case Op::Globally: {
        double r = kInfinity;
        for (std::size_t k = i; k < n && seq_.time(k) <= hi; ++k)
          if (seq_.time(k) >= lo) r = std::min(r, operand(false, k));
        return r;
      }
      default: break;
    }
    std::size_t k = i;
    double r1 = operand(true, k);
    while (k < n && seq_.time(k) < lo) {
      r1 = std::min(r1, operand(true, k));
      ++k;
    }
    double r = -kInfinity;
    while (k < n && seq_.time(k) <= hi) {
      r1 = std::min(r1, operand(true, k));
      const double r2 = operand(false, k);
      r = std::max(r, std::min(r1, r2));
      ++k;
    }
    return r;
  }

  double temporal(const Formula& phi, std::size_t pos, const FrozenStateVector& frozen) {
    if (options_.memoize) {
      MemoKey key{phi->id(), FrozenStateVector(frozen.size(), 0)};
      for (FrozenIndex i : node_free_indices(phi)) {
        const auto slot = static_cast<std::size_t>(i);
        if (slot < frozen.size()) key.frozen[slot] = frozen[slot];
      }
      auto it = memo_.find(key);
      if (it == memo_.end()) {
        auto values = precompute(phi, frozen);
        it = memo_.emplace(std::move(key), std::move(values)).first;
      }
      if (pos < it->second.size()) return it->second[pos];
    }
    return scan_window(phi, pos, [&](bool lhs, std::size_t k) {
      const Formula& f = lhs ? phi->lhs() : (phi->op() == Op::Until ? phi->rhs() : phi->child());
      return evaluate(f, k, frozen);
    });
  }

  const TimedStateSequence& seq_;
  MonitorOptions options_;
  std::unordered_map<MemoKey, std::vector<double>, MemoKeyHash> memo_;
  std::unordered_map<std::uint64_t, detail::BoundPredicate> predicates_;
  std::unordered_map<std::uint64_t, std::vector<FrozenIndex>> free_;
};

/// rho(phi, seq). Throws LengthError if seq is shorter than l(phi).
inline double monitor(const Formula& phi, const TimedStateSequence& seq, MonitorOptions options = {}) {
  return Monitor(seq, options).robustness(phi);
}

/// Exact discrete Boolean satisfaction; used as an oracle for the sign of
/// robustness and for rewrite equivalence.
class BooleanMonitor {
public:
  explicit BooleanMonitor(const TimedStateSequence& seq) : seq_(seq) {}

  bool satisfied(const Formula& phi) {
    detail::check_length(phi, seq_);
    Formula closed = detail::close_free_indices(phi);
    FrozenStateVector zero(detail::frozen_slots(closed), 0);
    return holds(closed, 0, zero);
  }

  bool holds(const Formula& phi, std::size_t pos, const FrozenStateVector& frozen) {
    switch (phi->op()) {
      case Op::True: return true;
      case Op::Pred: {
        auto it = predicates_.find(phi->id());
        if (it == predicates_.end())
          it = predicates_.emplace(phi->id(), detail::BoundPredicate(phi->predicate(), seq_)).first;
        return it->second.numerator(seq_, pos, frozen) >= 0.0;
      }
      case Op::Not: return !holds(phi->child(), pos, frozen);
      case Op::Or: return holds(phi->lhs(), pos, frozen) || holds(phi->rhs(), pos, frozen);
      case Op::And: return holds(phi->lhs(), pos, frozen) && holds(phi->rhs(), pos, frozen);
      case Op::Freeze: {
        FrozenStateVector stored = frozen;
        const auto slot = static_cast<std::size_t>(phi->index());
        if (stored.size() <= slot) stored.resize(slot + 1, 0);
        stored[slot] = pos;
        return holds(phi->child(), pos, stored);
      }
      case Op::Until:
      case Op::Eventually:
      case Op::Globally: break;
    }
    const auto& iv = phi->interval();
    const double lo = seq_.time(pos) + iv.lo;
    const double hi = seq_.time(pos) + iv.hi;
    const std::size_t n = seq_.size();
    if (phi->op() == Op::Eventually) {
      for (std::size_t k = pos; k < n && seq_.time(k) <= hi; ++k)
        if (seq_.time(k) >= lo && holds(phi->child(), k, frozen)) return true;
      return false;
    }
    if (phi->op() == Op::Globally) {
      for (std::size_t k = pos; k < n && seq_.time(k) <= hi; ++k)
        if (seq_.time(k) >= lo && !holds(phi->child(), k, frozen)) return false;
      return true;
    }
    // exists k in window: rhs at k and lhs on [pos, k]
    for (std::size_t k = pos; k < n && seq_.time(k) <= hi; ++k) {
      if (!holds(phi->lhs(), k, frozen)) return false;
      if (seq_.time(k) >= lo && holds(phi->rhs(), k, frozen)) return true;
    }
    return false;
  }

private:
  const TimedStateSequence& seq_;
  std::unordered_map<std::uint64_t, detail::BoundPredicate> predicates_;
};

inline bool boolean_monitor(const Formula& phi, const TimedStateSequence& seq) {
  return BooleanMonitor(seq).satisfied(phi);
}

}  // namespace stlstar
