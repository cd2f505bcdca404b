#pragma once

// Finite timed state sequences (sampled signals).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stlstar/error.hpp"

namespace stlstar {

/// Sample times paired with n-dimensional states. Times are strictly
/// increasing and start at 0. States are stored row-major.
class TimedStateSequence {
public:
  TimedStateSequence(std::vector<std::string> names, std::vector<double> times,
                     std::vector<double> values)
      : names_(std::move(names)), times_(std::move(times)), values_(std::move(values)) {
    if (names_.empty()) throw SignalError("sequence needs at least one variable");
    if (times_.empty()) throw SignalError("sequence needs at least one sample");
    if (values_.size() != times_.size() * names_.size())
      throw SignalError("state data does not match sample count times dimension");
    if (times_.front() != 0.0) throw SignalError("sequence must start at time 0");
    for (std::size_t k = 1; k < times_.size(); ++k)
      if (!(times_[k] > times_[k - 1])) throw SignalError("sample times must be strictly increasing");
    for (double v : values_)
      if (!std::isfinite(v)) throw SignalError("sequence contains a non-finite value");
  }

  std::size_t size() const noexcept { return times_.size(); }
  std::size_t dimension() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<double>& times() const noexcept { return times_; }
  double time(std::size_t k) const { return times_[k]; }
  /// Last timestamp, l(tau).
  double duration() const noexcept { return times_.back(); }

  std::span<const double> state(std::size_t k) const {
    return {values_.data() + k * names_.size(), names_.size()};
  }
  double value(std::size_t k, std::size_t var) const { return values_[k * names_.size() + var]; }

  /// Column position of a variable, or -1.
  std::ptrdiff_t variable(const std::string& name) const {
    for (std::size_t j = 0; j < names_.size(); ++j)
      if (names_[j] == name) return static_cast<std::ptrdiff_t>(j);
    return -1;
  }

  const std::vector<double>& raw_values() const noexcept { return values_; }

private:
  std::vector<std::string> names_;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// Sample positions for frozen indices; slot 0 is unused.
using FrozenStateVector = std::vector<std::size_t>;

/// Uniform grid 0, step, 2 step, ... with the last time >= horizon.
inline std::vector<double> uniform_times(double step, double horizon) {
  if (!(step > 0.0) || !std::isfinite(step)) throw SignalError("sampling step must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw SignalError("horizon must be non-negative");
  auto count = static_cast<std::size_t>(std::ceil(horizon / step));
  if (static_cast<double>(count) * step < horizon) ++count;
  std::vector<double> times(count + 1);
  for (std::size_t k = 0; k <= count; ++k) times[k] = static_cast<double>(k) * step;
  return times;
}

using Generator = std::function<std::vector<double>(double)>;

inline TimedStateSequence sample(const Generator& generator, std::vector<std::string> names,
                                 double step, double horizon) {
  auto times = uniform_times(step, horizon);
  std::vector<double> values;
  values.reserve(times.size() * names.size());
  for (double t : times) {
    auto x = generator(t);
    if (x.size() != names.size()) throw SignalError("generator returned wrong dimension");
    values.insert(values.end(), x.begin(), x.end());
  }
  return TimedStateSequence(std::move(names), std::move(times), std::move(values));
}

/// max_k || sigma_k - sigma'_k ||_2 over a shared sampling grid.
inline double sup_distance(const TimedStateSequence& a, const TimedStateSequence& b) {
  if (a.times() != b.times() || a.dimension() != b.dimension())
    throw SignalError("sup_distance needs sequences on identical sampling grids");
  double best = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double squares = 0.0;
    for (std::size_t j = 0; j < a.dimension(); ++j) {
      const double d = a.value(k, j) - b.value(k, j);
      squares += d * d;
    }
    best = std::max(best, std::sqrt(squares));
  }
  return best;
}

/// Random sequence within sup-distance strictly below `bound` of `s`.
/// Half of the samples are pushed to (just under) the bound, the rest
/// are uniform in radius. Deterministic for a given seed.
inline TimedStateSequence perturb(const TimedStateSequence& s, double bound, std::uint64_t seed) {
  if (!(bound >= 0.0)) throw SignalError("perturbation bound must be non-negative");
  if (bound == 0.0) return s;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double radius_cap = bound * (1.0 - 1e-9);

  std::vector<double> values = s.raw_values();
  const std::size_t n = s.dimension();
  std::vector<double> dir(n);
  for (std::size_t k = 0; k < s.size(); ++k) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& d : dir) {
        d = gauss(rng);
        norm += d * d;
      }
      norm = std::sqrt(norm);
    } while (norm == 0.0);
    const double u = unit(rng) < 0.5 ? 1.0 : unit(rng);
    const double radius = radius_cap * u;
    for (std::size_t j = 0; j < n; ++j) values[k * n + j] += dir[j] / norm * radius;
  }
  return TimedStateSequence(s.names(), s.times(), std::move(values));
}

// ---------------------------------------------------------------------------
// CSV: header `time,<name1>,...,<nameN>`, one row per sample.

inline void write_csv(std::ostream& out, const TimedStateSequence& s) {
  out << "time";
  for (const auto& name : s.names()) out << ',' << name;
  out << '\n';
  char buf[64];
  for (std::size_t k = 0; k < s.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", s.time(k));
    out << buf;
    for (std::size_t j = 0; j < s.dimension(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", s.value(k, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

inline TimedStateSequence read_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      auto b = cell.find_first_not_of(" \t\r");
      auto e = cell.find_last_not_of(" \t\r");
      cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    return cells;
  };

  std::string line;
  if (!std::getline(in, line)) throw SignalError("empty CSV input");
  auto header = split(line);
  if (header.size() < 2 || header.front() != "time")
    throw SignalError("CSV header must be time,<name1>,...");
  std::vector<std::string> names(header.begin() + 1, header.end());

  std::vector<double> times;
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw SignalError("CSV row " + std::to_string(row) + " has wrong number of columns");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cells[c].size() || cells[c].empty())
        throw SignalError("CSV row " + std::to_string(row) + ": bad number '" + cells[c] + "'");
      (c == 0 ? times : values).push_back(v);
    }
  }
  return TimedStateSequence(std::move(names), std::move(times), std::move(values));
}

inline TimedStateSequence read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SignalError("cannot open " + path);
  return read_csv(in);
}

}  // namespace stlstar
