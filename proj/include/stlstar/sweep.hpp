#pragma once

// Perturbation-space exploration: simulate a model on a grid of parameter
// points, monitor robustness of each trajectory, and refine adaptively.
//
// Points live on an integer lattice per axis. With `iterations` = c the
// lattice is 2^c times finer than the initial grid, so every midpoint a
// refinement can ask for is representable exactly. Refinement iteration d
// works at half the spacing of iteration d-1 and adds, for every evaluated
// point p:
//   - p +- h e_a on every axis a, when |rho(p)| < threshold;
//   - p + h e_a, when p + 2h e_a was evaluated and its satisfaction differs.
// Results are kept ordered by lattice coordinates, so the outcome does not
// depend on the number of workers or on completion order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "stlstar/error.hpp"
#include "stlstar/formula.hpp"
#include "stlstar/monitor.hpp"
#include "stlstar/odesim.hpp"
#include "stlstar/rewrite.hpp"

namespace stlstar {

struct Axis {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t resolution = 2;
};

struct PerturbationSpace {
  std::vector<Axis> axes;
  /// Refinement iteration cap; 0 gives a plain grid sweep.
  std::size_t iterations = 0;
  /// Refinement threshold on |rho|. Unset: 10% of the initial grid's
  /// median finite |rho|.
  std::optional<double> threshold;

  void validate() const {
    if (axes.empty()) throw ConfigError("perturbation space needs at least one axis");
    for (const auto& a : axes) {
      if (!std::isfinite(a.lo) || !std::isfinite(a.hi) || !(a.lo < a.hi))
        throw ConfigError("axis '" + a.name + "' needs finite lo < hi");
      if (a.resolution < 2) throw ConfigError("axis '" + a.name + "' needs resolution >= 2");
    }
    if (iterations > 40) throw ConfigError("refinement iteration cap must be <= 40");
    if (threshold && !(*threshold >= 0.0)) throw ConfigError("refinement threshold must be >= 0");
  }
};

struct SimulationConfig {
  std::vector<double> init;
  /// Parameter values for parameters that are not swept.
  std::vector<double> params;
  double step = 0.01;
  double horizon = 1.0;
};

struct SweepPoint {
  std::vector<std::int64_t> lattice;
  std::vector<double> params;
  double robustness = 0.0;
  bool satisfied = false;
  std::size_t depth = 0;
  /// Non-empty when simulation or monitoring failed at this point.
  std::string error;

  bool ok() const { return error.empty(); }
};

struct SweepResult {
  std::vector<std::string> axis_names;
  std::vector<SweepPoint> points;
  Formula formula;
  Formula optimized;
  double threshold = 0.0;
  std::size_t samples_per_trajectory = 0;
  std::size_t zero_robustness = 0;
  std::size_t failures = 0;
  double seconds = 0.0;

  std::size_t positive() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(),
                                                  [](const SweepPoint& p) { return p.ok() && p.satisfied; }));
  }
  std::size_t negative() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(),
                                                  [](const SweepPoint& p) { return p.ok() && !p.satisfied; }));
  }
};

struct SweepOptions {
  std::size_t workers = 1;
  /// Progress lines go here when set.
  std::ostream* progress = nullptr;
};

/// Simulates the model at one parameter point and returns the robustness
/// of `phi` on the trajectory.
inline double evaluate_point(const OdeModel& model, const Formula& phi, const SimulationConfig& sim,
                             const std::vector<double>& params) {
  const auto& init = sim.init.empty() ? model.default_init : sim.init;
  auto trajectory = integrate(model, init, params, sim.step, sim.horizon);
  return monitor(phi, trajectory);
}

namespace detail {

using Lattice = std::vector<std::int64_t>;

class SweepRunner {
public:
  SweepRunner(const OdeModel& model, const PerturbationSpace& space, const Formula& phi,
              const SimulationConfig& sim, const SweepOptions& options)
      : model_(model), space_(space), phi_(phi), sim_(sim), options_(options) {
    scale_ = std::int64_t{1} << space_.iterations;
    for (const auto& a : space_.axes) {
      axis_slots_.push_back(model_.parameter_index(a.name));
      extent_.push_back(static_cast<std::int64_t>(a.resolution - 1) * scale_);
    }
    base_params_ = sim_.params.empty() ? model_.default_params : sim_.params;
    if (base_params_.size() != model_.parameters.size())
      throw ConfigError("parameter vector has wrong dimension");
  }

  SweepResult run() {
    const auto start = std::chrono::steady_clock::now();
    SweepResult result;
    for (const auto& a : space_.axes) result.axis_names.push_back(a.name);
    result.formula = phi_;

    std::vector<Lattice> batch;
    Lattice cursor(space_.axes.size(), 0);
    for (;;) {
      batch.push_back(cursor);
      std::size_t a = 0;
      for (; a < cursor.size(); ++a) {
        cursor[a] += scale_;
        if (cursor[a] <= extent_[a]) break;
        cursor[a] = 0;
      }
      if (a == cursor.size()) break;
    }
    evaluate_batch(batch, 0);

    if (space_.threshold) {
      threshold_ = *space_.threshold;
    } else {
      std::vector<double> mags;
      for (const auto& [_, p] : points_)
        if (p.ok() && std::isfinite(p.robustness)) mags.push_back(std::abs(p.robustness));
      if (!mags.empty()) {
        std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2), mags.end());
        threshold_ = 0.1 * mags[mags.size() / 2];
      }
    }

    for (std::size_t d = 1; d <= space_.iterations; ++d) {
      auto candidates = refinement_candidates(scale_ >> d);
      if (candidates.empty()) break;
      evaluate_batch(candidates, d);
    }

    result.threshold = threshold_;
    result.samples_per_trajectory = uniform_times(sim_.step, sim_.horizon).size();
    for (auto& [_, p] : points_) {
      if (!p.ok()) ++result.failures;
      else if (p.robustness == 0.0) ++result.zero_robustness;
      result.points.push_back(std::move(p));
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  }

private:
  std::vector<double> coordinates(const Lattice& k) const {
    std::vector<double> out(k.size());
    for (std::size_t a = 0; a < k.size(); ++a) {
      const auto& axis = space_.axes[a];
      out[a] = k[a] == extent_[a]
                   ? axis.hi
                   : axis.lo + (axis.hi - axis.lo) * (static_cast<double>(k[a]) / static_cast<double>(extent_[a]));
    }
    return out;
  }

  SweepPoint evaluate(const Lattice& k, std::size_t depth) const {
    SweepPoint p;
    p.lattice = k;
    p.params = coordinates(k);
    p.depth = depth;
    std::vector<double> params = base_params_;
    for (std::size_t a = 0; a < k.size(); ++a) params[axis_slots_[a]] = p.params[a];
    try {
      p.robustness = evaluate_point(model_, phi_, sim_, params);
      p.satisfied = p.robustness > 0.0;
    } catch (const Error& e) {
      p.robustness = std::numeric_limits<double>::quiet_NaN();
      p.satisfied = false;
      p.error = e.what();
    }
    return p;
  }

  void evaluate_batch(const std::vector<Lattice>& batch, std::size_t depth) {
    std::vector<SweepPoint> out(batch.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < batch.size(); i = next++) out[i] = evaluate(batch[i], depth);
    };
    const std::size_t threads = std::clamp<std::size_t>(options_.workers, 1, batch.size());
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    for (auto& p : out) points_.emplace(p.lattice, std::move(p));
    if (options_.progress)
      *options_.progress << "[sweep] depth " << depth << ": evaluated " << batch.size() << " points (total "
                         << points_.size() << ")\n";
  }

  bool inside(const Lattice& k) const {
    for (std::size_t a = 0; a < k.size(); ++a)
      if (k[a] < 0 || k[a] > extent_[a]) return false;
    return true;
  }

  std::vector<Lattice> refinement_candidates(std::int64_t h) const {
    std::set<Lattice> found;
    auto add = [&](const Lattice& k) {
      if (inside(k) && !points_.contains(k)) found.insert(k);
    };
    for (const auto& [k, p] : points_) {
      if (!p.ok()) continue;
      const bool low = std::abs(p.robustness) < threshold_;
      for (std::size_t a = 0; a < k.size(); ++a) {
        if (low) {
          Lattice up = k, down = k;
          up[a] += h;
          down[a] -= h;
          add(up);
          add(down);
        }
        Lattice far = k;
        far[a] += 2 * h;
        auto it = points_.find(far);
        if (it != points_.end() && it->second.ok() && it->second.satisfied != p.satisfied) {
          Lattice mid = k;
          mid[a] += h;
          add(mid);
        }
      }
    }
    return {found.begin(), found.end()};
  }

  const OdeModel& model_;
  const PerturbationSpace& space_;
  Formula phi_;
  const SimulationConfig& sim_;
  const SweepOptions& options_;
  std::int64_t scale_ = 1;
  std::vector<std::size_t> axis_slots_;
  std::vector<std::int64_t> extent_;
  std::vector<double> base_params_;
  double threshold_ = 0.0;
  std::map<Lattice, SweepPoint> points_;
};

}  // namespace detail

/// Sweeps `space`, monitoring optimize(phi) on every simulated trajectory.
/// Throws LengthError if the simulation horizon is shorter than l(phi).
inline SweepResult run_sweep(const OdeModel& model, const PerturbationSpace& space, const Formula& phi,
                             const SimulationConfig& sim, const SweepOptions& options = {}) {
  space.validate();
  Formula optimized = optimize(phi);
  const double last = uniform_times(sim.step, sim.horizon).back();
  if (last < optimized->necessary_length()) throw LengthError(optimized->necessary_length(), last);
  detail::SweepRunner runner(model, space, optimized, sim, options);
  SweepResult result = runner.run();
  result.formula = phi;
  result.optimized = optimized;
  return result;
}

}  // namespace stlstar
