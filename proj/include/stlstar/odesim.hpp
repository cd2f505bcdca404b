#pragma once

// Fixed-step classical Runge-Kutta integration of small ODE models.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stlstar/error.hpp"
#include "stlstar/expression.hpp"
#include "stlstar/signal.hpp"

namespace stlstar {

struct OdeModel {
  using Rhs = std::function<void(std::span<const double> state, std::span<const double> params,
                                 std::span<double> derivative)>;

  std::string name;
  std::vector<std::string> variables;
  std::vector<std::string> parameters;
  Rhs rhs;
  std::vector<double> default_init;
  std::vector<double> default_params;

  std::size_t parameter_index(const std::string& p) const {
    for (std::size_t i = 0; i < parameters.size(); ++i)
      if (parameters[i] == p) return i;
    throw ConfigError("model '" + name + "' has no parameter '" + p + "'");
  }

  std::size_t variable_index(const std::string& v) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
      if (variables[i] == v) return i;
    throw ConfigError("model '" + name + "' has no variable '" + v + "'");
  }
};

/// RK4 with fixed `step`, sampled at every step from 0 until the first
/// grid time >= horizon. Throws SimulationError on a non-finite state.
inline TimedStateSequence integrate(const OdeModel& model, const std::vector<double>& init,
                                    const std::vector<double>& params, double step, double horizon) {
  const std::size_t n = model.variables.size();
  if (init.size() != n) throw ConfigError("initial state has wrong dimension");
  if (params.size() != model.parameters.size()) throw ConfigError("parameter vector has wrong dimension");
  if (!(step > 0.0)) throw ConfigError("integration step must be positive");
  if (!(horizon >= step)) throw ConfigError("horizon must be at least one step");

  const auto times = uniform_times(step, horizon);
  std::vector<double> values;
  values.reserve(times.size() * n);
  std::vector<double> x(init.begin(), init.end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

  auto check = [&](double t) {
    for (double v : x)
      if (!std::isfinite(v))
        throw SimulationError("simulation of '" + model.name + "' diverged at t=" + std::to_string(t), t);
  };
  check(0.0);
  values.insert(values.end(), x.begin(), x.end());
  const double h = step;
  for (std::size_t k = 1; k < times.size(); ++k) {
    model.rhs(x, params, k1);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = x[j] + 0.5 * h * k1[j];
    model.rhs(tmp, params, k2);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = x[j] + 0.5 * h * k2[j];
    model.rhs(tmp, params, k3);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = x[j] + h * k3[j];
    model.rhs(tmp, params, k4);
    for (std::size_t j = 0; j < n; ++j) x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    check(times[k]);
    values.insert(values.end(), x.begin(), x.end());
  }
  return TimedStateSequence(model.variables, times, std::move(values));
}

inline TimedStateSequence integrate(const OdeModel& model, double step, double horizon) {
  return integrate(model, model.default_init, model.default_params, step, horizon);
}

/// SIR epidemic: S' = -alpha S I, I' = alpha S I - beta I, R' = beta I.
inline OdeModel sir_model() {
  OdeModel m;
  m.name = "sir";
  m.variables = {"S", "I", "R"};
  m.parameters = {"alpha", "beta"};
  m.rhs = [](std::span<const double> x, std::span<const double> p, std::span<double> dx) {
    const double infection = p[0] * x[0] * x[1];
    const double recovery = p[1] * x[1];
    dx[0] = -infection;
    dx[1] = infection - recovery;
    dx[2] = recovery;
  };
  m.default_init = {95.0, 5.0, 0.0};
  m.default_params = {0.02, 0.4};
  return m;
}

/// Predator-prey: X' = nu X - alpha X Y, Y' = alpha X Y - mu Y.
inline OdeModel lotka_volterra_model() {
  OdeModel m;
  m.name = "lotka_volterra";
  m.variables = {"X", "Y"};
  m.parameters = {"nu", "alpha", "mu"};
  m.rhs = [](std::span<const double> x, std::span<const double> p, std::span<double> dx) {
    const double predation = p[1] * x[0] * x[1];
    dx[0] = p[0] * x[0] - predation;
    dx[1] = predation - p[2] * x[1];
  };
  m.default_init = {80.0, 20.0};
  m.default_params = {0.3, 0.01, 0.5};
  return m;
}

inline OdeModel builtin(std::string_view name) {
  if (name == "sir") return sir_model();
  if (name == "lotka_volterra" || name == "lv") return lotka_volterra_model();
  throw ConfigError("unknown model '" + std::string(name) + "' (known: sir, lotka_volterra)");
}

/// Model whose right-hand side is given as one arithmetic expression per
/// variable, e.g. {"x": "k*x - x*y"}.
inline OdeModel expression_model(std::string name, std::vector<std::string> variables,
                                 std::vector<std::string> parameters,
                                 const std::map<std::string, std::string>& derivatives,
                                 std::vector<double> default_init, std::vector<double> default_params) {
  if (variables.empty()) throw ConfigError("model needs at least one variable");
  std::vector<Expression> rhs;
  for (const auto& v : variables) {
    auto it = derivatives.find(v);
    if (it == derivatives.end()) throw ConfigError("no derivative given for variable '" + v + "'");
    try {
      rhs.push_back(Expression::compile(it->second, variables, parameters));
    } catch (const ParseError& e) {
      throw ConfigError("derivative of '" + v + "': " + e.what());
    }
  }
  if (derivatives.size() != variables.size()) throw ConfigError("derivative given for an undeclared variable");
  if (default_init.empty()) default_init.assign(variables.size(), 0.0);
  if (default_params.empty()) default_params.assign(parameters.size(), 0.0);
  if (default_init.size() != variables.size()) throw ConfigError("initial state has wrong dimension");
  if (default_params.size() != parameters.size()) throw ConfigError("parameter defaults have wrong dimension");

  OdeModel m;
  m.name = std::move(name);
  m.variables = std::move(variables);
  m.parameters = std::move(parameters);
  m.rhs = [rhs = std::move(rhs)](std::span<const double> x, std::span<const double> p, std::span<double> dx) {
    for (std::size_t j = 0; j < rhs.size(); ++j) dx[j] = rhs[j].evaluate(x, p);
  };
  m.default_init = std::move(default_init);
  m.default_params = std::move(default_params);
  return m;
}

}  // namespace stlstar
