#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stlstar {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed formula or expression text. `position()` is a byte offset.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

/// Structurally invalid formula (bad interval, trivial predicate, ...).
class FormulaError : public Error {
public:
  using Error::Error;
};

/// Index renaming that would capture a free index.
class RenamingError : public Error {
public:
  using Error::Error;
};

/// Invalid signal construction or mismatched sampling.
class SignalError : public Error {
public:
  using Error::Error;
};

/// Sequence shorter than the formula's necessary input length.
class LengthError : public Error {
public:
  LengthError(double required, double available)
      : Error("sequence too short: formula needs input length " + format_number(required) +
              ", sequence ends at " + format_number(available)),
        required_(required),
        available_(available) {}

  double required() const noexcept { return required_; }
  double available() const noexcept { return available_; }

private:
  static std::string format_number(double v) {
    std::string s = std::to_string(v);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  double required_;
  double available_;
};

/// Numerical integration produced a non-finite state.
class SimulationError : public Error {
public:
  SimulationError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

/// Invalid run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace stlstar
