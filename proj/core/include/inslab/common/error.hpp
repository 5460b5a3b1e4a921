#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace inslab {

/// Bad argument value: nonfinite input, out-of-domain parameter, wrong size.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Contract menu violates the revealed-preference ordering.
class InvalidMenu : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// An iterative numeric routine stopped before reaching its tolerance.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(const std::string& what, double achieved_tolerance)
      : std::runtime_error(what), achieved_tolerance_(achieved_tolerance) {}
  explicit NumericFailure(const std::string& what)
      : NumericFailure(what, 0.0) {}

  double achieved_tolerance() const { return achieved_tolerance_; }

 private:
  double achieved_tolerance_;
};

/// Not enough observations to form a local estimate.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Step-2 segment [theta(a_bar,z), min(theta(0,z),1)] is empty.
class DegenerateRegion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The instrument does not move the frontier (d theta / dz is ~0).
class DegenerateInstrument : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the offending 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& msg)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Configuration problem; carries the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& msg)
      : std::runtime_error("config key '" + key + "': " + msg), key_(key) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace inslab
