#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pendubridge {

// Base for every error raised by the library. The CLI maps ConfigError to
// exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration value or schema violation. `field` carries the dotted
// path of the offending key when one is known (e.g. "plant.M").
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message, std::string field = {})
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Non-finite or otherwise out-of-domain numeric input.
class InputDomainError : public Error {
 public:
  using Error::Error;
};

// Open-loop rollout left the admissible state region.
class DivergedError : public Error {
 public:
  DivergedError(const std::string& message, std::size_t step)
      : Error(message + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Controller received a measurement it cannot act on; the episode must stop.
class ControllerFault : public Error {
 public:
  using Error::Error;
};

class TuningFailed : public Error {
 public:
  using Error::Error;
};

// Socket creation, address resolution or bind failure.
class NetworkError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace pendubridge
