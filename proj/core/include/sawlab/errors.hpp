#pragma once

#include <stdexcept>
#include <string>

namespace sawlab {

// Error classes map to distinct CLI exit codes (see tools/).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Stepping a terminated environment, replaying an incomplete cache, etc.
class ProtocolError : public std::logic_error {
 public:
  explicit ProtocolError(const std::string& msg) : std::logic_error(msg) {}
};

// Malformed episode log or report file.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Physics state diverged (NaN or unbounded); carries the offending substep.
class SimulationBlowup : public std::runtime_error {
 public:
  SimulationBlowup(const std::string& msg, double time)
      : std::runtime_error(msg + " at t=" + std::to_string(time)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// Non-finite loss or gradient during an update.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sawlab
