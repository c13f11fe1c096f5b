#pragma once

#include <stdexcept>
#include <string>

namespace gad {

// Caller passed malformed arguments (bad shape, id out of range, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configuration is invalid or inconsistent (unknown key, neighborless node
// under a no-self-loop policy, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file contents. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Missing or unreadable data files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Persisted model is truncated, corrupt, or from an incompatible version.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Loss or gradient became non-finite during optimization.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int last_good_epoch)
      : std::runtime_error(what), last_good_epoch_(last_good_epoch) {}
  int last_good_epoch() const noexcept { return last_good_epoch_; }

 private:
  int last_good_epoch_;
};

// A non-finite value reached a kernel or objective.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A metric is undefined for the given labels (e.g. AUC with one class).
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace gad
