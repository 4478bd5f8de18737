#pragma once

#include <stdexcept>
#include <string>

namespace layerprobe {

// Process exit codes used by the CLI. Stable for scripting.
enum class ExitCode : int {
  ok = 0,
  validation = 2,
  io = 3,
  degenerate_data = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ExitCode exit_code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ExitCode::validation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

// Input is well-formed but the math is undefined on it (singleton class,
// all-zero distances, fewer than two classes, ...).
class DegenerateDataError : public Error {
 public:
  explicit DegenerateDataError(const std::string& what)
      : Error(ExitCode::degenerate_data, what) {}
};

class InvalidQueryError : public ValidationError {
 public:
  explicit InvalidQueryError(const std::string& what)
      : ValidationError(what) {}
};

}  // namespace layerprobe
