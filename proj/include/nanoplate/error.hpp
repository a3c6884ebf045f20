#pragma once

#include <stdexcept>
#include <string>

namespace nanoplate {

/// Failure categories. The CLI maps each to a distinct exit code.
enum class ErrorKind {
  InvalidInput,
  IncompatibleLoads,
  SolverFailure,
  DiagnosticsFailure,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) {
    throw Error(ErrorKind::InvalidInput, what);
  }
}

}  // namespace nanoplate
