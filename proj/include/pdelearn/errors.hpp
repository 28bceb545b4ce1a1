#pragma once

#include <stdexcept>
#include <string>

namespace pdelearn {

enum class ErrorKind {
  Ingest,
  Parse,
  TooShort,
  Plan,
  UnsupportedOrder,
  Shape,
  Index,
  Numeric,
  Divergence,
  Weight,
  TrainingData,
  NotTrained,
  Schema,
  DegenerateMetric,
  Internal,
  Config,
};

const char* error_kind_name(ErrorKind kind);

/// Process exit code for a failure category: 2 input, 3 numeric, 4 config.
int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace pdelearn
