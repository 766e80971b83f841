#pragma once

#include <stdexcept>
#include <string>

namespace albudget {

enum class ErrorKind {
  invalid_config,
  stratification_infeasible,
  double_label,
  not_found,
  conflict,
  shape_mismatch,
  bad_input,
  degenerate_batch,
  degenerate_training,
  undefined_measure,
  undefined_density,
  budget_exhausted,
  pool_exhausted,
  integrity,
  format,
  io,
  generation,
};

const char* error_kind_name(ErrorKind kind);

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

}  // namespace albudget
