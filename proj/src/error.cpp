#include "albudget/error.hpp"

namespace albudget {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_config: return "invalid config";
    case ErrorKind::stratification_infeasible: return "stratification infeasible";
    case ErrorKind::double_label: return "double label";
    case ErrorKind::not_found: return "not found";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::shape_mismatch: return "shape mismatch";
    case ErrorKind::bad_input: return "bad input";
    case ErrorKind::degenerate_batch: return "degenerate batch";
    case ErrorKind::degenerate_training: return "degenerate training";
    case ErrorKind::undefined_measure: return "undefined measure";
    case ErrorKind::undefined_density: return "undefined density";
    case ErrorKind::budget_exhausted: return "budget exhausted";
    case ErrorKind::pool_exhausted: return "pool exhausted";
    case ErrorKind::integrity: return "integrity";
    case ErrorKind::format: return "format";
    case ErrorKind::io: return "io";
    case ErrorKind::generation: return "generation";
  }
  return "error";
}

}  // namespace albudget
