#pragma once

#include <stdexcept>
#include <string>

namespace rsdn {

// Error taxonomy shared by all modules. `kind` is stable and machine-checkable;
// `what()` carries the human-readable detail. `category` drives CLI exit codes:
// data errors (bad files, bad shapes, bad configs) vs numeric failures.
enum class ErrorKind {
  empty_input,
  non_finite_value,
  length_mismatch,
  duplicate_id,
  parse_failure,
  io_failure,
  invalid_config,
  zero_power_signal,
  singular_system,
  too_many_levels,
  length_too_short,
  bookkeeping_mismatch,
  empty_level,
  shape_mismatch,
  missing_forward_cache,
  empty_dataset,
  bad_magic,
  version_mismatch,
  count_mismatch,
  missing_checkpoint,
  all_points_excluded,
};

enum class ErrorCategory { data, numeric };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  ErrorCategory category() const {
    switch (kind_) {
      case ErrorKind::zero_power_signal:
      case ErrorKind::singular_system:
      case ErrorKind::non_finite_value:
      case ErrorKind::all_points_excluded:
        return ErrorCategory::numeric;
      default:
        return ErrorCategory::data;
    }
  }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace rsdn
