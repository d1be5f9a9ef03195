#pragma once

#include <stdexcept>
#include <string>

namespace hkq {

enum class ErrorCode {
  dimension_mismatch,
  invalid_argument,
  singular_matrix,
  non_free_point,
  no_convergence,
  jacobian_singular,
  stiff_failure,
  coincident_points,
  origin_input,
  degenerate_differential,
  not_triangularizable,
  insufficient_span,
  scan_aborted,
  malformed_input,
  io_error,
};

const char* to_string(ErrorCode code);

// Domain error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hkq
