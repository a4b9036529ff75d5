#pragma once

#include <stdexcept>
#include <string>

namespace synchrony {

// Category of a failed precondition or runtime breakdown.  Every throw site in
// the library uses Error so callers can branch on kind() instead of matching
// message strings.
enum class ErrorKind {
  InvalidArgument,       // malformed input that no API contract covers
  DimensionMismatch,     // incompatible matrix/vector sizes
  ParseError,            // unreadable edge list or scenario text
  AssumptionViolated,    // agent fails the structural assumptions of a protocol
  NotStabilizable,       // (A, B) has an uncontrollable unstable mode
  NotDetectable,         // (C, A) has an unobservable unstable mode
  NotStronglyConnected,  // graph operation requires strong connectivity
  NonPositiveInput,      // value required to be strictly positive was not
  SolverDivergence,      // iterative solver failed to reach its tolerance
  NonFiniteState,        // integration produced NaN/Inf or left the guard box
  Mismatch,              // cross-checked artifacts disagree (e.g. trajectory vs graph)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Short stable identifier for an error kind, used in CLI diagnostics.
inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::ParseError: return "parse_error";
    case ErrorKind::AssumptionViolated: return "assumption_violated";
    case ErrorKind::NotStabilizable: return "not_stabilizable";
    case ErrorKind::NotDetectable: return "not_detectable";
    case ErrorKind::NotStronglyConnected: return "not_strongly_connected";
    case ErrorKind::NonPositiveInput: return "non_positive_input";
    case ErrorKind::SolverDivergence: return "solver_divergence";
    case ErrorKind::NonFiniteState: return "non_finite_state";
    case ErrorKind::Mismatch: return "mismatch";
  }
  return "unknown";
}

}  // namespace synchrony
