#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dynedge {

enum class ErrorCode {
  SelfLoop,
  IndexOutOfRange,
  DimensionTooSmall,
  DimensionMismatch,
  EigenFailure,
  SingularPencil,
  SpectrumNotMarginal,
  RepeatedEigenvalue,
  NotHurwitz,
  Infeasible,
  HypothesisViolated,
  CertificateFailed,
  NotHyperMinPhase,
  SynthesisFailed,
  InternalModelViolated,
  IdentityViolated,
  AssumptionFailed,
  AllSlaves,
  MissingMaps,
  NoStableEps,
  StepTooLarge,
  NonFiniteState,
  EmptyWindow,
  InfeasibleDims,
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace dynedge
