#include "dynedge/error.hpp"
#include "dynedge/types.hpp"

namespace dynedge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::SingularPencil: return "SingularPencil";
    case ErrorCode::SpectrumNotMarginal: return "SpectrumNotMarginal";
    case ErrorCode::RepeatedEigenvalue: return "RepeatedEigenvalue";
    case ErrorCode::NotHurwitz: return "NotHurwitz";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::CertificateFailed: return "CertificateFailed";
    case ErrorCode::NotHyperMinPhase: return "NotHyperMinPhase";
    case ErrorCode::SynthesisFailed: return "SynthesisFailed";
    case ErrorCode::InternalModelViolated: return "InternalModelViolated";
    case ErrorCode::IdentityViolated: return "IdentityViolated";
    case ErrorCode::AssumptionFailed: return "AssumptionFailed";
    case ErrorCode::AllSlaves: return "AllSlaves";
    case ErrorCode::MissingMaps: return "MissingMaps";
    case ErrorCode::NoStableEps: return "NoStableEps";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::InfeasibleDims: return "InfeasibleDims";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

std::string to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::Lyapunov: return "Lyapunov";
    case CertificateKind::SPR: return "SPR";
    case CertificateKind::Passivity: return "Passivity";
    case CertificateKind::MarginalSpectrum: return "MarginalSpectrum";
    case CertificateKind::Lemma1: return "Lemma1";
  }
  return "Unknown";
}

}  // namespace dynedge
