#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sbill {

enum class ErrorCode {
  InvalidArgument,
  AsymmetricCoefficients,
  ImaginaryResidue,
  NonClosedCurve,
  InsufficientSamples,
  OverlappingComponents,
  NonpositiveWidth,
  EmptyComplement,
  ParityObstruction,
  ReconstructionMismatch,
  NonpositiveCurvatureRadius,
  StringTooShort,
  DegenerateTangent,
  TangentialShot,
  NoConvergence,
  NotACriticalPoint,
  ClassificationConflict,
  FormulaMismatch,
  SpecOverlap,
  NegativeRadicand,
  NotCritical,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::AsymmetricCoefficients: return "AsymmetricCoefficients";
    case ErrorCode::ImaginaryResidue: return "ImaginaryResidue";
    case ErrorCode::NonClosedCurve: return "NonClosedCurve";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::OverlappingComponents: return "OverlappingComponents";
    case ErrorCode::NonpositiveWidth: return "NonpositiveWidth";
    case ErrorCode::EmptyComplement: return "EmptyComplement";
    case ErrorCode::ParityObstruction: return "ParityObstruction";
    case ErrorCode::ReconstructionMismatch: return "ReconstructionMismatch";
    case ErrorCode::NonpositiveCurvatureRadius: return "NonpositiveCurvatureRadius";
    case ErrorCode::StringTooShort: return "StringTooShort";
    case ErrorCode::DegenerateTangent: return "DegenerateTangent";
    case ErrorCode::TangentialShot: return "TangentialShot";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotACriticalPoint: return "NotACriticalPoint";
    case ErrorCode::ClassificationConflict: return "ClassificationConflict";
    case ErrorCode::FormulaMismatch: return "FormulaMismatch";
    case ErrorCode::SpecOverlap: return "SpecOverlap";
    case ErrorCode::NegativeRadicand: return "NegativeRadicand";
    case ErrorCode::NotCritical: return "NotCritical";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit status) can tell them apart.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sbill
