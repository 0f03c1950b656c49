#include "calib/error.hpp"

namespace calib {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Format: return "FormatError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::ZeroBins: return "ZeroBins";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::AllBinsEmpty: return "AllBinsEmpty";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::EmptyCandidateList: return "EmptyCandidateList";
    case ErrorKind::UnfittedModel: return "UnfittedModel";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroMassVector: return "ZeroMassVector";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::Usage: return "UsageError";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::BoundaryOptimum: return "BoundaryOptimum";
    case ErrorKind::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorKind::LineSearchFailure: return "LineSearchFailure";
  }
  return "UnknownError";
}

bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonConvergence:
    case ErrorKind::BoundaryOptimum:
    case ErrorKind::NonFiniteObjective:
    case ErrorKind::LineSearchFailure:
      return true;
    default:
      return false;
  }
}

}  // namespace calib
