#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace calib {

enum class ErrorKind {
  Io,
  Format,
  Validation,
  NonFiniteInput,
  IndexOutOfRange,
  LengthMismatch,
  EmptyInput,
  ZeroBins,
  CountMismatch,
  AllBinsEmpty,
  LabelOutOfRange,
  DegenerateLabels,
  EmptyCandidateList,
  UnfittedModel,
  DimensionMismatch,
  ZeroMassVector,
  Schema,
  Usage,
  // numerical failures
  NonConvergence,
  BoundaryOptimum,
  NonFiniteObjective,
  LineSearchFailure,
};

std::string_view to_string(ErrorKind kind);

/// True for failures of an iterative solver rather than of the caller's input.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace calib
