#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace facespace {

enum class ErrorCode {
  // dataset-core
  ZeroVector,
  SchemaError,
  CountMismatch,
  MagicMismatch,
  TruncatedFile,
  IoError,
  InvalidMetadata,
  // synthgen
  DimTooSmall,
  UnknownIdentity,
  InvalidConfig,
  // tsne
  PerplexityTooLarge,
  NonFiniteDistance,
  NotNormalized,
  NonFinite,
  ShapeMismatch,
  // readout
  SvdNoConvergence,
  SingleClass,
  TooFewIdentities,
  FoldMissingClass,
  // verify
  EmptySlice,
  EmptyDistribution,
  MissingVeridical,
  DegenerateData,
  SliceTooSmall,
  // figures
  MismatchedIds,
  EmptyCurveList,
  InvalidArgument,
};

/// Coarse grouping used by the CLI to pick an exit code.
enum class ErrorCategory { Usage, Data, Numerical };

std::string_view to_string(ErrorCode code) noexcept;
ErrorCategory category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace facespace
