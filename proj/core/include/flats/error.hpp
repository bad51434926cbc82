#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flats {

/// Every failure the toolkit reports maps to exactly one of these codes.
enum class ErrorCode {
  BadMagic,
  UnsupportedVersion,
  SizeMismatch,
  NonFinite,
  BadCsv,
  IoFailure,
  MissingRole,
  DimConflict,
  BadManifest,
  InvalidLabel,
  ClassTooSmall,
  SingularCovariance,
  DimMismatch,
  ZeroVector,
  KTooLarge,
  DegenerateRadius,
  LengthMismatch,
  EmptySeries,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// True for errors caused by the contents of input data rather than by how
/// the caller configured a run.
bool is_data_error(ErrorCode code) noexcept;

}  // namespace flats
