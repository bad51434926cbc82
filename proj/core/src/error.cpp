#include "flats/error.hpp"

namespace flats {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::BadCsv: return "BadCsv";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MissingRole: return "MissingRole";
    case ErrorCode::DimConflict: return "DimConflict";
    case ErrorCode::BadManifest: return "BadManifest";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DegenerateRadius: return "DegenerateRadius";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

bool is_data_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingRole:
    case ErrorCode::BadManifest:
    case ErrorCode::InvalidArgument:
      return false;
    default:
      return true;
  }
}

}  // namespace flats
