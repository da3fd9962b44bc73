#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chern_extremal {

enum class ErrorKind {
  InvalidArgument,
  InvalidMetric,
  NonConvergence,
  IncompatibleRHS,
  NonPositiveKernel,
  NotGauduchon,
  ResidualTooLarge,
  UnsupportedExponent,
  AliasedMode,
  LostPositivity,
  MalformedHeader,
  ShapeMismatch,
  ConfigError,
  IoError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidMetric: return "InvalidMetric";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::IncompatibleRHS: return "IncompatibleRHS";
    case ErrorKind::NonPositiveKernel: return "NonPositiveKernel";
    case ErrorKind::NotGauduchon: return "NotGauduchon";
    case ErrorKind::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorKind::UnsupportedExponent: return "UnsupportedExponent";
    case ErrorKind::AliasedMode: return "AliasedMode";
    case ErrorKind::LostPositivity: return "LostPositivity";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. The kind is
/// stable and meant for programmatic dispatch; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace chern_extremal
