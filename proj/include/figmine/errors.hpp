#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace figmine {

enum class Errc {
  // transport
  NotFound,
  NotOpenAccess,
  Network,
  RateLimited,
  // document parsing
  MalformedXml,
  MissingRequiredField,
  EncodingError,
  // geometry / numerics
  OutOfBounds,
  DimensionMismatch,
  DegenerateDataset,
  UnknownFigureNumber,
  // statistics
  EmptyTable,
  SingleClass,
  EmptyRuns,
  EmptyCohort,
  // orchestration
  ConfigError,
  IoError,
  SchemaError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NotFound: return "NotFound";
    case Errc::NotOpenAccess: return "NotOpenAccess";
    case Errc::Network: return "Network";
    case Errc::RateLimited: return "RateLimited";
    case Errc::MalformedXml: return "MalformedXml";
    case Errc::MissingRequiredField: return "MissingRequiredField";
    case Errc::EncodingError: return "EncodingError";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DegenerateDataset: return "DegenerateDataset";
    case Errc::UnknownFigureNumber: return "UnknownFigureNumber";
    case Errc::EmptyTable: return "EmptyTable";
    case Errc::SingleClass: return "SingleClass";
    case Errc::EmptyRuns: return "EmptyRuns";
    case Errc::EmptyCohort: return "EmptyCohort";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
    case Errc::SchemaError: return "SchemaError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

  // Seconds the caller should wait before retrying; set for RateLimited only.
  std::optional<double> retry_after;

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace figmine
