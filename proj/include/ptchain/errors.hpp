#pragma once

#include <stdexcept>
#include <string>

namespace ptchain {

enum class ErrorCode {
  DisorderPresent,
  SpecTooSmall,
  InvalidSpec,
  DefectiveMatrix,
  AmbiguousFilling,
  GaplessWinding,
  GridTooCoarse,
  OddDimension,
  UnpairedMode,
  ResidualNeedsRegularized,
  DegenerateEigenvalue,
  InsufficientPoints,
  NoConvergence,
  DegenerateW,
  ExtraneousRoot,
  NoBoundState,
  NoRootInDisk,
  NoLocalizedMode,
  UnknownFigure,
  ConfigError,
  IoError,
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DisorderPresent: return "DisorderPresent";
    case ErrorCode::SpecTooSmall: return "SpecTooSmall";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DefectiveMatrix: return "DefectiveMatrix";
    case ErrorCode::AmbiguousFilling: return "AmbiguousFilling";
    case ErrorCode::GaplessWinding: return "GaplessWinding";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::OddDimension: return "OddDimension";
    case ErrorCode::UnpairedMode: return "UnpairedMode";
    case ErrorCode::ResidualNeedsRegularized: return "ResidualNeedsRegularized";
    case ErrorCode::DegenerateEigenvalue: return "DegenerateEigenvalue";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateW: return "DegenerateW";
    case ErrorCode::ExtraneousRoot: return "ExtraneousRoot";
    case ErrorCode::NoBoundState: return "NoBoundState";
    case ErrorCode::NoRootInDisk: return "NoRootInDisk";
    case ErrorCode::NoLocalizedMode: return "NoLocalizedMode";
    case ErrorCode::UnknownFigure: return "UnknownFigure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }
  const char* name() const { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace ptchain
