#pragma once

#include <stdexcept>
#include <string>

namespace dfg {

/// Category of a library failure. Carried by every dfg::Error so callers
/// can branch without string matching.
enum class ErrorCode {
  MissingFile,
  MalformedLine,
  EmptyCloud,
  IoFailure,
  LengthMismatch,
  ShapeMismatch,
  CountOutOfRange,
  StartOutOfRange,
  KTooLarge,
  KTooSmall,
  EmptyAfterDownsample,
  BadAlpha,
  DegreeExceedsN,
  NotScalarLoss,
  GtTooSmall,
  TooFewPoints,
  ConfigError,
  BadArgument,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, long detail = -1)
      : std::runtime_error(what), code_(code), detail_(detail) {}

  ErrorCode code() const { return code_; }
  /// Context-dependent payload, e.g. the 1-based line number for MalformedLine.
  long detail() const { return detail_; }

 private:
  ErrorCode code_;
  long detail_;
};

}  // namespace dfg
