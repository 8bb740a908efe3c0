#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cansig {

enum class ErrorCode {
  EmptyTrace,
  MissingColumn,
  TooFewFrames,
  InvalidRange,
  InvalidParams,
  NoActiveSignals,
  UnsupportedPid,
  ShortData,
  SeriesTooShort,
  NoTemplates,
  NoDefinitions,
  NoOverlap,
  MissingAnnotations,
  InvalidSpec,
  Io,
  Format,
};

const char* to_string(ErrorCode code) noexcept;

// Every recoverable failure in the toolkit is reported as a cansig::Error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Non-fatal problem found while reading an input file. line is 1-based, 0 if
// the problem is not tied to a line.
struct Warning {
  std::size_t line = 0;
  std::string message;
};

}  // namespace cansig
