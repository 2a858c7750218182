#pragma once

#include <stdexcept>
#include <string>

namespace bbsreg {

enum class Errc {
  BadCount,
  GimbalLock,
  TooFewPoints,
  DegenerateCloud,
  DimMismatch,
  ShapeMismatch,
  SizeMismatch,
  DegenerateGeometry,
  SourceTooSmall,
  EmptySet,
  ParseError,
  UnsupportedFormat,
  IoError,
  NotARotation,
  DegenerateFit,
  AllRemoved,
  InvalidArgument,
  NumericalError,
};

const char* errc_name(Errc code);

/// Single exception type for the whole library; the code tells callers
/// which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace bbsreg
