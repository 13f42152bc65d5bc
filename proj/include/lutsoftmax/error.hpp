#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lutsoftmax {

enum class Errc {
  EmptyInput,
  NonFiniteInput,
  InvalidStep,
  InvalidScale,
  InvalidBoundary,
  InvalidPrecision,
  MissingLut,
  SpecMismatch,
  AccumulatorOverflow,
  Overflow,
  MalformedHeader,
  ChecksumMismatch,
  UnsupportedVersion,
  ShapeMismatch,
  LengthMismatch,
  InvalidParams,
  InvalidRange,
};

std::string_view to_string(Errc code) noexcept;

// Every failure in the library surfaces as this exception; code() says which.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace lutsoftmax
