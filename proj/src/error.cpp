#include "lutsoftmax/error.hpp"

namespace lutsoftmax {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::InvalidStep: return "InvalidStep";
    case Errc::InvalidScale: return "InvalidScale";
    case Errc::InvalidBoundary: return "InvalidBoundary";
    case Errc::InvalidPrecision: return "InvalidPrecision";
    case Errc::MissingLut: return "MissingLut";
    case Errc::SpecMismatch: return "SpecMismatch";
    case Errc::AccumulatorOverflow: return "AccumulatorOverflow";
    case Errc::Overflow: return "Overflow";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::InvalidRange: return "InvalidRange";
  }
  return "Unknown";
}

}  // namespace lutsoftmax
