#include "lutsoftmax/precision.hpp"

#include <cmath>

#include "lutsoftmax/error.hpp"

namespace lutsoftmax {

PrecisionSpec PrecisionSpec::make(int bits, std::optional<double> dequant_scale) {
  if (bits < 1 || bits > kMaxBits) {
    throw Error(Errc::InvalidPrecision,
                "bit width " + std::to_string(bits) + " outside [1, 16]");
  }
  PrecisionSpec spec;
  spec.bits_ = bits;
  spec.q_max_ = (std::uint32_t{1} << bits) - 1u;
  spec.x_q_ = static_cast<int>(std::ceil(std::log(static_cast<double>(spec.q_max_))));
  spec.dequant_scale_ = static_cast<double>(spec.q_max_);
  if (dequant_scale) spec = spec.with_dequant_scale(*dequant_scale);
  return spec;
}

PrecisionSpec PrecisionSpec::with_dequant_scale(double scale) const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(Errc::InvalidScale, "dequantization scale must be positive and finite");
  }
  PrecisionSpec copy = *this;
  copy.dequant_scale_ = scale;
  return copy;
}

int bits_of(Precision p) noexcept {
  switch (p) {
    case Precision::Int16: return 15;
    case Precision::Uint8: return 8;
    case Precision::Uint4: return 4;
    case Precision::Uint2: return 2;
  }
  return 8;
}

PrecisionSpec spec_for(Precision p) { return PrecisionSpec::make(bits_of(p)); }

std::string_view to_string(Precision p) noexcept {
  switch (p) {
    case Precision::Int16: return "int16";
    case Precision::Uint8: return "uint8";
    case Precision::Uint4: return "uint4";
    case Precision::Uint2: return "uint2";
  }
  return "?";
}

Precision parse_precision(std::string_view name) {
  if (name == "int16") return Precision::Int16;
  if (name == "uint8") return Precision::Uint8;
  if (name == "uint4") return Precision::Uint4;
  if (name == "uint2") return Precision::Uint2;
  throw Error(Errc::InvalidPrecision, "unknown precision '" + std::string(name) + "'");
}

}  // namespace lutsoftmax
