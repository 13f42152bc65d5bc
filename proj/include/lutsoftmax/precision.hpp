#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lutsoftmax {

/// Bit width of the integer value representation and everything derived
/// from it. Construct through make() so the derived fields stay consistent.
class PrecisionSpec {
 public:
  static constexpr int kMaxBits = 16;

  /// bits in [1, 16]. dequant_scale defaults to q_max.
  static PrecisionSpec make(int bits,
                            std::optional<double> dequant_scale = std::nullopt);

  int bits() const noexcept { return bits_; }
  std::uint32_t q_max() const noexcept { return q_max_; }
  /// ceil(ln(q_max)), the exponent beyond which 1/e^i rounds to code 0.
  int x_q() const noexcept { return x_q_; }
  double dequant_scale() const noexcept { return dequant_scale_; }
  /// Storage width: one byte up to 8 bits (sub-byte widths unpacked), else two.
  int bytes_per_entry() const noexcept { return bits_ > 8 ? 2 : 1; }

  PrecisionSpec with_dequant_scale(double scale) const;

  friend bool operator==(const PrecisionSpec&, const PrecisionSpec&) = default;

 private:
  PrecisionSpec() = default;

  int bits_ = 0;
  std::uint32_t q_max_ = 0;
  int x_q_ = 0;
  double dequant_scale_ = 1.0;
};

/// Named precisions used throughout the tables. Int16 carries 15 magnitude bits.
enum class Precision { Int16, Uint8, Uint4, Uint2 };

inline constexpr Precision kAllPrecisions[] = {Precision::Uint2, Precision::Uint4,
                                               Precision::Uint8, Precision::Int16};

int bits_of(Precision p) noexcept;
PrecisionSpec spec_for(Precision p);
std::string_view to_string(Precision p) noexcept;
/// Accepts "int16", "uint8", "uint4", "uint2".
Precision parse_precision(std::string_view name);

}  // namespace lutsoftmax
