#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lutsoftmax/lut.hpp"

namespace lutsoftmax {

using AnyLut = std::variant<Lut1D, Lut2D>;

/// Binary LUT record, all fields little-endian:
///
///   offset  size  field
///        0     4  magic "LUTS"
///        4     2  format version (1)
///        6     1  kind (0 RecipExp, 1 Alpha, 2 Exp, 3 Sigma2D)
///        7     1  bits per entry (w)
///        8     4  rows (entry count for 1D tables)
///       12     4  cols (1 for 1D tables)
///       16     8  step (1D) or scale_ex (2D), f64
///       24     8  scale_sum (0 for 1D), f64
///       32     8  dequant_scale, f64
///       40     *  payload, u8 per entry when w <= 8, u16 otherwise, row-major
///        *     4  CRC-32 of every preceding byte of the record
///
/// A file holds one or more records back to back.
inline constexpr std::uint16_t kLutFormatVersion = 1;
inline constexpr std::size_t kLutHeaderSize = 40;

std::vector<std::uint8_t> serialize_lut(const AnyLut& lut);

/// Reads one record starting at `offset` and advances it past the CRC.
/// Throws MalformedHeader, UnsupportedVersion or ChecksumMismatch.
AnyLut deserialize_lut(std::span<const std::uint8_t> bytes, std::size_t& offset);

/// Reads exactly one record spanning the whole buffer.
AnyLut deserialize_lut(std::span<const std::uint8_t> bytes);

/// Reads every record in the buffer (at least one).
std::vector<AnyLut> deserialize_luts(std::span<const std::uint8_t> bytes);

void write_lut_file(const std::filesystem::path& path, const std::vector<AnyLut>& luts);
std::vector<AnyLut> read_lut_file(const std::filesystem::path& path);

nlohmann::json lut_to_json(const AnyLut& lut);

std::size_t lut_byte_size(const AnyLut& lut) noexcept;

}  // namespace lutsoftmax
