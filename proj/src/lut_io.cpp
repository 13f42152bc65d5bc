#include "lutsoftmax/lut_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "lutsoftmax/error.hpp"

namespace lutsoftmax {

namespace {


constexpr char kMagic[4] = {'L', 'U', 'T', 'S'};

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  std::vector<std::uint8_t>& buffer() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint(8)); }
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(Errc::MalformedHeader, "truncated LUT record");
  }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

template <typename Codes>
void write_payload(Writer& w, const Codes& codes, int bits) {
  for (Eigen::Index i = 0; i < codes.size(); ++i) {
    const std::uint16_t c = codes.data()[i];
    if (bits > 8) w.u16(c); else w.u8(static_cast<std::uint8_t>(c));
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_lut(const AnyLut& lut) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u16(kLutFormatVersion);
  std::visit(
      [&w](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        const PrecisionSpec& spec = t.spec();
        if constexpr (std::is_same_v<T, Lut1D>) {
          w.u8(static_cast<std::uint8_t>(t.kind()));
          w.u8(static_cast<std::uint8_t>(spec.bits()));
          w.u32(static_cast<std::uint32_t>(t.size()));
          w.u32(1);
          w.f64(t.step());
          w.f64(0.0);
        } else {
          w.u8(static_cast<std::uint8_t>(LutKind::Sigma2D));
          w.u8(static_cast<std::uint8_t>(spec.bits()));
          w.u32(t.rows());
          w.u32(t.cols());
          w.f64(t.scale_ex());
          w.f64(t.scale_sum());
        }
        w.f64(spec.dequant_scale());
        write_payload(w, t.entries(), spec.bits());
      },
      lut);
  const std::uint32_t crc = crc32_of(w.buffer());
  w.u32(crc);
  return std::move(w.buffer());
}

AnyLut deserialize_lut(std::span<const std::uint8_t> bytes, std::size_t& offset) {
  const std::size_t start = offset;
  Reader r(bytes, start);
  r.need(kLutHeaderSize);
  if (std::memcmp(bytes.data() + start, kMagic, sizeof kMagic) != 0) {
    throw Error(Errc::MalformedHeader, "bad magic, expected \"LUTS\"");
  }
  r.uint(4);
  const auto version = static_cast<std::uint16_t>(r.uint(2));
  if (version != kLutFormatVersion) {
    throw Error(Errc::UnsupportedVersion, "format version " + std::to_string(version));
  }
  const auto kind_code = static_cast<std::uint8_t>(r.uint(1));
  if (kind_code > static_cast<std::uint8_t>(LutKind::Sigma2D)) {
    throw Error(Errc::UnsupportedVersion, "unknown LUT kind " + std::to_string(kind_code));
  }
  const auto kind = static_cast<LutKind>(kind_code);
  const auto bits = static_cast<int>(r.uint(1));
  if (bits < 1 || bits > PrecisionSpec::kMaxBits) {
    throw Error(Errc::MalformedHeader, "bits per entry " + std::to_string(bits));
  }
  const auto rows = static_cast<std::uint32_t>(r.uint(4));
  const auto cols = static_cast<std::uint32_t>(r.uint(4));
  const double step = r.f64();
  const double scale_sum = r.f64();
  const double dequant = r.f64();
  if (rows == 0 || cols == 0 || (kind != LutKind::Sigma2D && cols != 1)) {
    throw Error(Errc::MalformedHeader, "bad table shape");
  }

  const std::size_t width = bits > 8 ? 2 : 1;
  const std::size_t count = std::size_t{rows} * cols;
  r.need(count * width + 4);
  const std::size_t payload_at = r.pos();
  const std::size_t crc_at = payload_at + count * width;
  Reader footer(bytes, crc_at);
  const auto stored_crc = static_cast<std::uint32_t>(footer.uint(4));
  if (stored_crc != crc32_of(bytes.subspan(start, crc_at - start))) {
    throw Error(Errc::ChecksumMismatch, "LUT record CRC mismatch");
  }

  PrecisionSpec spec = PrecisionSpec::make(bits);
  try {
    spec = spec.with_dequant_scale(dequant);
  } catch (const Error&) {
    throw Error(Errc::MalformedHeader, "bad dequantization scale");
  }
  auto read_code = [&](std::size_t i) -> std::uint16_t {
    const std::uint8_t* p = bytes.data() + payload_at + i * width;
    const auto v = static_cast<std::uint16_t>(width == 2 ? (p[0] | (p[1] << 8)) : p[0]);
    if (v > spec.q_max()) throw Error(Errc::MalformedHeader, "code exceeds q_max");
    return v;
  };

  offset = crc_at + 4;
  try {
    if (kind == LutKind::Sigma2D) {
      CodeMatrix entries(rows, cols);
      for (std::size_t i = 0; i < count; ++i) entries.data()[i] = read_code(i);
      return Lut2D(spec, std::move(entries), step, scale_sum);
    }
    CodeVector entries(rows);
    for (std::size_t i = 0; i < count; ++i) entries(static_cast<Eigen::Index>(i)) = read_code(i);
    return Lut1D(kind, spec, std::move(entries), step);
  } catch (const Error& e) {
    if (e.code() == Errc::MalformedHeader) throw;
    throw Error(Errc::MalformedHeader, e.what());
  }
}

AnyLut deserialize_lut(std::span<const std::uint8_t> bytes) {
  std::size_t offset = 0;
  AnyLut lut = deserialize_lut(bytes, offset);
  if (offset != bytes.size()) throw Error(Errc::MalformedHeader, "trailing bytes after LUT record");
  return lut;
}

std::vector<AnyLut> deserialize_luts(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw Error(Errc::MalformedHeader, "empty LUT stream");
  std::vector<AnyLut> out;
  std::size_t offset = 0;
  while (offset < bytes.size()) out.push_back(deserialize_lut(bytes, offset));
  return out;
}

void write_lut_file(const std::filesystem::path& path, const std::vector<AnyLut>& luts) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::InvalidParams, "cannot open " + path.string() + " for writing");
  for (const auto& lut : luts) {
    const auto bytes = serialize_lut(lut);
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!os) throw Error(Errc::InvalidParams, "write failed for " + path.string());
}

std::vector<AnyLut> read_lut_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::InvalidParams, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                        std::istreambuf_iterator<char>());
  return deserialize_luts(bytes);
}

nlohmann::json lut_to_json(const AnyLut& lut) {
  nlohmann::json j;
  std::visit(
      [&j](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        const PrecisionSpec& spec = t.spec();
        j["bits"] = spec.bits();
        j["q_max"] = spec.q_max();
        j["dequant_scale"] = spec.dequant_scale();
        j["byte_size"] = lut_byte_size(t);
        if constexpr (std::is_same_v<T, Lut1D>) {
          j["kind"] = std::string(to_string(t.kind()));
          j["rows"] = t.size();
          j["cols"] = 1;
          j["step"] = t.step();
          j["scale_sum"] = 0.0;
          j["entries"] = std::vector<std::uint16_t>(t.entries().data(),
                                                    t.entries().data() + t.entries().size());
        } else {
          j["kind"] = std::string(to_string(LutKind::Sigma2D));
          j["rows"] = t.rows();
          j["cols"] = t.cols();
          j["scale_ex"] = t.scale_ex();
          j["scale_sum"] = t.scale_sum();
          auto rows = nlohmann::json::array();
          for (std::uint32_t r = 0; r < t.rows(); ++r) {
            const auto row = t.entries().row(r);
            rows.push_back(std::vector<std::uint16_t>(row.data(), row.data() + row.size()));
          }
          j["entries"] = std::move(rows);
        }
      },
      lut);
  return j;
}

std::size_t lut_byte_size(const AnyLut& lut) noexcept {
  return std::visit([](const auto& t) { return lut_byte_size(t); }, lut);
}

}  // namespace lutsoftmax
