#include "lutsoftmax/quantization.hpp"

#include <algorithm>

namespace lutsoftmax {

std::uint32_t bucket_index(double v, double step, std::uint32_t max_index,
                           IndexMode mode) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(Errc::InvalidStep, "bucket step must be positive and finite");
  }
  if (std::isnan(v)) throw Error(Errc::NonFiniteInput, "bucket value is NaN");
  const double scaled = v / step;
  const double idx = mode == IndexMode::Floor ? std::floor(scaled) : round_half_away(scaled);
  if (idx <= 0.0) return 0;
  if (idx >= static_cast<double>(max_index)) return max_index;
  return static_cast<std::uint32_t>(idx);
}

double dequantize(std::int64_t q, double scale) {
  if (!(scale > 0.0)) throw Error(Errc::InvalidScale, "dequantization scale must be > 0");
  return static_cast<double>(q) / scale;
}

}  // namespace lutsoftmax
