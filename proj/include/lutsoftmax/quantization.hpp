#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>

#include "lutsoftmax/error.hpp"

namespace lutsoftmax {

/// How a real value is mapped onto a coarse index grid. Floor is the
/// "take the high-order bits" reading; Round is nearest, ties away from zero.
enum class IndexMode { Floor, Round };

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Throws EmptyInput / NonFiniteInput.
template <typename Derived>
void check_logits(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0) throw Error(Errc::EmptyInput, "logit vector is empty");
  if (!x.allFinite()) throw Error(Errc::NonFiniteInput, "logit vector has NaN or Inf");
}

/// x - max(x). Every output is <= 0 and the maximum lands on exactly 0.
template <typename Derived>
Vector<typename Derived::Scalar> normalize_sub_max(const Eigen::MatrixBase<Derived>& x) {
  check_logits(x);
  const auto m = x.maxCoeff();
  return (x.array() - m).matrix();
}

/// max(x) - x, the mirror image used by the reciprocal-exponential kernel.
template <typename Derived>
Vector<typename Derived::Scalar> normalize_max_minus(const Eigen::MatrixBase<Derived>& x) {
  check_logits(x);
  const auto m = x.maxCoeff();
  return (m - x.array()).matrix();
}

/// Round half away from zero (std::round semantics, spelled out for intent).
inline double round_half_away(double v) noexcept { return std::round(v); }

/// Saturating bucket of v on a grid of width `step`:
/// clamp(floor-or-round(v / step), 0, max_index).
std::uint32_t bucket_index(double v, double step, std::uint32_t max_index,
                           IndexMode mode);

/// q / scale. Throws InvalidScale for scale <= 0.
double dequantize(std::int64_t q, double scale);

/// Snap inputs to a grid of width `step` (quantize then dequantize), modelling
/// logits that arrive already quantized by the previous layer.
template <typename Derived>
Vector<typename Derived::Scalar> fake_quantize(const Eigen::MatrixBase<Derived>& x,
                                               double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(Errc::InvalidStep, "input quantization step must be positive");
  }
  check_logits(x);
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([step](Scalar v) {
    return static_cast<Scalar>(std::round(static_cast<double>(v) / step) * step);
  });
}

}  // namespace lutsoftmax
