#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "lutsoftmax/precision.hpp"

namespace lutsoftmax {

using CodeVector = Eigen::Matrix<std::uint16_t, Eigen::Dynamic, 1>;
using CodeMatrix = Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Numeric values match the kind byte of the LUT file format.
enum class LutKind : std::uint8_t { RecipExp = 0, Alpha = 1, Exp = 2, Sigma2D = 3 };

std::string_view to_string(LutKind kind) noexcept;

/// Immutable one-dimensional code table. entries[i] is the code for input
/// bucket i, where one bucket spans `step` of the input domain.
class Lut1D {
 public:
  /// Validates codes against spec.q_max() and step > 0.
  Lut1D(LutKind kind, PrecisionSpec spec, CodeVector entries, double step);

  LutKind kind() const noexcept { return kind_; }
  const PrecisionSpec& spec() const noexcept { return spec_; }
  const CodeVector& entries() const noexcept { return entries_; }
  double step() const noexcept { return step_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.size()); }
  std::uint32_t max_index() const noexcept { return static_cast<std::uint32_t>(size() - 1); }
  std::uint16_t operator[](std::size_t i) const { return entries_(static_cast<Eigen::Index>(i)); }

  friend bool operator==(const Lut1D& a, const Lut1D& b) {
    return a.kind_ == b.kind_ && a.spec_ == b.spec_ && a.step_ == b.step_ &&
           a.entries_ == b.entries_;
  }

 private:
  LutKind kind_;
  PrecisionSpec spec_;
  CodeVector entries_;
  double step_;
};

/// Precomputed softmax outputs. Row i is the numerator bucket (i * scale_ex),
/// column j (1-based) the denominator bucket (j * scale_sum). Storage column
/// j-1 holds column j.
class Lut2D {
 public:
  Lut2D(PrecisionSpec spec, CodeMatrix entries, double scale_ex, double scale_sum);

  const PrecisionSpec& spec() const noexcept { return spec_; }
  const CodeMatrix& entries() const noexcept { return entries_; }
  double scale_ex() const noexcept { return scale_ex_; }
  double scale_sum() const noexcept { return scale_sum_; }
  double max_sum() const noexcept { return static_cast<double>(cols()) * scale_sum_; }
  std::uint32_t rows() const noexcept { return static_cast<std::uint32_t>(entries_.rows()); }
  std::uint32_t cols() const noexcept { return static_cast<std::uint32_t>(entries_.cols()); }
  /// col is 1-based, matching the denominator bucket number.
  std::uint16_t at(std::uint32_t row, std::uint32_t col) const {
    return entries_(row, static_cast<Eigen::Index>(col) - 1);
  }
  std::size_t entry_count() const noexcept { return static_cast<std::size_t>(entries_.size()); }

  friend bool operator==(const Lut2D& a, const Lut2D& b) {
    return a.spec_ == b.spec_ && a.scale_ex_ == b.scale_ex_ &&
           a.scale_sum_ == b.scale_sum_ && a.entries_ == b.entries_;
  }

 private:
  PrecisionSpec spec_;
  CodeMatrix entries_;
  double scale_ex_;
  double scale_sum_;
};

/// round(v) with ties away from zero, clamped to [0, q_max]. Values within
/// 1e-9 of a half count as ties: decimal scales such as 0.1 are inexact in
/// binary, and the 2D table hits exact halves (0.1 * 255 = 25.5) routinely.
std::uint16_t round_code(double v, std::uint32_t q_max) noexcept;

/// entries[i] = round(q_max / e^i), i = 0 .. x_q + 1.
Lut1D build_lut_recip_exp(const PrecisionSpec& spec);

/// entries[j] = round(q_max / j) for j = 1 .. x_s - 1, entries[x_s] = 0.
/// entries[0] saturates to q_max (a sum below one bucket gets the largest
/// normalizer). Throws InvalidBoundary for x_s < 1.
Lut1D build_lut_alpha(const PrecisionSpec& spec, int x_s);

/// entries[i] = round(q_max * e^(-i * step)), i = 0 .. n_entries - 1.
Lut1D build_lut_exp(const PrecisionSpec& spec, int n_entries, double step);

/// Exp table whose n_entries cover [0, ln(2 q_max)], the point past which
/// every code rounds to zero.
Lut1D build_lut_exp_covering(const PrecisionSpec& spec, int n_entries);

/// 2D softmax table. rows = round(1 / scale_ex) + 1, cols = round(max_sum / scale_sum).
Lut2D build_lut_sigma(const PrecisionSpec& spec, double scale_ex = 0.1,
                      double scale_sum = 1.0, double max_sum = 60.0);

/// Drops the redundant zero tail of a non-increasing table, keeping the first
/// zero. Saturating lookups give identical codes before and after.
Lut1D compact_trailing_zeros(const Lut1D& lut);

/// entry_count * bytes_per_entry.
std::size_t lut_byte_size(const Lut1D& lut) noexcept;
std::size_t lut_byte_size(const Lut2D& lut) noexcept;

}  // namespace lutsoftmax
