#include "lutsoftmax/lut.hpp"

#include <cmath>
#include <string>

#include "lutsoftmax/error.hpp"

namespace lutsoftmax {

namespace {

void check_codes(const auto& entries, std::uint32_t q_max) {
  for (Eigen::Index i = 0; i < entries.size(); ++i) {
    if (entries.data()[i] > q_max) {
      throw Error(Errc::InvalidParams, "LUT code " + std::to_string(entries.data()[i]) +
                                           " exceeds q_max " + std::to_string(q_max));
    }
  }
}

void check_scale(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(Errc::InvalidScale, std::string(what) + " must be positive and finite");
  }
}

}  // namespace

std::string_view to_string(LutKind kind) noexcept {
  switch (kind) {
    case LutKind::RecipExp: return "RecipExp";
    case LutKind::Alpha: return "Alpha";
    case LutKind::Exp: return "Exp";
    case LutKind::Sigma2D: return "Sigma2D";
  }
  return "?";
}

Lut1D::Lut1D(LutKind kind, PrecisionSpec spec, CodeVector entries, double step)
    : kind_(kind), spec_(spec), entries_(std::move(entries)), step_(step) {
  if (kind == LutKind::Sigma2D) throw Error(Errc::InvalidParams, "Sigma2D is not a 1D table");
  if (entries_.size() == 0) throw Error(Errc::InvalidParams, "1D LUT must not be empty");
  if (!(step_ > 0.0) || !std::isfinite(step_)) throw Error(Errc::InvalidStep, "LUT step must be > 0");
  check_codes(entries_, spec_.q_max());
}

Lut2D::Lut2D(PrecisionSpec spec, CodeMatrix entries, double scale_ex, double scale_sum)
    : spec_(spec), entries_(std::move(entries)), scale_ex_(scale_ex), scale_sum_(scale_sum) {
  check_scale(scale_ex_, "scale_ex");
  check_scale(scale_sum_, "scale_sum");
  if (entries_.rows() == 0 || entries_.cols() == 0) {
    throw Error(Errc::InvalidParams, "2D LUT must not be empty");
  }
  check_codes(entries_, spec_.q_max());
}

std::uint16_t round_code(double v, std::uint32_t q_max) noexcept {
  constexpr double kTieWindow = 1e-9;
  if (!(v > 0.0)) return 0;
  const double fl = std::floor(v);
  const double frac = v - fl;
  double r = frac >= 0.5 - kTieWindow ? fl + 1.0 : fl;
  if (r > static_cast<double>(q_max)) r = static_cast<double>(q_max);
  return static_cast<std::uint16_t>(r);
}

Lut1D build_lut_recip_exp(const PrecisionSpec& spec) {
  const int n = spec.x_q() + 2;
  const double q = spec.q_max();
  CodeVector entries(n);
  for (int i = 0; i < n; ++i) entries(i) = round_code(q / std::exp(static_cast<double>(i)), spec.q_max());
  return Lut1D(LutKind::RecipExp, spec, std::move(entries), 1.0);
}

Lut1D build_lut_alpha(const PrecisionSpec& spec, int x_s) {
  if (x_s < 1) throw Error(Errc::InvalidBoundary, "alpha boundary x_s must be >= 1");
  const double q = spec.q_max();
  CodeVector entries(x_s + 1);
  entries(0) = static_cast<std::uint16_t>(spec.q_max());
  for (int j = 1; j < x_s; ++j) entries(j) = round_code(q / j, spec.q_max());
  entries(x_s) = 0;
  return Lut1D(LutKind::Alpha, spec, std::move(entries), 1.0);
}

Lut1D build_lut_exp(const PrecisionSpec& spec, int n_entries, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(Errc::InvalidStep, "exp LUT step must be > 0");
  if (n_entries < 2) throw Error(Errc::InvalidParams, "exp LUT needs at least 2 entries");
  const double q = spec.q_max();
  CodeVector entries(n_entries);
  for (int i = 0; i < n_entries; ++i) {
    entries(i) = round_code(q * std::exp(-static_cast<double>(i) * step), spec.q_max());
  }
  return Lut1D(LutKind::Exp, spec, std::move(entries), step);
}

Lut1D build_lut_exp_covering(const PrecisionSpec& spec, int n_entries) {
  if (n_entries < 2) throw Error(Errc::InvalidParams, "exp LUT needs at least 2 entries");
  const double coverage = std::log(2.0 * spec.q_max());
  return build_lut_exp(spec, n_entries, coverage / (n_entries - 1));
}

Lut2D build_lut_sigma(const PrecisionSpec& spec, double scale_ex, double scale_sum,
                      double max_sum) {
  check_scale(scale_ex, "scale_ex");
  check_scale(scale_sum, "scale_sum");
  check_scale(max_sum, "max_sum");
  // max(e^x) is 1 after max-normalization.
  const auto rows = static_cast<Eigen::Index>(std::round(1.0 / scale_ex)) + 1;
  const auto cols = static_cast<Eigen::Index>(std::round(max_sum / scale_sum));
  if (cols < 1) throw Error(Errc::InvalidScale, "max_sum / scale_sum rounds to zero columns");
  const double q = spec.q_max();
  CodeMatrix entries(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 1; j <= cols; ++j) {
      const double ratio = (static_cast<double>(i) * scale_ex) / (static_cast<double>(j) * scale_sum);
      entries(i, j - 1) = round_code(ratio * q, spec.q_max());
    }
  }
  return Lut2D(spec, std::move(entries), scale_ex, scale_sum);
}

Lut1D compact_trailing_zeros(const Lut1D& lut) {
  const auto& e = lut.entries();
  Eigen::Index keep = e.size();
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    if (e(i) == 0) {
      keep = i + 1;
      break;
    }
  }
  return Lut1D(lut.kind(), lut.spec(), e.head(keep), lut.step());
}

std::size_t lut_byte_size(const Lut1D& lut) noexcept {
  return lut.size() * static_cast<std::size_t>(lut.spec().bytes_per_entry());
}

std::size_t lut_byte_size(const Lut2D& lut) noexcept {
  return lut.entry_count() * static_cast<std::size_t>(lut.spec().bytes_per_entry());
}

}  // namespace lutsoftmax
