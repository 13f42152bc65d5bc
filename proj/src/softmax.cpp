#include "lutsoftmax/softmax.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "lutsoftmax/error.hpp"

namespace lutsoftmax {

namespace {

const Lut1D& require(const std::optional<Lut1D>& lut, LutKind kind, const PrecisionSpec& spec) {
  if (!lut) throw Error(Errc::MissingLut, std::string(to_string(kind)) + " table not configured");
  if (lut->kind() != kind) {
    throw Error(Errc::MissingLut, "expected a " + std::string(to_string(kind)) + " table, got " +
                                      std::string(to_string(lut->kind())));
  }
  if (lut->spec().bits() != spec.bits()) {
    throw Error(Errc::SpecMismatch, std::string(to_string(kind)) + " table bit width differs");
  }
  return *lut;
}

Eigen::VectorXd prepared_input(const Eigen::Ref<const Eigen::VectorXd>& x, const KernelConfig& cfg) {
  check_logits(x);
  if (cfg.input_step) return fake_quantize(x, *cfg.input_step);
  return x;
}

void check_accumulator(Eigen::Index n, const PrecisionSpec& spec) {
  if (static_cast<std::size_t>(n) > max_accumulator_length(spec)) {
    throw Error(Errc::AccumulatorOverflow,
                "vector of length " + std::to_string(n) + " overflows the 32-bit code sum");
  }
}

double outer_round(double v, double prec) {
  const double r = std::round(v * prec) / prec;
  return std::clamp(r, 0.0, 1.0);
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Exact: return "exact";
    case Method::Rexp: return "rexp";
    case Method::TwoDLut: return "2dlut";
    case Method::RexpRaw: return "rexp_raw";
    case Method::LogExp: return "logexp";
    case Method::LogExpPlus: return "logexp_plus";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Exact, Method::Rexp, Method::TwoDLut, Method::RexpRaw, Method::LogExp,
                   Method::LogExpPlus}) {
    if (name == to_string(m)) return m;
  }
  throw Error(Errc::InvalidParams, "unknown method '" + std::string(name) + "'");
}

int exp_table_size(Precision p) noexcept {
  switch (p) {
    case Precision::Int16:
    case Precision::Uint8: return 101;
    case Precision::Uint4: return 48;
    case Precision::Uint2: return 12;
  }
  return 101;
}

double sigma_max_sum(Precision p) noexcept {
  switch (p) {
    case Precision::Int16:
    case Precision::Uint8: return 60.0;
    case Precision::Uint4: return 29.0;
    case Precision::Uint2: return 8.0;
  }
  return 60.0;
}

KernelConfig rexp_config(Precision p, std::optional<int> alpha_boundary) {
  KernelConfig cfg;
  cfg.spec = spec_for(p);
  const int x_s = alpha_boundary.value_or(p == Precision::Uint2 ? kNlpAlphaBoundaryUint2
                                                                : kNlpAlphaBoundary);
  cfg.lut_recip = compact_trailing_zeros(build_lut_recip_exp(cfg.spec));
  cfg.lut_alpha = build_lut_alpha(cfg.spec, x_s);
  return cfg;
}

KernelConfig twod_config(Precision p) {
  KernelConfig cfg;
  cfg.spec = spec_for(p);
  cfg.lut_exp = build_lut_exp_covering(cfg.spec, exp_table_size(p));
  cfg.lut_sigma = build_lut_sigma(cfg.spec, 0.1, 1.0, sigma_max_sum(p));
  return cfg;
}

std::size_t max_accumulator_length(const PrecisionSpec& spec) noexcept {
  return std::numeric_limits<std::uint32_t>::max() / spec.q_max();
}

ProbVector softmax_exact(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::VectorXd e = normalize_sub_max(x).array().exp().matrix();
  return {e / e.sum(), Method::Exact};
}

ProbVector softmax_rexp(const Eigen::Ref<const Eigen::VectorXd>& x, const KernelConfig& cfg) {
  const PrecisionSpec& spec = cfg.spec;
  const Lut1D& recip = require(cfg.lut_recip, LutKind::RecipExp, spec);
  const Lut1D& alpha = require(cfg.lut_alpha, LutKind::Alpha, spec);
  const Eigen::VectorXd distance = normalize_max_minus(prepared_input(x, cfg));
  const Eigen::Index n = distance.size();
  check_accumulator(n, spec);

  Eigen::Matrix<std::uint32_t, Eigen::Dynamic, 1> codes(n);
  std::uint32_t sum = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    codes(i) = recip[bucket_index(distance(i), recip.step(), recip.max_index(), cfg.recip_index)];
    sum += codes(i);
  }
  const std::uint32_t j =
      bucket_index(static_cast<double>(sum) / spec.q_max(), alpha.step(), alpha.max_index(),
                   cfg.alpha_index);
  const std::uint32_t norm = alpha[j];

  // A product of two w-bit codes, so the scale is squared as well.
  const double scale = spec.dequant_scale() * spec.dequant_scale();
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = dequantize(std::int64_t{codes(i)} * norm, scale);
  return {std::move(out), Method::Rexp};
}

ProbVector softmax_2dlut(const Eigen::Ref<const Eigen::VectorXd>& x, const KernelConfig& cfg) {
  const PrecisionSpec& spec = cfg.spec;
  const Lut1D& exp_lut = require(cfg.lut_exp, LutKind::Exp, spec);
  if (!cfg.lut_sigma) throw Error(Errc::MissingLut, "Sigma2D table not configured");
  const Lut2D& sigma = *cfg.lut_sigma;
  if (sigma.spec().bits() != spec.bits()) {
    throw Error(Errc::SpecMismatch, "Sigma2D table bit width differs");
  }
  const Eigen::VectorXd shifted = normalize_sub_max(prepared_input(x, cfg));
  const Eigen::Index n = shifted.size();
  check_accumulator(n, spec);

  const double q = spec.q_max();
  Eigen::Matrix<std::uint32_t, Eigen::Dynamic, 1> codes(n);
  std::uint32_t sum = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    codes(i) = exp_lut[bucket_index(-shifted(i), exp_lut.step(), exp_lut.max_index(), cfg.exp_index)];
    sum += codes(i);
  }
  const std::uint32_t col = std::max<std::uint32_t>(
      1, bucket_index(sum / q, sigma.scale_sum(), sigma.cols(), cfg.col_index));

  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::uint32_t row = bucket_index(codes(i) / q, sigma.scale_ex(), sigma.rows() - 1, cfg.row_index);
    out(i) = dequantize(sigma.at(row, col), spec.dequant_scale());
  }
  return {std::move(out), Method::TwoDLut};
}

ProbVector softmax_rexp_raw(const Eigen::Ref<const Eigen::VectorXd>& x) {
  return {(-normalize_max_minus(x).array()).exp().matrix(), Method::RexpRaw};
}

ProbVector softmax_logexp(const Eigen::Ref<const Eigen::VectorXd>& x, int bits, bool max_normalized) {
  if (bits < 2 || bits > 53) throw Error(Errc::InvalidPrecision, "log-exp rounding needs 2 <= w <= 53");
  check_logits(x);
  const double prec = std::ldexp(1.0, bits) - 1.0;
  const double shift = max_normalized ? x.maxCoeff() : 0.0;
  const Eigen::ArrayXd shifted = x.array() - shift;
  const Eigen::ArrayXd e = shifted.exp();
  const double total = e.sum();
  if (!e.allFinite() || !std::isfinite(total) || !(total > 0.0)) {
    throw Error(Errc::Overflow, "sum of exponentials is not representable");
  }
  const double log_total = std::log(total);
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = outer_round(std::exp(shifted(i) - log_total), prec);
  return {std::move(out), max_normalized ? Method::LogExpPlus : Method::LogExp};
}

ProbVector softmax(Method m, const Eigen::Ref<const Eigen::VectorXd>& x, const KernelConfig& cfg) {
  switch (m) {
    case Method::Exact: return softmax_exact(x);
    case Method::Rexp: return softmax_rexp(x, cfg);
    case Method::TwoDLut: return softmax_2dlut(x, cfg);
    case Method::RexpRaw: return softmax_rexp_raw(x);
    case Method::LogExp: return softmax_logexp(x, cfg.spec.bits(), false);
    case Method::LogExpPlus: return softmax_logexp(x, cfg.spec.bits(), true);
  }
  throw Error(Errc::InvalidParams, "unknown method");
}

SoftmaxFn make_softmax_fn(Method m, KernelConfig cfg) {
  return [m, cfg = std::move(cfg)](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return softmax(m, x, cfg).values;
  };
}

}  // namespace lutsoftmax
