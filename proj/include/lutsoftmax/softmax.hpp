#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string_view>

#include "lutsoftmax/lut.hpp"
#include "lutsoftmax/precision.hpp"
#include "lutsoftmax/quantization.hpp"

namespace lutsoftmax {

enum class Method { Exact, Rexp, TwoDLut, RexpRaw, LogExp, LogExpPlus };

std::string_view to_string(Method m) noexcept;
/// Accepts "exact", "rexp", "2dlut", "rexp_raw", "logexp", "logexp_plus".
Method parse_method(std::string_view name);

/// Softmax outputs after dequantization, tagged with the method that produced them.
struct ProbVector {
  Eigen::VectorXd values;
  Method method = Method::Exact;
};

/// Tables and indexing policy for the LUT kernels. Only the tables the chosen
/// method reads need to be present; they must share `spec`'s bit width.
struct KernelConfig {
  PrecisionSpec spec = PrecisionSpec::make(8);
  std::optional<Lut1D> lut_recip;
  std::optional<Lut1D> lut_alpha;
  std::optional<Lut1D> lut_exp;
  std::optional<Lut2D> lut_sigma;

  IndexMode recip_index = IndexMode::Floor;
  IndexMode alpha_index = IndexMode::Floor;
  IndexMode exp_index = IndexMode::Floor;
  IndexMode row_index = IndexMode::Round;
  IndexMode col_index = IndexMode::Round;

  /// When set, logits are snapped to this grid first (input already quantized
  /// by the previous layer).
  std::optional<double> input_step;
};

/// Alpha-table boundaries: sequence-model preset, its 2-bit variant, detection presets.
inline constexpr int kNlpAlphaBoundary = 15;
inline constexpr int kNlpAlphaBoundaryUint2 = 6;
inline constexpr int kDetrAlphaBoundaries[] = {255, 319, 511};

/// Exp-table sizes and 2D denominator coverage per precision.
int exp_table_size(Precision p) noexcept;
double sigma_max_sum(Precision p) noexcept;

/// Default REXP tables for a precision; `alpha_boundary` overrides x_s
/// (for example one of kDetrAlphaBoundaries).
KernelConfig rexp_config(Precision p, std::optional<int> alpha_boundary = std::nullopt);
/// Default 2D-LUT tables for a precision.
KernelConfig twod_config(Precision p);

/// Reference softmax with max subtraction. Sums to 1 within rounding.
ProbVector softmax_exact(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Reciprocal-exponential kernel normalized through the alpha table. All work
/// between normalization and dequantization is integer: codes n_i from the
/// reciprocal table, integer sum S, alpha bucket floor(S / q_max), product
/// codes n_i * alpha, divided by dequant_scale^2 at the end.
ProbVector softmax_rexp(const Eigen::Ref<const Eigen::VectorXd>& x, const KernelConfig& cfg);

/// 2D-table kernel: exp codes e_i, integer sum S, then one read per element
/// from the sigma table at (round(e_i / q_max / scale_ex), round(S / q_max / scale_sum)).
/// The column saturates into [1, cols]. Output divided by dequant_scale.
ProbVector softmax_2dlut(const Eigen::Ref<const Eigen::VectorXd>& x, const KernelConfig& cfg);

/// Unnormalized 1 / e^(max(x) - x_i). Does not sum to 1.
ProbVector softmax_rexp_raw(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Log-domain baseline exp(x_i - ln sum e^x_j) with outputs rounded to
/// (2^bits - 1) levels. `max_normalized` subtracts max(x) inside both the
/// exponent and the log-sum. The plain variant throws Overflow when e^x_j
/// is not representable.
ProbVector softmax_logexp(const Eigen::Ref<const Eigen::VectorXd>& x, int bits,
                          bool max_normalized);

/// Any method through one entry point. LogExp variants take cfg.spec.bits().
ProbVector softmax(Method m, const Eigen::Ref<const Eigen::VectorXd>& x, const KernelConfig& cfg);

using SoftmaxFn = std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Binds a method and its tables into a callable for the attention simulator.
SoftmaxFn make_softmax_fn(Method m, KernelConfig cfg);

/// Largest vector length whose code sum fits a 32-bit accumulator.
std::size_t max_accumulator_length(const PrecisionSpec& spec) noexcept;

}  // namespace lutsoftmax
