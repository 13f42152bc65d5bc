#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>

#include "lutsoftmax/softmax.hpp"

namespace lutsoftmax {

/// Approximation error against the exact oracle, pooled over a corpus.
///   linf     max |approx_i - exact_i| over every element
///   l1_mean  mean |approx_i - exact_i| over every element
///   kl_div   mean over vectors of sum p log(p/q) - p + q with p = exact,
///            q = approx, both floored at 1e-12 (non-negative even when q
///            is not normalized; equals KL(p||q) when both sum to 1)
///   norm_dev max over vectors of |sum approx - sum exact|, i.e. |sum approx - 1|
///            against a normalized oracle
struct ErrorReport {
  double linf = 0.0;
  double l1_mean = 0.0;
  double kl_div = 0.0;
  double norm_dev = 0.0;
  std::size_t n_vectors = 0;
};

inline constexpr double kKlFloor = 1e-12;

/// Streaming form of error_report, for corpora that are never materialized.
class ErrorAccumulator {
 public:
  /// Throws LengthMismatch when the vectors differ in length.
  void add(const Eigen::Ref<const Eigen::VectorXd>& approx,
           const Eigen::Ref<const Eigen::VectorXd>& exact);
  /// Folds in elementwise error only (no distribution metrics), for
  /// non-probability outputs such as attention hidden states.
  void add_elementwise(const Eigen::Ref<const Eigen::MatrixXd>& approx,
                       const Eigen::Ref<const Eigen::MatrixXd>& exact);
  ErrorReport finish() const;

 private:
  double linf_ = 0.0;
  double abs_sum_ = 0.0;
  std::size_t elements_ = 0;
  double kl_sum_ = 0.0;
  double norm_dev_ = 0.0;
  std::size_t vectors_ = 0;
};

/// Throws LengthMismatch on differing counts or lengths.
ErrorReport error_report(std::span<const ProbVector> approx, std::span<const ProbVector> exact);

}  // namespace lutsoftmax
