#include "lutsoftmax/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lutsoftmax/error.hpp"

namespace lutsoftmax {

void ErrorAccumulator::add(const Eigen::Ref<const Eigen::VectorXd>& approx,
                           const Eigen::Ref<const Eigen::VectorXd>& exact) {
  if (approx.size() != exact.size()) {
    throw Error(Errc::LengthMismatch, "approximate and exact vectors differ in length");
  }
  add_elementwise(approx, exact);
  double kl = 0.0;
  for (Eigen::Index i = 0; i < exact.size(); ++i) {
    const double p = std::max(exact(i), kKlFloor);
    const double q = std::max(approx(i), kKlFloor);
    kl += p * std::log(p / q) - p + q;
  }
  kl_sum_ += std::max(kl, 0.0);
  norm_dev_ = std::max(norm_dev_, std::abs(approx.sum() - exact.sum()));
  ++vectors_;
}

void ErrorAccumulator::add_elementwise(const Eigen::Ref<const Eigen::MatrixXd>& approx,
                                       const Eigen::Ref<const Eigen::MatrixXd>& exact) {
  if (approx.rows() != exact.rows() || approx.cols() != exact.cols()) {
    throw Error(Errc::LengthMismatch, "approximate and exact outputs differ in shape");
  }
  for (Eigen::Index c = 0; c < exact.cols(); ++c) {
    for (Eigen::Index r = 0; r < exact.rows(); ++r) {
      const double d = std::abs(approx(r, c) - exact(r, c));
      linf_ = std::max(linf_, d);
      abs_sum_ += d;
    }
  }
  elements_ += static_cast<std::size_t>(exact.size());
}

ErrorReport ErrorAccumulator::finish() const {
  ErrorReport r;
  r.linf = linf_;
  r.l1_mean = elements_ ? abs_sum_ / static_cast<double>(elements_) : 0.0;
  r.kl_div = vectors_ ? kl_sum_ / static_cast<double>(vectors_) : 0.0;
  r.norm_dev = norm_dev_;
  r.n_vectors = vectors_;
  return r;
}

ErrorReport error_report(std::span<const ProbVector> approx, std::span<const ProbVector> exact) {
  if (approx.size() != exact.size()) {
    throw Error(Errc::LengthMismatch, "corpus sizes differ");
  }
  ErrorAccumulator acc;
  for (std::size_t i = 0; i < approx.size(); ++i) acc.add(approx[i].values, exact[i].values);
  return acc.finish();
}

}  // namespace lutsoftmax
