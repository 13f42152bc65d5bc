#include "lutsoftmax/attention.hpp"

#include <cmath>
#include <string>

#include "lutsoftmax/error.hpp"
#include "lutsoftmax/random.hpp"

namespace lutsoftmax {

void AttentionConfig::validate() const {
  if (heads < 1 || seq_len < 1 || hidden < 1 || d_k < 1 || layers < 1) {
    throw Error(Errc::InvalidParams, "attention config fields must all be >= 1");
  }
  if (hidden % heads != 0) throw Error(Errc::InvalidParams, "hidden must be divisible by heads");
}

Eigen::MatrixXd scaled_dot_attention(const Eigen::Ref<const Eigen::MatrixXd>& q,
                                     const Eigen::Ref<const Eigen::MatrixXd>& k,
                                     const Eigen::Ref<const Eigen::MatrixXd>& v,
                                     const SoftmaxFn& softmax_fn) {
  if (q.cols() != k.cols() || k.rows() != v.rows() || q.rows() == 0 || k.rows() == 0 ||
      q.cols() == 0) {
    throw Error(Errc::ShapeMismatch, "Q is " + std::to_string(q.rows()) + "x" +
                                         std::to_string(q.cols()) + ", K is " +
                                         std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                                         ", V is " + std::to_string(v.rows()) + "x" +
                                         std::to_string(v.cols()));
  }
  if (!q.allFinite() || !k.allFinite() || !v.allFinite()) {
    throw Error(Errc::NonFiniteInput, "attention inputs contain NaN or Inf");
  }
  const Eigen::MatrixXd logits = (q * k.transpose()) / std::sqrt(static_cast<double>(q.cols()));
  Eigen::MatrixXd weights(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    weights.row(r) = softmax_fn(logits.row(r).transpose()).transpose();
  }
  return weights * v;
}

std::uint64_t softmax_op_count(const AttentionConfig& cfg) {
  cfg.validate();
  const auto l = static_cast<std::uint64_t>(cfg.seq_len);
  return static_cast<std::uint64_t>(cfg.layers) * static_cast<std::uint64_t>(cfg.heads) * l * l;
}

AttentionStack make_attention_stack(const AttentionConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  AttentionStack stack;
  stack.input = normal_matrix(cfg.seq_len, cfg.hidden, rng);
  // Fan-in scaling keeps hidden-state variance roughly constant across layers.
  const double in_scale = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  const double out_scale = 1.0 / std::sqrt(static_cast<double>(cfg.heads * cfg.d_k));
  for (int l = 0; l < cfg.layers; ++l) {
    AttentionWeights w;
    for (int h = 0; h < cfg.heads; ++h) {
      w.w_q.push_back(normal_matrix(cfg.hidden, cfg.d_k, rng, in_scale));
      w.w_k.push_back(normal_matrix(cfg.hidden, cfg.d_k, rng, in_scale));
      w.w_v.push_back(normal_matrix(cfg.hidden, cfg.d_k, rng, in_scale));
    }
    w.w_o = normal_matrix(cfg.heads * cfg.d_k, cfg.hidden, rng, out_scale);
    stack.layers.push_back(std::move(w));
  }
  return stack;
}

Eigen::MatrixXd attention_block(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                const AttentionWeights& w, const SoftmaxFn& softmax_fn,
                                std::vector<Eigen::VectorXd>* rows) {
  const auto heads = static_cast<Eigen::Index>(w.w_q.size());
  const Eigen::Index d_k = w.w_q.front().cols();
  Eigen::MatrixXd concat(x.rows(), heads * d_k);
  SoftmaxFn recording = softmax_fn;
  if (rows) {
    recording = [rows, &softmax_fn](const Eigen::Ref<const Eigen::VectorXd>& logits) {
      rows->push_back(logits);
      return softmax_fn(logits);
    };
  }
  for (Eigen::Index h = 0; h < heads; ++h) {
    const Eigen::MatrixXd q = x * w.w_q[h];
    const Eigen::MatrixXd k = x * w.w_k[h];
    const Eigen::MatrixXd v = x * w.w_v[h];
    concat.middleCols(h * d_k, d_k) = scaled_dot_attention(q, k, v, recording);
  }
  return concat * w.w_o;
}

std::vector<ErrorReport> stacked_error_probe(const AttentionConfig& cfg, const SoftmaxFn& approx,
                                             std::uint64_t seed) {
  const AttentionStack stack = make_attention_stack(cfg, seed);
  const SoftmaxFn exact = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return softmax_exact(x).values;
  };
  Eigen::MatrixXd x_exact = stack.input;
  Eigen::MatrixXd x_approx = stack.input;
  std::vector<ErrorReport> reports;
  for (const auto& weights : stack.layers) {
    std::vector<Eigen::VectorXd> logits;
    x_exact = attention_block(x_exact, weights, exact);
    x_approx = attention_block(x_approx, weights, approx, &logits);

    ErrorAccumulator rows;
    for (const auto& l : logits) rows.add(approx(l), softmax_exact(l).values);
    const ErrorReport row_report = rows.finish();

    ErrorAccumulator hidden;
    hidden.add_elementwise(x_approx, x_exact);
    ErrorReport r = hidden.finish();
    r.kl_div = row_report.kl_div;
    r.norm_dev = row_report.norm_dev;
    r.n_vectors = row_report.n_vectors;
    reports.push_back(r);
  }
  return reports;
}

}  // namespace lutsoftmax
