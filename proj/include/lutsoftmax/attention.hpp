#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "lutsoftmax/metrics.hpp"
#include "lutsoftmax/softmax.hpp"

namespace lutsoftmax {

/// N heads, sequence length L, hidden size H, per-head key width d_k, encoder depth.
struct AttentionConfig {
  int heads = 8;
  int seq_len = 32;
  int hidden = 64;
  int d_k = 8;
  int layers = 6;

  /// Throws InvalidParams unless every field is >= 1 and hidden % heads == 0.
  void validate() const;
};

/// softmax(Q K^T / sqrt(d_k)) V with `softmax_fn` applied row by row.
/// Q and K are L x d_k (key count may differ from query count), V is L x d_v.
/// Throws ShapeMismatch or NonFiniteInput.
Eigen::MatrixXd scaled_dot_attention(const Eigen::Ref<const Eigen::MatrixXd>& q,
                                     const Eigen::Ref<const Eigen::MatrixXd>& k,
                                     const Eigen::Ref<const Eigen::MatrixXd>& v,
                                     const SoftmaxFn& softmax_fn);

/// layers * N * L * L softmax evaluations per sequence.
std::uint64_t softmax_op_count(const AttentionConfig& cfg);

/// Random fixed weights of one multi-head block.
struct AttentionWeights {
  std::vector<Eigen::MatrixXd> w_q, w_k, w_v;  // per head, H x d_k
  Eigen::MatrixXd w_o;                         // (N * d_k) x H
};

/// Input X (L x H) and one weight set per layer, all drawn from `seed`.
struct AttentionStack {
  Eigen::MatrixXd input;
  std::vector<AttentionWeights> layers;
};

AttentionStack make_attention_stack(const AttentionConfig& cfg, std::uint64_t seed);

/// One multi-head block: per-head attention, concatenation, output projection.
/// When `rows` is non-null the attention logits of every head row are appended.
Eigen::MatrixXd attention_block(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                const AttentionWeights& w, const SoftmaxFn& softmax_fn,
                                std::vector<Eigen::VectorXd>* rows = nullptr);

/// Runs the stack twice, once with exact softmax and once with `approx`, and
/// reports per-layer divergence. linf / l1_mean compare hidden states;
/// kl_div / norm_dev compare the approximate path's softmax rows with the exact
/// softmax of the same logits; n_vectors counts those rows.
std::vector<ErrorReport> stacked_error_probe(const AttentionConfig& cfg, const SoftmaxFn& approx,
                                             std::uint64_t seed);

}  // namespace lutsoftmax
