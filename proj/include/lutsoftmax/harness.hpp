#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lutsoftmax/metrics.hpp"
#include "lutsoftmax/precision.hpp"
#include "lutsoftmax/softmax.hpp"

namespace lutsoftmax {

inline constexpr std::uint64_t kDefaultSeed = 20210701;

/// Logit source for synthetic corpora.
struct Distribution {
  enum class Kind { Uniform, Gaussian, AttentionLike };

  Kind kind = Kind::AttentionLike;
  double a = 0.0;  // uniform lower bound or gaussian mean
  double b = 1.0;  // uniform upper bound or gaussian sigma
  int d_k = 64;    // attention-like key dimension

  static Distribution uniform(double lo, double hi) { return {Kind::Uniform, lo, hi, 0}; }
  static Distribution gaussian(double mean, double sigma) { return {Kind::Gaussian, mean, sigma, 0}; }
  static Distribution attention_like(int d_k) { return {Kind::AttentionLike, 0.0, 0.0, d_k}; }

  /// Throws InvalidParams.
  void validate() const;
  /// "uniform(a,b)", "gaussian(m,s)" or "attention_like(d)"; parse_distribution reads the same.
  std::string describe() const;
};

Distribution parse_distribution(const std::string& text);

/// Deterministic in (dist, length, seed). Attention-like logits are q . k_j / sqrt(d_k)
/// for a standard-normal query q and keys k_j.
Eigen::VectorXd gen_logits(const Distribution& dist, std::size_t length, std::uint64_t seed);

struct CorpusSpec {
  Distribution dist = Distribution::attention_like(64);
  std::size_t n_vectors = 512;
  std::size_t min_length = 1;
  std::size_t max_length = 128;
  std::uint64_t seed = kDefaultSeed;

  void validate() const;
};

/// Vector i has its own seed mix_seed(seed, i) and a length drawn uniformly
/// from [min_length, max_length].
std::vector<Eigen::VectorXd> make_corpus(const CorpusSpec& spec);

/// sum_j e^(x_j - max(x)); always in [1, length].
double sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x);

struct SumExpHistogram {
  int bins = 50;
  double lo = 0.0;
  double hi = 500.0;
  std::vector<std::uint64_t> counts;
  double mean = 0.0;          // over all samples, in range or not
  std::size_t n_samples = 0;
  std::size_t below = 0;      // samples < lo
  std::size_t above = 0;      // samples > hi

  double bin_lo(int b) const { return lo + (hi - lo) * b / bins; }
  double bin_hi(int b) const { return lo + (hi - lo) * (b + 1) / bins; }
};

/// Bins are half-open except the last, which includes hi. Throws InvalidRange.
SumExpHistogram sum_exp_histogram(std::span<const Eigen::VectorXd> vectors, int bins = 50,
                                  double lo = 0.0, double hi = 500.0);

/// Fraction of vectors whose sum_exp exceeds `bound` (denominator-column clamping).
double fraction_sum_exp_above(std::span<const Eigen::VectorXd> vectors, double bound);

/// Kernel tables each method uses at a given precision.
KernelConfig config_for(Method m, Precision p);

struct SweepRow {
  Method method;
  Precision precision;
  ErrorReport report;
};

/// One row per (method, precision), ordered method-major. Cells run on up to
/// `threads` workers; results do not depend on the thread count.
std::vector<SweepRow> sweep(std::span<const Method> methods, std::span<const Precision> precisions,
                            const CorpusSpec& corpus, unsigned threads = 1);

/// Header: method,precision,bits,n_vectors,linf,l1_mean,kl_div,norm_dev
std::string sweep_to_csv(std::span<const SweepRow> rows);
/// {"<method>": {"<precision>": {"bits":..,"linf":..,...}}}
nlohmann::json sweep_to_json(std::span<const SweepRow> rows);

/// Rows bin_lo,bin_hi,count then a final "mean,<value>," row.
std::string histogram_to_csv(const SumExpHistogram& h);
nlohmann::json histogram_to_json(const SumExpHistogram& h);

/// Fixed-width "%.9g" rendering used by every report.
std::string format_real(double v);

}  // namespace lutsoftmax
