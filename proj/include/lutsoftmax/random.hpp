#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace lutsoftmax {

/// Seeded generator with platform-independent output. The standard
/// distributions are implementation-defined, so uniform and normal draws are
/// derived from raw mt19937_64 words here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal (Box-Muller, second value cached).
  double normal();

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; derives independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// rows x cols matrix of independent N(0, scale^2) draws, filled row by row.
Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0);

}  // namespace lutsoftmax
