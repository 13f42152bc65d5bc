#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lutsoftmax/error.hpp"
#include "lutsoftmax/lut.hpp"
#include "lutsoftmax/softmax.hpp"
#include "oracle/step_interpreter.hpp"

using namespace lutsoftmax;

namespace {

std::vector<int> to_vec(const CodeVector& v) { return {v.data(), v.data() + v.size()}; }

const int kBits[] = {2, 4, 8, 15, 16};

}  // namespace

TEST(RecipExp, Uint8Contents) {
  const Lut1D lut = build_lut_recip_exp(PrecisionSpec::make(8));
  EXPECT_EQ(lut.kind(), LutKind::RecipExp);
  EXPECT_EQ(lut.size(), 8u);
  EXPECT_EQ(to_vec(lut.entries()), (std::vector<int>{255, 94, 35, 13, 5, 2, 1, 0}));
  EXPECT_DOUBLE_EQ(lut.step(), 1.0);
}

TEST(RecipExp, Int16Length) {
  const Lut1D lut = build_lut_recip_exp(PrecisionSpec::make(15));
  EXPECT_EQ(lut.size(), 13u);
  EXPECT_EQ(lut[0], 32767);
  EXPECT_EQ(to_vec(lut.entries()),
            (std::vector<int>{32767, 12054, 4435, 1631, 600, 221, 81, 30, 11, 4, 1, 1, 0}));
}

TEST(RecipExp, CompactionKeepsFirstZero) {
  // The full w=2 table ends in two zeros; compaction keeps one.
  const Lut1D full = build_lut_recip_exp(PrecisionSpec::make(2));
  EXPECT_EQ(to_vec(full.entries()), (std::vector<int>{3, 1, 0, 0}));
  const Lut1D compact = compact_trailing_zeros(full);
  EXPECT_EQ(to_vec(compact.entries()), (std::vector<int>{3, 1, 0}));
  // Already minimal tables are untouched.
  for (int bits : {4, 8, 15}) {
    const Lut1D t = build_lut_recip_exp(PrecisionSpec::make(bits));
    EXPECT_EQ(compact_trailing_zeros(t), t) << bits;
  }
}

TEST(RecipExp, MatchesUnitStepExpTable) {
  for (int bits : kBits) {
    const auto spec = PrecisionSpec::make(bits);
    const Lut1D recip = build_lut_recip_exp(spec);
    const Lut1D exp = build_lut_exp(spec, spec.x_q() + 2, 1.0);
    EXPECT_EQ(recip.entries(), exp.entries()) << bits;
  }
}

TEST(Alpha, NlpPresetContents) {
  const Lut1D lut = build_lut_alpha(PrecisionSpec::make(8), 15);
  EXPECT_EQ(lut.size(), 16u);
  EXPECT_EQ(lut[0], 255);  // saturated
  EXPECT_EQ(lut[1], 255);
  EXPECT_EQ(lut[2], 128);
  EXPECT_EQ(lut[4], 64);
  EXPECT_EQ(lut[15], 0);
  EXPECT_EQ(to_vec(lut.entries()),
            (std::vector<int>{255, 255, 128, 85, 64, 51, 43, 36, 32, 28, 26, 23, 21, 20, 18, 0}));
}

TEST(Alpha, DetrSizes) {
  for (int bits : {8, 15}) {
    const auto spec = PrecisionSpec::make(bits);
    EXPECT_EQ(build_lut_alpha(spec, 255).size(), 256u);
    EXPECT_EQ(build_lut_alpha(spec, 319).size(), 320u);
    EXPECT_EQ(build_lut_alpha(spec, 511).size(), 512u);
  }
}

TEST(Alpha, Uint2Preset) {
  const Lut1D lut = build_lut_alpha(PrecisionSpec::make(2), 6);
  EXPECT_EQ(to_vec(lut.entries()), (std::vector<int>{3, 3, 2, 1, 1, 1, 0}));
}

TEST(Alpha, InvalidBoundary) {
  try {
    build_lut_alpha(PrecisionSpec::make(8), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidBoundary);
  }
  EXPECT_EQ(to_vec(build_lut_alpha(PrecisionSpec::make(8), 1).entries()), (std::vector<int>{255, 0}));
}

TEST(ExpTable, Examples) {
  const auto spec = PrecisionSpec::make(8);
  const Lut1D lut = build_lut_exp(spec, 101, 0.0625);
  EXPECT_EQ(lut[0], 255);
  EXPECT_EQ(lut[16], 94);  // x = 1.0
  for (int bits : kBits) EXPECT_EQ(build_lut_exp(PrecisionSpec::make(bits), 5, 0.3)[0], (1 << bits) - 1);

  const Lut1D covering = build_lut_exp_covering(spec, 101);
  EXPECT_EQ(covering.size(), 101u);
  EXPECT_NEAR(covering.step(), std::log(510.0) / 100.0, 1e-15);
  EXPECT_LE(covering[100], 1);  // q * e^-ln(2q) = 0.5
  EXPECT_GT(covering[99], 0);

  EXPECT_THROW(build_lut_exp(spec, 10, 0.0), Error);
  EXPECT_THROW(build_lut_exp(spec, 1, 0.1), Error);
}

TEST(Sigma, DefaultShape) {
  const Lut2D lut = build_lut_sigma(PrecisionSpec::make(8));
  EXPECT_EQ(lut.rows(), 11u);
  EXPECT_EQ(lut.cols(), 60u);
  EXPECT_DOUBLE_EQ(lut.max_sum(), 60.0);
  for (std::uint32_t j = 1; j <= lut.cols(); ++j) EXPECT_EQ(lut.at(0, j), 0);
  EXPECT_EQ(lut.at(5, 2), 64);   // round(0.25 * 255)
  EXPECT_EQ(lut.at(10, 1), 255);
  EXPECT_EQ(lut.at(10, 2), 128);
  EXPECT_EQ(lut.at(1, 1), 26);   // 25.5 is a tie, rounds away from zero
}

TEST(Sigma, PresetShapes) {
  EXPECT_EQ(build_lut_sigma(PrecisionSpec::make(4), 0.1, 1.0, 29).cols(), 29u);
  EXPECT_EQ(build_lut_sigma(PrecisionSpec::make(2), 0.1, 1.0, 8).cols(), 8u);
  EXPECT_THROW(build_lut_sigma(PrecisionSpec::make(8), 0.0, 1.0, 60), Error);
  EXPECT_THROW(build_lut_sigma(PrecisionSpec::make(8), 0.1, -1.0, 60), Error);
  EXPECT_THROW(build_lut_sigma(PrecisionSpec::make(8), 0.1, 1.0, 0.0), Error);
}

TEST(Sigma, MatchesExactRationalRecomputation) {
  for (int bits : kBits) {
    const oracle::Precision p{bits};
    const Lut2D lut = build_lut_sigma(PrecisionSpec::make(bits));
    const auto expected = oracle::sigma_table(p, 60);
    for (std::uint32_t i = 0; i < lut.rows(); ++i) {
      for (std::uint32_t j = 1; j <= lut.cols(); ++j) {
        ASSERT_EQ(lut.at(i, j), expected[i][j - 1]) << "bits " << bits << " at " << i << "," << j;
      }
    }
  }
}

TEST(Sigma, ClampsAtQmaxForWideNumeratorBuckets) {
  // scale_ex 0.5 with scale_sum 0.25 would exceed full scale without the clamp.
  const auto spec = PrecisionSpec::make(8);
  const Lut2D lut = build_lut_sigma(spec, 0.5, 0.25, 2.0);
  EXPECT_EQ(lut.rows(), 3u);
  EXPECT_EQ(lut.at(2, 1), 255);
  EXPECT_LE(lut.entries().maxCoeff(), 255);
}

TEST(LutInvariants, MonotoneTables) {
  for (int bits : kBits) {
    const auto spec = PrecisionSpec::make(bits);
    for (const Lut1D& t : {build_lut_recip_exp(spec), build_lut_exp_covering(spec, 101),
                           build_lut_exp(spec, 40, 0.3)}) {
      EXPECT_EQ(t[0], spec.q_max());
      for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LE(t[i], t[i - 1]) << bits;
    }
    const Lut1D alpha = build_lut_alpha(spec, 40);
    for (std::size_t j = 2; j < alpha.size(); ++j) EXPECT_LE(alpha[j], alpha[j - 1]);
    EXPECT_EQ(alpha[alpha.size() - 1], 0);

    const Lut2D sigma = build_lut_sigma(spec);
    for (std::uint32_t j = 1; j <= sigma.cols(); ++j) {
      for (std::uint32_t i = 1; i < sigma.rows(); ++i) EXPECT_GE(sigma.at(i, j), sigma.at(i - 1, j));
    }
    for (std::uint32_t i = 1; i < sigma.rows(); ++i) {
      for (std::uint32_t j = 2; j <= sigma.cols(); ++j) EXPECT_LE(sigma.at(i, j), sigma.at(i, j - 1));
    }
  }
}

TEST(LutInvariants, QuantizationErrorWithinHalfCode) {
  for (int bits : kBits) {
    const auto spec = PrecisionSpec::make(bits);
    const long double q = spec.q_max();
    const long double tol = 0.5L / q + 1e-12L;
    const Lut1D recip = build_lut_recip_exp(spec);
    for (std::size_t i = 0; i < recip.size(); ++i) {
      EXPECT_LE(std::fabs(recip[i] / q - std::exp(-static_cast<long double>(i))), tol);
    }
    const Lut1D exp = build_lut_exp_covering(spec, 101);
    for (std::size_t i = 0; i < exp.size(); ++i) {
      EXPECT_LE(std::fabs(exp[i] / q - std::exp(-static_cast<long double>(i) * exp.step())), tol);
    }
    const Lut1D alpha = build_lut_alpha(spec, 64);
    for (std::size_t j = 1; j + 1 < alpha.size(); ++j) {
      EXPECT_LE(std::fabs(alpha[j] / q - 1.0L / j), tol);
    }
    const Lut2D sigma = build_lut_sigma(spec);
    for (std::uint32_t i = 0; i < sigma.rows(); ++i) {
      for (std::uint32_t j = 1; j <= sigma.cols(); ++j) {
        EXPECT_LE(std::fabs(sigma.at(i, j) / q - (i / 10.0L) / j), tol);
      }
    }
  }
}

TEST(LutByteSize, PresetBudgets) {
  const auto int16 = PrecisionSpec::make(15);
  const auto uint8 = PrecisionSpec::make(8);
  EXPECT_EQ(lut_byte_size(build_lut_recip_exp(int16)) + lut_byte_size(build_lut_alpha(int16, 15)), 58u);
  auto pair = [](const KernelConfig& c) {
    return c.lut_exp ? lut_byte_size(*c.lut_exp) + lut_byte_size(*c.lut_sigma)
                     : lut_byte_size(*c.lut_recip) + lut_byte_size(*c.lut_alpha);
  };
  EXPECT_EQ(pair(twod_config(Precision::Uint8)), 761u);
  EXPECT_EQ(pair(twod_config(Precision::Uint2)), 100u);
  EXPECT_EQ(lut_byte_size(build_lut_recip_exp(uint8)) + lut_byte_size(build_lut_alpha(uint8, 255)), 264u);
}

TEST(Lut1D, RejectsBadContents) {
  const auto spec = PrecisionSpec::make(4);
  CodeVector too_big(2);
  too_big << 15, 16;
  EXPECT_THROW(Lut1D(LutKind::Exp, spec, too_big, 1.0), Error);
  EXPECT_THROW(Lut1D(LutKind::Exp, spec, CodeVector(), 1.0), Error);
  CodeVector ok(2);
  ok << 15, 3;
  EXPECT_THROW(Lut1D(LutKind::Exp, spec, ok, 0.0), Error);
  EXPECT_THROW(Lut1D(LutKind::Sigma2D, spec, ok, 1.0), Error);
}
