#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lutsoftmax/error.hpp"
#include "lutsoftmax/harness.hpp"
#include "lutsoftmax/metrics.hpp"
#include "lutsoftmax/random.hpp"

using namespace lutsoftmax;
using Eigen::VectorXd;

namespace {

ProbVector pv(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return {out, Method::Exact};
}

template <class F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::InvalidParams;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Metrics, IdenticalInputsGiveZero) {
  const std::vector<ProbVector> a{pv({0.2, 0.8}), pv({1.0}), pv({0.3, 0.3, 0.3})};
  const ErrorReport r = error_report(a, a);
  EXPECT_EQ(r.linf, 0.0);
  EXPECT_EQ(r.l1_mean, 0.0);
  EXPECT_EQ(r.kl_div, 0.0);
  EXPECT_EQ(r.norm_dev, 0.0);
  EXPECT_EQ(r.n_vectors, 3u);
}

TEST(Metrics, Example) {
  const std::vector<ProbVector> exact{pv({1.0, 0.0})};
  const std::vector<ProbVector> approx{pv({0.9, 0.1})};
  const ErrorReport r = error_report(approx, exact);
  EXPECT_NEAR(r.linf, 0.1, 1e-15);
  EXPECT_NEAR(r.l1_mean, 0.1, 1e-15);
  EXPECT_NEAR(r.norm_dev, 0.0, 1e-15);
  // 1 log(1/0.9) - 1 + 0.9, plus the zero entry: 1e-12 log(1e-12/0.1) - 1e-12 + 0.1.
  const double kl = std::log(1 / 0.9) - 0.1 + (1e-12 * std::log(1e-11) - 1e-12 + 0.1);
  EXPECT_NEAR(r.kl_div, kl, 1e-12);
}

TEST(Metrics, UnnormalizedApprox) {
  const std::vector<ProbVector> exact{pv({0.5, 0.5}), pv({1.0})};
  const std::vector<ProbVector> approx{pv({0.25, 0.25}), pv({1.0})};
  const ErrorReport r = error_report(approx, exact);
  EXPECT_DOUBLE_EQ(r.norm_dev, 0.5);
  EXPECT_GT(r.kl_div, 0.0);
  EXPECT_DOUBLE_EQ(r.l1_mean, 0.5 / 3);
}

TEST(Metrics, LengthMismatch) {
  const std::vector<ProbVector> a{pv({1.0})};
  const std::vector<ProbVector> b{pv({0.5, 0.5})};
  const std::vector<ProbVector> c{pv({1.0}), pv({1.0})};
  EXPECT_EQ(error_of([&] { error_report(a, b); }), Errc::LengthMismatch);
  EXPECT_EQ(error_of([&] { error_report(a, c); }), Errc::LengthMismatch);
}

TEST(Rng, Deterministic) {
  Rng a(7), b(7), c(8);
  for (int i = 0; i < 10; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  EXPECT_NE(Rng(7).next_u64(), c.next_u64());
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_EQ(mix_seed(1, 5), mix_seed(1, 5));
}

TEST(Rng, NormalMoments) {
  Rng r(123);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    s += v;
    s2 += v * v;
  }
  EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(GenLogits, Examples) {
  EXPECT_TRUE(gen_logits(Distribution::uniform(0, 0), 5, 1).isZero());
  const VectorXd a = gen_logits(Distribution::gaussian(0, 1), 64, 9);
  EXPECT_EQ(a, gen_logits(Distribution::gaussian(0, 1), 64, 9));
  EXPECT_NE(a, gen_logits(Distribution::gaussian(0, 1), 64, 10));
  const VectorXd u = gen_logits(Distribution::uniform(-2, 3), 1000, 4);
  EXPECT_GE(u.minCoeff(), -2.0);
  EXPECT_LT(u.maxCoeff(), 3.0);
  EXPECT_EQ(gen_logits(Distribution::attention_like(16), 33, 2).size(), 33);
}

TEST(GenLogits, GaussianMean) {
  const int n = 100000;
  const VectorXd g = gen_logits(Distribution::gaussian(2.0, 3.0), n, 77);
  EXPECT_NEAR(g.mean(), 2.0, 5 * 3.0 / std::sqrt(n));
}

TEST(GenLogits, InvalidParams) {
  EXPECT_EQ(error_of([] { gen_logits(Distribution::uniform(1, 0), 3, 1); }), Errc::InvalidParams);
  EXPECT_EQ(error_of([] { gen_logits(Distribution::gaussian(0, -1), 3, 1); }), Errc::InvalidParams);
  EXPECT_EQ(error_of([] { gen_logits(Distribution::attention_like(0), 3, 1); }), Errc::InvalidParams);
  EXPECT_EQ(error_of([] { gen_logits(Distribution::gaussian(0, 1), 0, 1); }), Errc::InvalidParams);
}

TEST(Distribution, ParseRoundTrip) {
  for (const auto& d : {Distribution::uniform(-1.5, 2), Distribution::gaussian(0, 4),
                        Distribution::attention_like(64)}) {
    const Distribution back = parse_distribution(d.describe());
    EXPECT_EQ(back.kind, d.kind);
    EXPECT_EQ(back.a, d.a);
    EXPECT_EQ(back.b, d.b);
    EXPECT_EQ(back.d_k, d.d_k);
  }
  EXPECT_THROW(parse_distribution("cauchy(0,1)"), Error);
}

TEST(Corpus, LengthsAndDeterminism) {
  CorpusSpec spec;
  spec.n_vectors = 300;
  spec.min_length = 3;
  spec.max_length = 9;
  const auto corpus = make_corpus(spec);
  ASSERT_EQ(corpus.size(), 300u);
  std::size_t lo = 100, hi = 0;
  for (const auto& v : corpus) {
    lo = std::min<std::size_t>(lo, v.size());
    hi = std::max<std::size_t>(hi, v.size());
  }
  EXPECT_EQ(lo, 3u);
  EXPECT_EQ(hi, 9u);
  EXPECT_EQ(make_corpus(spec), corpus);
  spec.min_length = 10;
  EXPECT_THROW(make_corpus(spec), Error);
}

TEST(SumExp, RangeAndInvariance) {
  EXPECT_DOUBLE_EQ(sum_exp(VectorXd::Constant(7, 3.0)), 7.0);
  const VectorXd x = gen_logits(Distribution::gaussian(0, 2), 50, 3);
  const double s = sum_exp(x);
  EXPECT_GE(s, 1.0);
  EXPECT_LE(s, 50.0);
  VectorXd rev = x.reverse();
  EXPECT_NEAR(sum_exp(rev), s, 1e-12);
}

TEST(Histogram, Counts) {
  const std::vector<VectorXd> v{VectorXd::Zero(4), VectorXd::Zero(12), VectorXd::Zero(600), VectorXd::Zero(500)};
  const SumExpHistogram h = sum_exp_histogram(v, 50, 0.0, 500.0);
  EXPECT_EQ(h.counts.size(), 50u);
  EXPECT_EQ(h.counts[0], 1u);   // 4
  EXPECT_EQ(h.counts[1], 1u);   // 12
  EXPECT_EQ(h.counts[49], 1u);  // 500 lands in the closed last bin
  EXPECT_EQ(h.above, 1u);
  EXPECT_EQ(h.below, 0u);
  EXPECT_EQ(h.n_samples, 4u);
  EXPECT_DOUBLE_EQ(h.mean, (4.0 + 12 + 600 + 500) / 4);
  EXPECT_DOUBLE_EQ(h.bin_hi(0), 10.0);
  EXPECT_DOUBLE_EQ(fraction_sum_exp_above(v, 60.0), 0.5);
  EXPECT_EQ(error_of([&] { sum_exp_histogram(v, 0, 0, 1); }), Errc::InvalidRange);
  EXPECT_EQ(error_of([&] { sum_exp_histogram(v, 5, 2, 1); }), Errc::InvalidRange);
  const std::string csv = histogram_to_csv(h);
  EXPECT_NE(csv.find("\nmean,279,"), std::string::npos);
  EXPECT_EQ(histogram_to_json(h)["bins"].size(), 50u);
}

TEST(Sweep, ExactRowIsZero) {
  CorpusSpec spec;
  spec.n_vectors = 40;
  const std::vector<Method> methods{Method::Exact};
  const std::vector<Precision> precs{Precision::Uint8};
  const auto rows = sweep(methods, precs, spec);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].report.linf, 0.0);
  EXPECT_EQ(rows[0].report.n_vectors, 40u);
}

TEST(Sweep, ShapeOrderAndThreads) {
  CorpusSpec spec;
  spec.n_vectors = 64;
  const std::vector<Method> methods{Method::Rexp, Method::TwoDLut, Method::LogExpPlus};
  const std::vector<Precision> precs(std::begin(kAllPrecisions), std::end(kAllPrecisions));
  const auto one = sweep(methods, precs, spec, 1);
  const auto four = sweep(methods, precs, spec, 4);
  ASSERT_EQ(one.size(), 12u);
  EXPECT_EQ(one[0].method, Method::Rexp);
  EXPECT_EQ(one[4].method, Method::TwoDLut);
  EXPECT_EQ(one[1].precision, Precision::Uint4);
  EXPECT_EQ(sweep_to_csv(one), sweep_to_csv(four));
  const auto j = sweep_to_json(one);
  EXPECT_TRUE(j["rexp"]["uint8"].contains("l1_mean"));
  const std::string csv = sweep_to_csv(one);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,precision,bits,n_vectors,linf,l1_mean,kl_div,norm_dev");
}

TEST(Sweep, ErrorShrinksWithPrecision) {
  const std::vector<Method> methods{Method::Rexp, Method::TwoDLut};
  const std::vector<Precision> precs(std::begin(kAllPrecisions), std::end(kAllPrecisions));
  const auto rows = sweep(methods, precs, CorpusSpec{}, 4);
  for (std::size_t m = 0; m < 2; ++m) {
    for (std::size_t p = 1; p < 4; ++p) {
      EXPECT_LE(rows[m * 4 + p].report.l1_mean, rows[m * 4 + p - 1].report.l1_mean)
          << to_string(rows[m * 4 + p].method) << " " << to_string(rows[m * 4 + p].precision);
    }
  }
}

TEST(Sweep, DefaultCorpusGolden) {
  const std::vector<Method> methods{Method::Rexp, Method::TwoDLut, Method::LogExp, Method::LogExpPlus};
  const std::vector<Precision> precs(std::begin(kAllPrecisions), std::end(kAllPrecisions));
  const auto rows = sweep(methods, precs, CorpusSpec{}, 4);
  EXPECT_EQ(sweep_to_csv(rows), read_file(std::string(LUTSOFTMAX_GOLDEN_DIR) + "/sweep_default.csv"));
}

TEST(Sweep, ConfigForMethods) {
  EXPECT_TRUE(config_for(Method::Rexp, Precision::Uint4).lut_alpha.has_value());
  EXPECT_TRUE(config_for(Method::TwoDLut, Precision::Uint4).lut_sigma.has_value());
  EXPECT_EQ(config_for(Method::LogExp, Precision::Int16).spec.bits(), 15);
}

TEST(Format, Real) {
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(1.0 / 3), "0.333333333");
  EXPECT_EQ(format_real(0.0), "0");
}
