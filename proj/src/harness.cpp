#include "lutsoftmax/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>
#include <thread>

#include "lutsoftmax/error.hpp"
#include "lutsoftmax/random.hpp"

namespace lutsoftmax {

void Distribution::validate() const {
  switch (kind) {
    case Kind::Uniform:
      if (!std::isfinite(a) || !std::isfinite(b) || a > b) {
        throw Error(Errc::InvalidParams, "uniform(a,b) needs finite a <= b");
      }
      break;
    case Kind::Gaussian:
      if (!std::isfinite(a) || !std::isfinite(b) || b < 0.0) {
        throw Error(Errc::InvalidParams, "gaussian(mean,sigma) needs finite mean and sigma >= 0");
      }
      break;
    case Kind::AttentionLike:
      if (d_k < 1) throw Error(Errc::InvalidParams, "attention_like(d_k) needs d_k >= 1");
      break;
  }
}

std::string Distribution::describe() const {
  switch (kind) {
    case Kind::Uniform: return "uniform(" + format_real(a) + "," + format_real(b) + ")";
    case Kind::Gaussian: return "gaussian(" + format_real(a) + "," + format_real(b) + ")";
    case Kind::AttentionLike: return "attention_like(" + std::to_string(d_k) + ")";
  }
  return "?";
}

Distribution parse_distribution(const std::string& text) {
  static const std::regex two(R"(^\s*(uniform|gaussian)\s*\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)\s*$)");
  static const std::regex one(R"(^\s*attention_like\s*\(\s*(\d+)\s*\)\s*$)");
  std::smatch m;
  Distribution d;
  try {
    if (std::regex_match(text, m, two)) {
      const double a = std::stod(m[2]);
      const double b = std::stod(m[3]);
      d = m[1] == "uniform" ? Distribution::uniform(a, b) : Distribution::gaussian(a, b);
    } else if (std::regex_match(text, m, one)) {
      d = Distribution::attention_like(std::stoi(m[1]));
    } else {
      throw Error(Errc::InvalidParams, "cannot parse distribution '" + text + "'");
    }
  } catch (const std::logic_error&) {
    throw Error(Errc::InvalidParams, "bad number in distribution '" + text + "'");
  }
  d.validate();
  return d;
}

Eigen::VectorXd gen_logits(const Distribution& dist, std::size_t length, std::uint64_t seed) {
  dist.validate();
  if (length < 1) throw Error(Errc::InvalidParams, "logit vector length must be >= 1");
  Rng rng(seed);
  const auto n = static_cast<Eigen::Index>(length);
  Eigen::VectorXd x(n);
  switch (dist.kind) {
    case Distribution::Kind::Uniform:
      for (Eigen::Index i = 0; i < n; ++i) x(i) = dist.a + (dist.b - dist.a) * rng.uniform();
      break;
    case Distribution::Kind::Gaussian:
      for (Eigen::Index i = 0; i < n; ++i) x(i) = dist.a + dist.b * rng.normal();
      break;
    case Distribution::Kind::AttentionLike: {
      const Eigen::VectorXd q = normal_matrix(dist.d_k, 1, rng);
      const Eigen::MatrixXd keys = normal_matrix(n, dist.d_k, rng);
      x = keys * q / std::sqrt(static_cast<double>(dist.d_k));
      break;
    }
  }
  return x;
}

void CorpusSpec::validate() const {
  dist.validate();
  if (n_vectors < 1) throw Error(Errc::InvalidParams, "corpus needs at least one vector");
  if (min_length < 1 || min_length > max_length) {
    throw Error(Errc::InvalidParams, "corpus lengths need 1 <= min_length <= max_length");
  }
}

std::vector<Eigen::VectorXd> make_corpus(const CorpusSpec& spec) {
  spec.validate();
  std::vector<Eigen::VectorXd> out;
  out.reserve(spec.n_vectors);
  const std::uint64_t span = spec.max_length - spec.min_length + 1;
  for (std::size_t i = 0; i < spec.n_vectors; ++i) {
    const std::uint64_t s = mix_seed(spec.seed, i);
    const std::size_t length = spec.min_length + static_cast<std::size_t>(mix_seed(s, 0) % span);
    out.push_back(gen_logits(spec.dist, length, s));
  }
  return out;
}

double sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x) {
  return normalize_sub_max(x).array().exp().sum();
}

SumExpHistogram sum_exp_histogram(std::span<const Eigen::VectorXd> vectors, int bins, double lo,
                                  double hi) {
  if (bins < 1) throw Error(Errc::InvalidRange, "histogram needs at least one bin");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(Errc::InvalidRange, "histogram range needs finite lo < hi");
  }
  SumExpHistogram h;
  h.bins = bins;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  double total = 0.0;
  for (const auto& v : vectors) {
    const double s = sum_exp(v);
    total += s;
    ++h.n_samples;
    if (s < lo) {
      ++h.below;
    } else if (s > hi) {
      ++h.above;
    } else {
      auto b = static_cast<int>(std::floor((s - lo) / (hi - lo) * bins));
      if (b >= bins) b = bins - 1;
      ++h.counts[static_cast<std::size_t>(b)];
    }
  }
  h.mean = h.n_samples ? total / static_cast<double>(h.n_samples) : 0.0;
  return h;
}

double fraction_sum_exp_above(std::span<const Eigen::VectorXd> vectors, double bound) {
  if (vectors.empty()) return 0.0;
  std::size_t above = 0;
  for (const auto& v : vectors) above += sum_exp(v) > bound ? 1 : 0;
  return static_cast<double>(above) / static_cast<double>(vectors.size());
}

KernelConfig config_for(Method m, Precision p) {
  switch (m) {
    case Method::Rexp: return rexp_config(p);
    case Method::TwoDLut: return twod_config(p);
    default: {
      KernelConfig cfg;
      cfg.spec = spec_for(p);
      return cfg;
    }
  }
}

std::vector<SweepRow> sweep(std::span<const Method> methods, std::span<const Precision> precisions,
                            const CorpusSpec& corpus, unsigned threads) {
  if (methods.empty() || precisions.empty()) {
    throw Error(Errc::InvalidParams, "sweep needs at least one method and one precision");
  }
  const auto vectors = make_corpus(corpus);
  std::vector<Eigen::VectorXd> exact;
  exact.reserve(vectors.size());
  for (const auto& v : vectors) exact.push_back(softmax_exact(v).values);

  std::vector<SweepRow> rows;
  for (Method m : methods) {
    for (Precision p : precisions) rows.push_back({m, p, {}});
  }

  // Each cell walks the corpus in order, so the reports are independent of
  // how cells are spread over workers.
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t c = next++; c < rows.size(); c = next++) {
      try {
        const KernelConfig cfg = config_for(rows[c].method, rows[c].precision);
        ErrorAccumulator acc;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
          acc.add(softmax(rows[c].method, vectors[i], cfg).values, exact[i]);
        }
        rows[c].report = acc.finish();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(rows.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "method,precision,bits,n_vectors,linf,l1_mean,kl_div,norm_dev\n";
  for (const auto& r : rows) {
    os << to_string(r.method) << ',' << to_string(r.precision) << ',' << bits_of(r.precision) << ','
       << r.report.n_vectors << ',' << format_real(r.report.linf) << ','
       << format_real(r.report.l1_mean) << ',' << format_real(r.report.kl_div) << ','
       << format_real(r.report.norm_dev) << '\n';
  }
  return os.str();
}

nlohmann::json sweep_to_json(std::span<const SweepRow> rows) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& r : rows) {
    j[std::string(to_string(r.method))][std::string(to_string(r.precision))] = {
        {"bits", bits_of(r.precision)},       {"n_vectors", r.report.n_vectors},
        {"linf", r.report.linf},              {"l1_mean", r.report.l1_mean},
        {"kl_div", r.report.kl_div},          {"norm_dev", r.report.norm_dev}};
  }
  return j;
}

std::string histogram_to_csv(const SumExpHistogram& h) {
  std::ostringstream os;
  os << "bin_lo,bin_hi,count\n";
  for (int b = 0; b < h.bins; ++b) {
    os << format_real(h.bin_lo(b)) << ',' << format_real(h.bin_hi(b)) << ','
       << h.counts[static_cast<std::size_t>(b)] << '\n';
  }
  os << "mean," << format_real(h.mean) << ",\n";
  return os.str();
}

nlohmann::json histogram_to_json(const SumExpHistogram& h) {
  nlohmann::json bins = nlohmann::json::array();
  for (int b = 0; b < h.bins; ++b) {
    bins.push_back({{"bin_lo", h.bin_lo(b)}, {"bin_hi", h.bin_hi(b)},
                    {"count", h.counts[static_cast<std::size_t>(b)]}});
  }
  return {{"bins", std::move(bins)}, {"mean", h.mean},     {"n_samples", h.n_samples},
          {"below", h.below},        {"above", h.above}};
}

}  // namespace lutsoftmax
