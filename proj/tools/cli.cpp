#include "cli.hpp"

#include <CLI11.hpp>

#include <bit>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "lutsoftmax/attention.hpp"
#include "lutsoftmax/error.hpp"
#include "lutsoftmax/harness.hpp"
#include "lutsoftmax/lut_io.hpp"
#include "lutsoftmax/softmax.hpp"

namespace lutsoftmax::cli {

namespace {

struct Common {
  std::string format = "csv";
  std::string out;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
};

void add_format(CLI::App* app, Common& c) {
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

void add_config(CLI::App* app) {
  // Listed for --help only; expand_config strips it before parsing.
  app->add_option("--config", "Flat key=value file mirroring flag names; flags win");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

/// Replaces `--config PATH` with the file's key=value pairs as flags placed
/// right after the subcommand, so explicit flags (parsed later) take precedence.
/// Blank lines, [section] headers and lines starting with # or ; are skipped.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty() || args.size() < 2) return args;
  std::ifstream is(path);
  if (!is) throw Error(Errc::InvalidParams, "cannot open config " + path);
  std::vector<std::string> injected;
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::InvalidParams, "config line without '=': " + line);
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    injected.push_back("--" + trim(line.substr(0, eq)));
    injected.push_back(value);
  }
  args.insert(args.begin() + 2, injected.begin(), injected.end());
  return args;
}

void add_seed(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "PRNG seed (default 20210701)")->envname("LUT_SOFTMAX_SEED");
}

void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream os(c.out, std::ios::trunc);
  if (!os) throw Error(Errc::InvalidParams, "cannot open " + c.out + " for writing");
  os << text;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::string rows_to_csv(const std::vector<Eigen::VectorXd>& rows) {
  std::ostringstream os;
  for (const auto& r : rows) {
    for (Eigen::Index i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_real(r(i));
    os << '\n';
  }
  return os.str();
}

std::vector<Eigen::VectorXd> read_csv_vectors(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::InvalidParams, "cannot open " + path);
  std::vector<Eigen::VectorXd> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<double> vals;
    for (const auto& cell : split_list(line)) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::logic_error&) {
        throw Error(Errc::InvalidParams, "bad number '" + cell + "' in " + path);
      }
    }
    if (!vals.empty()) rows.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())));
  }
  if (rows.empty()) throw Error(Errc::EmptyInput, path + " holds no vectors");
  return rows;
}

/// u32 rows, u32 cols, then rows*cols f32, all little-endian.
std::vector<Eigen::VectorXd> read_f32_vectors(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::InvalidParams, "cannot open " + path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  auto u32_at = [&](std::size_t at) {
    return std::uint32_t{bytes[at]} | std::uint32_t{bytes[at + 1]} << 8 | std::uint32_t{bytes[at + 2]} << 16 |
           std::uint32_t{bytes[at + 3]} << 24;
  };
  if (bytes.size() < 8) throw Error(Errc::MalformedHeader, path + " is missing its shape header");
  const std::uint32_t rows = u32_at(0);
  const std::uint32_t cols = u32_at(4);
  if (rows == 0 || cols == 0 || bytes.size() != 8 + std::size_t{rows} * cols * 4) {
    throw Error(Errc::MalformedHeader, path + " size does not match its shape header");
  }
  std::vector<Eigen::VectorXd> out;
  for (std::uint32_t r = 0; r < rows; ++r) {
    Eigen::VectorXd v(cols);
    for (std::uint32_t c = 0; c < cols; ++c) {
      v(c) = std::bit_cast<float>(u32_at(8 + (std::size_t{r} * cols + c) * 4));
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Eigen::VectorXd> read_vectors(const std::string& path, const std::string& input_format) {
  std::string fmt = input_format;
  if (fmt == "auto") {
    const auto ext = std::filesystem::path(path).extension().string();
    fmt = (ext == ".bin" || ext == ".f32") ? "f32" : "csv";
  }
  return fmt == "f32" ? read_f32_vectors(path) : read_csv_vectors(path);
}

void apply_luts(KernelConfig& cfg, const std::vector<AnyLut>& luts) {
  bool have_spec = false;
  for (const auto& lut : luts) {
    if (const auto* t1 = std::get_if<Lut1D>(&lut)) {
      switch (t1->kind()) {
        case LutKind::RecipExp: cfg.lut_recip = *t1; break;
        case LutKind::Alpha: cfg.lut_alpha = *t1; break;
        case LutKind::Exp: cfg.lut_exp = *t1; break;
        case LutKind::Sigma2D: break;
      }
      if (!have_spec) cfg.spec = t1->spec();
    } else {
      const auto& t2 = std::get<Lut2D>(lut);
      cfg.lut_sigma = t2;
      if (!have_spec) cfg.spec = t2.spec();
    }
    have_spec = true;
  }
}

// --- lutgen -----------------------------------------------------------------

struct LutgenArgs {
  Common common;
  std::string method = "2dlut";
  std::string precision = "uint8";
  int alpha_boundary = 0;
  int detr_case = 0;
  double dequant_scale = 0.0;
};

int do_lutgen(const LutgenArgs& a, std::ostream& out) {
  const Precision p = parse_precision(a.precision);
  std::vector<AnyLut> luts;
  if (a.method == "rexp") {
    std::optional<int> x_s;
    if (a.alpha_boundary > 0) x_s = a.alpha_boundary;
    if (a.detr_case > 0) x_s = kDetrAlphaBoundaries[a.detr_case - 1];
    const KernelConfig cfg = rexp_config(p, x_s);
    luts = {*cfg.lut_recip, *cfg.lut_alpha};
  } else if (a.method == "2dlut") {
    const KernelConfig cfg = twod_config(p);
    luts = {*cfg.lut_exp, *cfg.lut_sigma};
  } else {
    throw Error(Errc::InvalidParams, "lutgen method must be rexp or 2dlut");
  }
  if (a.dequant_scale > 0.0) {
    for (auto& lut : luts) {
      std::visit(
          [&](auto& t) {
            using T = std::decay_t<decltype(t)>;
            const PrecisionSpec s = t.spec().with_dequant_scale(a.dequant_scale);
            if constexpr (std::is_same_v<T, Lut1D>) {
              t = Lut1D(t.kind(), s, t.entries(), t.step());
            } else {
              t = Lut2D(s, t.entries(), t.scale_ex(), t.scale_sum());
            }
          },
          lut);
    }
  }
  write_lut_file(a.common.out, luts);

  std::size_t total = 0;
  for (const auto& l : luts) total += lut_byte_size(l);
  if (a.common.format == "json") {
    nlohmann::json j = {{"file", a.common.out}, {"precision", a.precision}, {"method", a.method},
                        {"payload_bytes", total}, {"tables", nlohmann::json::array()}};
    for (const auto& l : luts) {
      const auto d = lut_to_json(l);
      j["tables"].push_back({{"kind", d["kind"]}, {"rows", d["rows"]}, {"cols", d["cols"]},
                             {"byte_size", d["byte_size"]}});
    }
    out << j.dump(2) << '\n';
  } else {
    out << "kind,rows,cols,bytes\n";
    for (const auto& l : luts) {
      const auto d = lut_to_json(l);
      out << d["kind"].get<std::string>() << ',' << d["rows"] << ',' << d["cols"] << ','
          << d["byte_size"] << '\n';
    }
    out << "total,,," << total << '\n';
  }
  return 0;
}

// --- softmax ----------------------------------------------------------------

struct SoftmaxArgs {
  Common common;
  std::string method = "rexp";
  std::string precision = "uint8";
  std::string in;
  std::string input_format = "auto";
  std::string lut;
  int alpha_boundary = 0;
  double input_step = 0.0;
};

int do_softmax(const SoftmaxArgs& a, std::ostream& out) {
  const Method m = parse_method(a.method);
  const Precision p = parse_precision(a.precision);
  KernelConfig cfg = a.alpha_boundary > 0 && m == Method::Rexp ? rexp_config(p, a.alpha_boundary)
                                                               : config_for(m, p);
  if (!a.lut.empty()) {
    cfg.lut_recip.reset();
    cfg.lut_alpha.reset();
    cfg.lut_exp.reset();
    cfg.lut_sigma.reset();
    apply_luts(cfg, read_lut_file(a.lut));
  }
  if (a.input_step > 0.0) cfg.input_step = a.input_step;

  std::vector<Eigen::VectorXd> results;
  for (const auto& v : read_vectors(a.in, a.input_format)) results.push_back(softmax(m, v, cfg).values);

  if (a.common.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : results) j.push_back(std::vector<double>(r.data(), r.data() + r.size()));
    emit(a.common, j.dump() + "\n", out);
  } else {
    emit(a.common, rows_to_csv(results), out);
  }
  return 0;
}

// --- sweep / hist -----------------------------------------------------------

struct CorpusArgs {
  std::string dist = "attention_like(64)";
  std::size_t vectors = 512;
  std::size_t min_len = 1;
  std::size_t max_len = 128;
};

void add_corpus(CLI::App* app, CorpusArgs& c) {
  app->add_option("--dist", c.dist, "uniform(a,b) | gaussian(m,s) | attention_like(d_k)");
  app->add_option("--vectors", c.vectors, "Corpus size");
  app->add_option("--min-len", c.min_len, "Shortest vector");
  app->add_option("--max-len", c.max_len, "Longest vector");
}

CorpusSpec corpus_of(const CorpusArgs& c, std::uint64_t seed) {
  CorpusSpec s;
  s.dist = parse_distribution(c.dist);
  s.n_vectors = c.vectors;
  s.min_length = c.min_len;
  s.max_length = c.max_len;
  s.seed = seed;
  return s;
}

struct SweepArgs {
  Common common;
  CorpusArgs corpus;
  std::string methods = "exact,rexp,2dlut,rexp_raw,logexp,logexp_plus";
  std::string precisions = "int16,uint8,uint4,uint2";
};

int do_sweep(const SweepArgs& a, std::ostream& out) {
  std::vector<Method> methods;
  for (const auto& s : split_list(a.methods)) methods.push_back(parse_method(s));
  std::vector<Precision> precisions;
  for (const auto& s : split_list(a.precisions)) precisions.push_back(parse_precision(s));
  const auto rows = sweep(methods, precisions, corpus_of(a.corpus, a.common.seed), a.common.threads);
  emit(a.common, a.common.format == "json" ? sweep_to_json(rows).dump(2) + "\n" : sweep_to_csv(rows), out);
  return 0;
}

struct HistArgs {
  Common common;
  CorpusArgs corpus;
  std::string in;
  std::string input_format = "auto";
  int bins = 50;
  double lo = 0.0;
  double hi = 500.0;
};

int do_hist(const HistArgs& a, std::ostream& out) {
  const auto vectors = a.in.empty() ? make_corpus(corpus_of(a.corpus, a.common.seed))
                                    : read_vectors(a.in, a.input_format);
  const auto h = sum_exp_histogram(vectors, a.bins, a.lo, a.hi);
  emit(a.common, a.common.format == "json" ? histogram_to_json(h).dump(2) + "\n" : histogram_to_csv(h), out);
  return 0;
}

// --- attn / opcount ---------------------------------------------------------

struct AttnArgs {
  Common common;
  AttentionConfig cfg;
  std::string method = "rexp";
  std::string precision = "uint8";
  int alpha_boundary = 0;
};

void add_shape(CLI::App* app, AttentionConfig& cfg) {
  app->add_option("--layers", cfg.layers, "Encoder depth");
  app->add_option("--heads", cfg.heads, "Attention heads (N)");
  app->add_option("--seq", cfg.seq_len, "Sequence length (L)");
}

int do_attn(const AttnArgs& a, std::ostream& out) {
  const Method m = parse_method(a.method);
  const Precision p = parse_precision(a.precision);
  KernelConfig kc = a.alpha_boundary > 0 && m == Method::Rexp ? rexp_config(p, a.alpha_boundary)
                                                              : config_for(m, p);
  const auto reports = stacked_error_probe(a.cfg, make_softmax_fn(m, std::move(kc)), a.common.seed);
  if (a.common.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t l = 0; l < reports.size(); ++l) {
      const auto& r = reports[l];
      j.push_back({{"layer", l + 1}, {"linf", r.linf}, {"l1_mean", r.l1_mean}, {"kl_div", r.kl_div},
                   {"norm_dev", r.norm_dev}, {"softmax_rows", r.n_vectors}});
    }
    emit(a.common, j.dump(2) + "\n", out);
  } else {
    std::ostringstream os;
    os << "layer,linf,l1_mean,kl_div,norm_dev,softmax_rows\n";
    for (std::size_t l = 0; l < reports.size(); ++l) {
      const auto& r = reports[l];
      os << l + 1 << ',' << format_real(r.linf) << ',' << format_real(r.l1_mean) << ','
         << format_real(r.kl_div) << ',' << format_real(r.norm_dev) << ',' << r.n_vectors << '\n';
    }
    emit(a.common, os.str(), out);
  }
  return 0;
}

struct OpcountArgs {
  Common common{.format = "text"};
  AttentionConfig cfg{.heads = 8, .seq_len = 128, .hidden = 512, .d_k = 64, .layers = 6};
};

int do_opcount(const OpcountArgs& a, std::ostream& out) {
  AttentionConfig cfg = a.cfg;
  cfg.hidden = cfg.heads;  // op count depends only on layers, heads and length
  const std::uint64_t n = softmax_op_count(cfg);
  if (a.common.format == "json") {
    out << nlohmann::json{{"layers", cfg.layers}, {"heads", cfg.heads}, {"seq", cfg.seq_len},
                          {"softmax_ops", n}}.dump() << '\n';
  } else {
    out << n << '\n';
  }
  return 0;
}

int do_inspect(const std::string& path, std::ostream& out) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& lut : read_lut_file(path)) j.push_back(lut_to_json(lut));
  out << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"LUT-based divider-free softmax toolkit", "lutsoftmax"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1, 1);

  LutgenArgs lutgen;
  auto* lutgen_cmd = app.add_subcommand("lutgen", "Build LUTs and write them to a binary file");
  lutgen_cmd->add_option("--method", lutgen.method, "rexp | 2dlut")->check(CLI::IsMember({"rexp", "2dlut"}));
  lutgen_cmd->add_option("--precision", lutgen.precision, "int16 | uint8 | uint4 | uint2");
  lutgen_cmd->add_option("--alpha-boundary", lutgen.alpha_boundary, "Alpha table boundary x_s (rexp)");
  lutgen_cmd->add_option("--case", lutgen.detr_case, "Detection preset 1|2|3 (x_s = 255/319/511)")
      ->check(CLI::Range(1, 3));
  lutgen_cmd->add_option("--dequant-scale", lutgen.dequant_scale, "Dequantization scale stored in the file");
  lutgen_cmd->add_option("--out", lutgen.common.out, "Output LUT file")->required();
  add_format(lutgen_cmd, lutgen.common);
  add_config(lutgen_cmd);

  SoftmaxArgs sm;
  auto* sm_cmd = app.add_subcommand("softmax", "Run a softmax method over input vectors");
  sm_cmd->add_option("--method", sm.method, "exact | rexp | 2dlut | rexp_raw | logexp | logexp_plus");
  sm_cmd->add_option("--precision", sm.precision, "int16 | uint8 | uint4 | uint2");
  sm_cmd->add_option("--in", sm.in, "Logits: CSV (one vector per line) or f32 binary")->required();
  sm_cmd->add_option("--input-format", sm.input_format, "auto | csv | f32")
      ->check(CLI::IsMember({"auto", "csv", "f32"}));
  sm_cmd->add_option("--lut", sm.lut, "LUT file replacing the built-in tables");
  sm_cmd->add_option("--alpha-boundary", sm.alpha_boundary, "Alpha table boundary x_s (rexp)");
  sm_cmd->add_option("--input-step", sm.input_step, "Snap logits to this grid first");
  sm_cmd->add_option("--out", sm.common.out, "Output path (default stdout)");
  add_format(sm_cmd, sm.common);
  add_config(sm_cmd);

  SweepArgs sw;
  auto* sw_cmd = app.add_subcommand("sweep", "Error report per method and precision");
  sw_cmd->add_option("--methods", sw.methods, "Comma-separated methods");
  sw_cmd->add_option("--precisions", sw.precisions, "Comma-separated precisions");
  add_corpus(sw_cmd, sw.corpus);
  add_seed(sw_cmd, sw.common);
  sw_cmd->add_option("--threads", sw.common.threads, "Worker threads")->check(CLI::PositiveNumber);
  sw_cmd->add_option("--out", sw.common.out, "Output path (default stdout)");
  add_format(sw_cmd, sw.common);
  add_config(sw_cmd);

  HistArgs hist;
  auto* hist_cmd = app.add_subcommand("hist", "Histogram of sum e^(x - max x)");
  hist_cmd->add_option("--in", hist.in, "Logit file (default: synthetic corpus)");
  hist_cmd->add_option("--input-format", hist.input_format, "auto | csv | f32")
      ->check(CLI::IsMember({"auto", "csv", "f32"}));
  hist_cmd->add_option("--bins", hist.bins, "Bin count");
  hist_cmd->add_option("--lo", hist.lo, "Range start");
  hist_cmd->add_option("--hi", hist.hi, "Range end");
  add_corpus(hist_cmd, hist.corpus);
  add_seed(hist_cmd, hist.common);
  hist_cmd->add_option("--out", hist.common.out, "Output path (default stdout)");
  add_format(hist_cmd, hist.common);
  add_config(hist_cmd);

  AttnArgs attn;
  auto* attn_cmd = app.add_subcommand("attn", "Stacked attention error probe");
  add_shape(attn_cmd, attn.cfg);
  attn_cmd->add_option("--hidden", attn.cfg.hidden, "Hidden size (H)");
  attn_cmd->add_option("--dk", attn.cfg.d_k, "Key width per head");
  attn_cmd->add_option("--method", attn.method, "Softmax method under test");
  attn_cmd->add_option("--precision", attn.precision, "int16 | uint8 | uint4 | uint2");
  attn_cmd->add_option("--alpha-boundary", attn.alpha_boundary, "Alpha table boundary x_s (rexp)");
  add_seed(attn_cmd, attn.common);
  attn_cmd->add_option("--out", attn.common.out, "Output path (default stdout)");
  add_format(attn_cmd, attn.common);
  add_config(attn_cmd);

  OpcountArgs oc;
  auto* oc_cmd = app.add_subcommand("opcount", "Softmax evaluations per sequence");
  add_shape(oc_cmd, oc.cfg);
  oc_cmd->add_option("--format", oc.common.format, "text | json")->check(CLI::IsMember({"text", "csv", "json"}));
  add_config(oc_cmd);

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Dump a LUT file as JSON");
  inspect_cmd->add_option("path", inspect_path, "LUT file")->required();

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  // CLI11 takes the arguments in reverse order when given a vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);

  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*lutgen_cmd) return do_lutgen(lutgen, out);
    if (*sm_cmd) return do_softmax(sm, out);
    if (*sw_cmd) return do_sweep(sw, out);
    if (*hist_cmd) return do_hist(hist, out);
    if (*attn_cmd) return do_attn(attn, out);
    if (*oc_cmd) return do_opcount(oc, out);
    if (*inspect_cmd) return do_inspect(inspect_path, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace lutsoftmax::cli
