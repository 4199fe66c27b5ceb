// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line frontend. Exit codes: 0 success, 1 runtime or data error,
// 2 usage error (bad flags, unknown format).

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lofiq/codebook.hpp"
#include "lofiq/codec.hpp"
#include "lofiq/error.hpp"
#include "lofiq/metrics.hpp"
#include "lofiq/ptq.hpp"
#include "lofiq/quant_hif8.hpp"
#include "lofiq/tensor_file.hpp"

namespace {

using namespace lofiq;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

constexpr const char* kSelectorHelp = R"(Format selectors (family[:param]...):
  int8, int4                 sym | asym   (default sym for weights, asym otherwise)
  e4m3 e5m2 e3m2 e2m3 e2m1   direct cast, no scaling
  mxfp8-e4m3 mxfp8-e5m2 mxfp6-e3m2 mxfp6-e2m3 mxfp4 mxint8
  mx:<element>               k=<block size>, default 32
  nvfp4
  hif8                       eps=<v>
  hif8-scaled                K=<v> (16 weight, 4 activation, 1 kv), eps=<v>
  hif4                       threshold=literal|half
  any family                 axis=<n>
Examples: hif8-scaled:K=16  mx:e2m1:k=32  int8:sym:axis=0)";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

ReportFormat parse_report_format(const std::string& s) {
  if (s == "json") return ReportFormat::kJson;
  if (s == "csv") return ReportFormat::kCsv;
  throw UsageError("report format must be json or csv");
}

DType parse_dtype(const std::string& s) {
  if (s == "f32") return DType::kF32;
  if (s == "f64") return DType::kF64;
  throw UsageError("dtype must be f32 or f64");
}

Codec parse_codec(const std::string& s) { return Codec::parse(s); }

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open '" + path + "' for writing");
  out << text;
  if (!out.flush()) throw Error(ErrorCode::kIoError, "write to '" + path + "' failed");
}

// Zero-pads `axis` up to a multiple of `k`.
Tensor pad_axis(const Tensor& t, std::size_t axis, std::size_t k) {
  const std::size_t extent = t.extent(axis);
  const std::size_t padded = (extent + k - 1) / k * k;
  if (padded == extent) return t;
  std::size_t outer = 1, inner = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= t.shape()[a];
  for (std::size_t a = axis + 1; a < t.rank(); ++a) inner *= t.shape()[a];
  Shape shape = t.shape();
  shape[axis] = padded;
  std::vector<double> out(shape_size(shape), 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t e = 0; e < extent; ++e)
      for (std::size_t i = 0; i < inner; ++i)
        out[(o * padded + e) * inner + i] = t[(o * extent + e) * inner + i];
  return Tensor(std::move(shape), std::move(out), t.name());
}

Tensor crop_axis(const Tensor& t, std::size_t axis, std::size_t extent) {
  const std::size_t padded = t.extent(axis);
  if (padded == extent) return t;
  std::size_t outer = 1, inner = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= t.shape()[a];
  for (std::size_t a = axis + 1; a < t.rank(); ++a) inner *= t.shape()[a];
  Shape shape = t.shape();
  shape[axis] = extent;
  std::vector<double> out(shape_size(shape));
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t e = 0; e < extent; ++e)
      for (std::size_t i = 0; i < inner; ++i)
        out[(o * extent + e) * inner + i] = t[(o * padded + e) * inner + i];
  return Tensor(std::move(shape), std::move(out), t.name());
}

Codebook codebook_for(const std::string& name) {
  std::string lower = name;
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "hif8") return hif8_codebook();
  return enumerate(builtin_spec(name));
}

struct EnumerateArgs {
  std::string format;
  std::vector<double> interval;
  std::string output;
};

void run_enumerate(const EnumerateArgs& a) {
  const Codebook cb = codebook_for(a.format);
  const FormatExtremes ex = cb.extremes();
  std::string out;
  out += "format " + cb.name() + "\n";
  out += "count " + std::to_string(cb.size()) + "\n";
  out += "max_normal " + num(ex.max_normal) + "\n";
  out += "min_normal " + num(ex.min_normal) + "\n";
  out += "max_subnormal " + num(ex.max_subnormal) + "\n";
  out += "min_subnormal " + num(ex.min_subnormal) + "\n";
  if (!a.interval.empty()) {
    out += "interval [" + num(a.interval[0]) + ", " + num(a.interval[1]) + "] count " +
           std::to_string(density_in_interval(cb, a.interval[0], a.interval[1])) + "\n";
  }
  out += "values\n";
  for (double v : cb.values()) out += num(v) + "\n";
  write_text(a.output, out);
}

struct QuantizeArgs {
  std::string input, output, report, format, role = "weight", report_format = "json",
                                                    dtype = "f32";
  std::optional<std::size_t> axis;
  bool pad = false;
};

void run_quantize(const QuantizeArgs& a) {
  const Codec codec = parse_codec(a.format);
  const Role role = parse_role(a.role);
  const ReportFormat rf = parse_report_format(a.report_format);
  const DType dtype = parse_dtype(a.dtype);
  const auto tensors = load_tensors(a.input);
  std::vector<Tensor> outputs;
  std::vector<FidelityReport> reports;
  for (const Tensor& t : tensors) {
    try {
      const std::size_t axis = a.axis.value_or(codec.resolve_axis(t));
      const std::size_t extent = t.extent(axis);
      const std::size_t k = codec.block_size();
      Tensor rec;
      if (a.pad && extent % k != 0) {
        rec = crop_axis(codec.fake_quantize(pad_axis(t, axis, k), axis, role), axis, extent);
      } else {
        rec = codec.fake_quantize(t, axis, role);
      }
      rec = rec.with_name(t.name());
      reports.push_back(make_report(t, rec, codec, role, axis));
      outputs.push_back(std::move(rec));
    } catch (const Error& e) {
      throw Error(e.code(), "tensor '" + t.name() + "': " + e.message());
    }
  }
  save_tensors(outputs, a.output, dtype);
  const std::string report_path =
      a.report.empty() ? a.output + (rf == ReportFormat::kJson ? ".report.json" : ".report.csv")
                       : a.report;
  emit_report(reports, rf, report_path);
}

struct CompareArgs {
  std::string input, synth, formats, role = "weight", output, report_format = "json";
  std::uint64_t seed = 0;
  std::optional<std::size_t> axis;
};

void run_compare(const CompareArgs& a) {
  const auto codecs = parse_codec_list(a.formats);
  const Role role = parse_role(a.role);
  const ReportFormat rf = parse_report_format(a.report_format);
  std::vector<Tensor> tensors;
  if (!a.synth.empty()) {
    tensors.push_back(synth(parse_synth(a.synth, a.seed)));
  } else {
    tensors = load_tensors(a.input);
  }
  std::vector<FidelityReport> reports;
  for (const Tensor& t : tensors) {
    auto r = compare_formats(t, codecs, role, a.axis);
    reports.insert(reports.end(), r.begin(), r.end());
  }
  emit_report(reports, rf, a.output);
}

struct PtqArgs {
  std::string x, w, synth_x, synth_w, format, output;
  std::optional<double> alpha;
  std::vector<double> grid;
  std::size_t rank = kDefaultSvdRank;
  bool no_smooth = false;
  std::uint64_t seed = 0;
};

std::pair<Tensor, Tensor> load_layer(const PtqArgs& a) {
  Tensor x, w;
  if (!a.synth_x.empty()) {
    x = synth(parse_synth(a.synth_x, a.seed));
  } else {
    x = load_tensors(a.x).at(0);
  }
  if (!a.synth_w.empty()) {
    w = synth(parse_synth(a.synth_w, a.seed + 1));
  } else {
    w = load_tensors(a.w).at(0);
  }
  return {std::move(x), std::move(w)};
}

void run_ptq(const PtqArgs& a, bool svdq) {
  const Codec codec = parse_codec(a.format);
  if (!svdq && a.no_smooth) throw UsageError("--no-smooth applies to svdq only");
  const auto [x, w] = load_layer(a);
  PipelineOptions opt;
  if (a.alpha) {
    opt.alpha_grid = {*a.alpha};
  } else if (!a.grid.empty()) {
    opt.alpha_grid = a.grid;
  }
  opt.rank = a.rank;
  opt.smooth = !a.no_smooth;

  nlohmann::ordered_json j;
  j["format"] = codec.name();
  if (svdq) {
    const PipelineReport r = svdquant_pipeline(x, w, codec, opt);
    j["alpha"] = r.smoothquant_alpha;
    j["rank"] = r.rank;
    j["smoothed"] = r.smoothed;
    j["rtn_error"] = r.rtn_error;
    j["smoothquant_error"] = r.smoothquant_error;
    j["svdquant_error"] = r.svdquant_error;
  } else {
    const Tensor reference = matmul(x, w);
    const double norm = frobenius_norm(reference);
    if (norm == 0) throw Error(ErrorCode::kZeroSignal, "x w is identically zero");
    const AlphaSearchResult s = search_alpha(x, w, codec, opt.alpha_grid);
    j["alpha"] = s.alpha;
    j["rtn_error"] = quantized_product_error(x, w, codec, reference) / norm;
    double best = s.objective.front();
    for (double v : s.objective) best = std::min(best, v);
    j["smoothquant_error"] = best / norm;
    nlohmann::ordered_json grid = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < opt.alpha_grid.size(); ++i) {
      grid.push_back({{"alpha", opt.alpha_grid[i]}, {"error", s.objective[i] / norm}});
    }
    j["grid"] = std::move(grid);
  }
  write_text(a.output, j.dump(2) + "\n");
}

void add_layer_options(CLI::App* cmd, PtqArgs& a) {
  auto* x = cmd->add_option("--x", a.x, "activation TensorFile [tokens, in]");
  auto* sx = cmd->add_option("--synth-x", a.synth_x, "synthetic activation spec");
  auto* w = cmd->add_option("--w", a.w, "weight TensorFile [in, out]");
  auto* sw = cmd->add_option("--synth-w", a.synth_w, "synthetic weight spec");
  x->excludes(sx);
  w->excludes(sw);
  cmd->add_option("--seed", a.seed, "seed for synthetic tensors (weight uses seed + 1)");
  cmd->add_option("--format", a.format, "format selector")->required();
  auto* alpha = cmd->add_option("--alpha", a.alpha, "fixed migration strength")
                    ->check(CLI::Range(0.0, 1.0));
  auto* grid = cmd->add_option("--grid", a.grid, "alpha grid (default 0.1..0.9)")
                   ->delimiter(',');
  alpha->excludes(grid);
  cmd->add_option("-o,--output", a.output, "JSON output path (default stdout)");
}

int run(int argc, char** argv) {
  CLI::App app{"lofiq: low-precision format quantization toolkit"};
  app.footer(kSelectorHelp);
  app.require_subcommand(1);

  EnumerateArgs ea;
  auto* en = app.add_subcommand("enumerate", "list every representable value of a format");
  en->add_option("format", ea.format, "e2m1 e3m2 e2m3 e4m3 e5m2 e8m0 e6m2u hif8")->required();
  en->add_option("--interval", ea.interval, "count values in [lo, hi]")->expected(2);
  en->add_option("-o,--output", ea.output, "output path (default stdout)");

  QuantizeArgs qa;
  auto* qu = app.add_subcommand("quantize", "fake-quantize every tensor in a TensorFile");
  qu->add_option("-i,--input", qa.input, "input TensorFile")->required();
  qu->add_option("-f,--format", qa.format, "format selector")->required();
  qu->add_option("-o,--output", qa.output, "output TensorFile")->required();
  qu->add_option("--axis", qa.axis, "quantization axis (default last)");
  qu->add_option("--role", qa.role, "weight | activation | kv");
  qu->add_flag("--pad", qa.pad, "zero-pad the axis to a block multiple");
  qu->add_option("--report", qa.report, "report path (default <output>.report.<ext>)");
  qu->add_option("--report-format", qa.report_format, "json | csv");
  qu->add_option("--dtype", qa.dtype, "output element type: f32 | f64");

  CompareArgs ca;
  auto* co = app.add_subcommand("compare", "report SQNR of several formats on one tensor");
  auto* in = co->add_option("-i,--input", ca.input, "input TensorFile");
  auto* sy = co->add_option("--synth", ca.synth, "kind:DxD:sigma[:fraction:scale]");
  in->excludes(sy);
  co->add_option("--formats", ca.formats, "comma-separated format selectors")->required();
  co->add_option("--role", ca.role, "weight | activation | kv");
  co->add_option("--seed", ca.seed, "seed for --synth");
  co->add_option("--axis", ca.axis, "quantization axis for every format");
  co->add_option("-o,--output", ca.output, "report path (default stdout)");
  co->add_option("--report-format", ca.report_format, "json | csv");

  PtqArgs sa;
  auto* sm = app.add_subcommand("smooth", "SmoothQuant alpha search for Y = X W");
  add_layer_options(sm, sa);

  PtqArgs va;
  auto* sv = app.add_subcommand("svdq", "RTN vs SmoothQuant vs SVDQuant errors for Y = X W");
  add_layer_options(sv, va);
  sv->add_option("--rank", va.rank, "low-rank branch rank")->check(CLI::PositiveNumber);
  sv->add_flag("--no-smooth", va.no_smooth, "split the raw weight");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*en) run_enumerate(ea);
    if (*qu) run_quantize(qa);
    if (*co) {
      if (ca.input.empty() == ca.synth.empty()) throw UsageError("give one of --input, --synth");
      run_compare(ca);
    }
    for (auto [cmd, args, svdq] : {std::tuple{sm, &sa, false}, std::tuple{sv, &va, true}}) {
      if (!*cmd) continue;
      if (args->x.empty() == args->synth_x.empty()) throw UsageError("give one of --x, --synth-x");
      if (args->w.empty() == args->synth_w.empty()) throw UsageError("give one of --w, --synth-w");
      run_ptq(*args, svdq);
    }
  } catch (const UsageError& e) {
    std::cerr << "lofiq: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "lofiq: " << e.what() << "\n";
    return e.code() == ErrorCode::kUnknownFormat ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "lofiq: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
