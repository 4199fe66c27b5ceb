// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>

#include "json.hpp"

#include "lofiq/error.hpp"
#include "lofiq/parallel.hpp"

namespace lofiq {
namespace {

void require_same_length(std::span<const double> x, std::span<const double> x_hat) {
  if (x.size() != x_hat.size()) {
    throw Error(ErrorCode::kShapeMismatch, "reconstruction has " + std::to_string(x_hat.size()) +
                                               " elements, original " + std::to_string(x.size()));
  }
}

std::string shortest(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double round_db(double db) { return std::round(db * 1e4) / 1e4; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double synth_number(const std::string& v, std::string_view text) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorCode::kInvalidArgument,
              "synthetic spec '" + std::string(text) + "': bad number '" + v + "'");
}

}  // namespace

double sqnr(std::span<const double> x, std::span<const double> x_hat) {
  require_same_length(x, x_hat);
  double signal = 0, noise = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x_hat[i];
    signal += x[i] * x[i];
    noise += d * d;
  }
  if (noise == 0) return std::numeric_limits<double>::infinity();
  if (signal == 0) throw Error(ErrorCode::kZeroSignal, "SQNR of an all-zero signal");
  return 10.0 * std::log10(signal / noise);
}

double sqnr(const Tensor& x, const Tensor& x_hat) {
  if (x.shape() != x_hat.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "shapes " + shape_to_string(x.shape()) + " and " +
                                               shape_to_string(x_hat.shape()) + " differ");
  }
  return sqnr(x.data(), x_hat.data());
}

ErrorStats error_stats(std::span<const double> x, std::span<const double> x_hat) {
  require_same_length(x, x_hat);
  ErrorStats s;
  s.sqnr_db = sqnr(x, x_hat);
  double signal = 0, noise = 0, sum_abs = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x_hat[i];
    signal += x[i] * x[i];
    noise += d * d;
    sum_abs += std::abs(d);
    s.max_abs_err = std::max(s.max_abs_err, std::abs(d));
  }
  s.mean_abs_err = x.empty() ? 0.0 : sum_abs / static_cast<double>(x.size());
  s.rel_fro_err = noise == 0 ? 0.0 : std::sqrt(noise / signal);
  return s;
}

FidelityReport make_report(const Tensor& original, const Tensor& reconstructed,
                           const Codec& codec, Role role, std::size_t axis) {
  if (original.shape() != reconstructed.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "reconstruction shape differs from the original");
  }
  const ErrorStats s = error_stats(original.data(), reconstructed.data());
  FidelityReport r;
  r.tensor_name = original.name();
  r.format_name = codec.name();
  r.granularity = codec.granularity(role);
  r.axis = axis;
  r.sqnr_db = s.sqnr_db;
  r.max_abs_err = s.max_abs_err;
  r.mean_abs_err = s.mean_abs_err;
  r.rel_fro_err = s.rel_fro_err;
  r.config = codec.config(role);
  return r;
}

std::vector<FidelityReport> compare_formats(const Tensor& t, std::span<const Codec> formats,
                                            Role role, std::optional<std::size_t> axis) {
  std::vector<FidelityReport> reports(formats.size());
  std::vector<std::exception_ptr> failures(formats.size());
  parallel_for(formats.size(), 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        const Codec& c = formats[i];
        const std::size_t a = axis.value_or(c.resolve_axis(t));
        reports[i] = make_report(t, c.fake_quantize(t, a, role), c, role, a);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  });
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return reports;
}

SyntheticSpec parse_synth(std::string_view text, std::uint64_t seed) {
  const auto parts = split(text, ':');
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorCode::kInvalidArgument, "synthetic spec '" + std::string(text) + "': " + why);
  };
  if (parts.size() != 3 && parts.size() != 5) {
    throw fail("expected kind:DxD:sigma[:fraction:scale]");
  }
  SyntheticSpec spec;
  spec.seed = seed;
  if (parts[0] == "gaussian") {
    spec.kind = SynthKind::kGaussian;
  } else if (parts[0] == "gaussian_outlier") {
    spec.kind = SynthKind::kGaussianOutlier;
  } else if (parts[0] == "uniform") {
    spec.kind = SynthKind::kUniform;
  } else {
    throw fail("unknown kind '" + parts[0] + "'");
  }
  for (const auto& dim : split(parts[1], 'x')) {
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(dim.data(), dim.data() + dim.size(), n);
    if (ec != std::errc() || ptr != dim.data() + dim.size() || n == 0)
      throw fail("bad extent '" + dim + "'");
    spec.shape.push_back(n);
  }
  spec.sigma = synth_number(parts[2], text);
  if (!(spec.sigma > 0)) throw fail("sigma must be positive");
  if (parts.size() == 5) {
    spec.outlier_fraction = synth_number(parts[3], text);
    spec.outlier_scale = synth_number(parts[4], text);
    if (spec.outlier_fraction < 0 || spec.outlier_fraction > 1)
      throw fail("outlier fraction must lie in [0, 1]");
  } else if (spec.kind == SynthKind::kGaussianOutlier) {
    throw fail("gaussian_outlier needs fraction and scale");
  }
  return spec;
}

std::size_t outlier_count(const SyntheticSpec& spec) {
  if (spec.kind != SynthKind::kGaussianOutlier) return 0;
  const double n = static_cast<double>(shape_size(spec.shape));
  // Snap away representation noise such as 0.001 * 1e6 = 1000.0000000000001.
  const double raw = spec.outlier_fraction * n;
  const double near = std::round(raw);
  const double count = std::abs(raw - near) <= 1e-9 * std::max(1.0, near) ? near : std::ceil(raw);
  return static_cast<std::size_t>(std::min(count, n));
}

Tensor synth(const SyntheticSpec& spec) {
  const std::size_t n = shape_size(spec.shape);
  std::mt19937_64 rng(spec.seed);
  std::vector<double> data(n);
  if (spec.kind == SynthKind::kUniform) {
    std::uniform_real_distribution<double> dist(0.0, spec.sigma);
    for (auto& v : data) v = dist(rng);
  } else {
    std::normal_distribution<double> dist(0.0, spec.sigma);
    for (auto& v : data) v = dist(rng);
  }
  const std::size_t outliers = outlier_count(spec);
  if (outliers > 0) {
    // Partial Fisher-Yates: the first `outliers` slots become distinct indices.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < outliers; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
      data[idx[i]] *= spec.outlier_scale;
    }
  }
  return Tensor(spec.shape, std::move(data), "synthetic");
}

std::string format_db(double db) {
  if (std::isinf(db)) return db > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), db, std::chars_format::fixed, 4);
  return std::string(buf, ptr);
}

std::string render_reports(std::span<const FidelityReport> reports, ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : reports) {
      std::string config;
      for (const auto& [k, v] : r.config) {
        if (!config.empty()) config += ';';
        config += k + "=" + shortest(v);
      }
      out += csv_field(r.tensor_name) + ',' + csv_field(r.format_name) + ',' + r.granularity +
             ',' + std::to_string(r.axis) + ',' + format_db(r.sqnr_db) + ',' +
             shortest(r.max_abs_err) + ',' + shortest(r.mean_abs_err) + ',' +
             shortest(r.rel_fro_err) + ',' + csv_field(config) + '\n';
    }
    return out;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["tensor"] = r.tensor_name;
    j["format"] = r.format_name;
    j["granularity"] = r.granularity;
    j["axis"] = r.axis;
    if (std::isinf(r.sqnr_db)) {
      j["sqnr_db"] = "inf";
    } else {
      j["sqnr_db"] = round_db(r.sqnr_db);
    }
    j["max_abs_err"] = r.max_abs_err;
    j["mean_abs_err"] = r.mean_abs_err;
    j["rel_fro_err"] = r.rel_fro_err;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.config) cfg[k] = v;
    j["config"] = std::move(cfg);
    arr.push_back(std::move(j));
  }
  return arr.empty() ? std::string("[]\n") : arr.dump(2) + "\n";
}

void emit_report(std::span<const FidelityReport> reports, ReportFormat format,
                 const std::filesystem::path& path) {
  const std::string text = render_reports(reports, format);
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "write to '" + path.string() + "' failed");
}

}  // namespace lofiq
