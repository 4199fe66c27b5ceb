// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lofiq/codec.hpp"
#include "lofiq/tensor.hpp"

namespace lofiq {

/// 10 log10(||x||^2 / ||x - x_hat||^2) in dB; +inf when the reconstruction is
/// exact.
double sqnr(const Tensor& x, const Tensor& x_hat);
double sqnr(std::span<const double> x, std::span<const double> x_hat);

struct ErrorStats {
  double sqnr_db = 0;
  double max_abs_err = 0;
  double mean_abs_err = 0;
  double rel_fro_err = 0;
};

ErrorStats error_stats(std::span<const double> x, std::span<const double> x_hat);

struct FidelityReport {
  std::string tensor_name;
  std::string format_name;
  std::string granularity;
  std::size_t axis = 0;
  double sqnr_db = 0;
  double max_abs_err = 0;
  double mean_abs_err = 0;
  double rel_fro_err = 0;
  ConfigEcho config;
};

FidelityReport make_report(const Tensor& original, const Tensor& reconstructed,
                           const Codec& codec, Role role, std::size_t axis);

/// One report per codec, in input order, all on the same tensor.
std::vector<FidelityReport> compare_formats(const Tensor& t, std::span<const Codec> formats,
                                            Role role,
                                            std::optional<std::size_t> axis = std::nullopt);

enum class SynthKind { kGaussian, kGaussianOutlier, kUniform };

/// gaussian: N(0, sigma^2). gaussian_outlier: gaussian with ceil(fraction * N)
/// distinct entries multiplied by outlier_scale. uniform: U[0, sigma).
struct SyntheticSpec {
  SynthKind kind = SynthKind::kGaussian;
  Shape shape;
  double sigma = 1.0;
  double outlier_fraction = 0.0;
  double outlier_scale = 1.0;
  std::uint64_t seed = 0;
};

/// kind:DxDx...:sigma[:fraction:scale], e.g. gaussian:512x512:0.02 or
/// gaussian_outlier:128x128:1:0.001:100.
SyntheticSpec parse_synth(std::string_view text, std::uint64_t seed);
Tensor synth(const SyntheticSpec& spec);
std::size_t outlier_count(const SyntheticSpec& spec);

enum class ReportFormat { kJson, kCsv };

inline constexpr std::string_view kCsvHeader =
    "tensor,format,granularity,axis,sqnr_db,max_abs_err,mean_abs_err,rel_fro_err,config";

std::string render_reports(std::span<const FidelityReport> reports, ReportFormat format);
void emit_report(std::span<const FidelityReport> reports, ReportFormat format,
                 const std::filesystem::path& path);

/// Text used for dB values: 4 decimals, "inf" for the exact-reconstruction
/// sentinel.
std::string format_db(double db);

}  // namespace lofiq
