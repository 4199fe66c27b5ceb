// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lofiq/codebook.hpp"
#include "lofiq/quant_hif4.hpp"
#include "lofiq/quant_int.hpp"
#include "lofiq/tensor.hpp"

namespace lofiq {

/// What a tensor is; decides default grouping for codecs that have a choice.
enum class Role { kWeight, kActivation, kKv };

Role parse_role(std::string_view s);
const char* to_string(Role role);
/// "per-channel" for weights, "per-token" for activations and KV states.
const char* role_granularity(Role role);

enum class CodecFamily { kInt, kCast, kMx, kNvfp4, kHif8, kHif8Scaled, kHif4 };

using ConfigEcho = std::vector<std::pair<std::string, double>>;

/// A quantize-dequantize round trip selected by a string.
///
/// Grammar: family[:param]... with params written key=value or as bare flags.
///
///   int8, int4           sym | asym (default: sym for weights, asym otherwise)
///   e4m3 e5m2 e3m2 e2m3 e2m1
///                        direct round-to-nearest cast, no scaling
///   mxfp8-e4m3 mxfp8-e5m2 mxfp6-e3m2 mxfp6-e2m3 mxfp4 mxint8
///   mx:<element>         k=<block size> (default 32)
///   nvfp4
///   hif8                 eps=<v>
///   hif8-scaled          K=<v> (default 16 weight, 4 activation, 1 kv), eps=<v>
///   hif4                 threshold=literal|half
///
/// Every family accepts axis=<n> to override the quantization axis.
class Codec {
 public:
  static Codec parse(std::string_view selector);

  const std::string& name() const noexcept { return name_; }
  CodecFamily family() const noexcept { return family_; }

  /// Axis extent must be a multiple of this (1 when there is no blocking).
  std::size_t block_size() const noexcept;
  std::optional<std::size_t> axis_override() const noexcept { return axis_; }
  /// Axis used when the caller passes none: the override or the last axis.
  std::size_t resolve_axis(const Tensor& t) const;

  Tensor fake_quantize(const Tensor& t, std::size_t axis, Role role) const;
  Tensor fake_quantize(const Tensor& t, Role role) const {
    return fake_quantize(t, resolve_axis(t), role);
  }

  std::string granularity(Role role) const;
  ConfigEcho config(Role role) const;

 private:
  std::string name_;
  CodecFamily family_ = CodecFamily::kCast;
  std::string element_;  // cast / mx element
  int bits_ = 8;
  std::optional<IntMode> int_mode_;
  std::size_t k_ = 1;
  std::optional<double> hif8_k_;
  double eps_ = 0;
  Hif4Threshold threshold_ = Hif4Threshold::kLiteral;
  std::optional<std::size_t> axis_;
  std::optional<Codebook> cast_codebook_;
};

std::vector<Codec> parse_codec_list(std::string_view comma_separated);

}  // namespace lofiq
