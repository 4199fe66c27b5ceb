// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lofiq/tensor.hpp"

namespace lofiq {

enum class IntMode { kSymmetric, kAsymmetric };

/// Integer grid codes with one scale (and zero point) per lane along `axis`.
///
/// Per-channel quantization of a [out, in] weight and per-token quantization
/// of a [tokens, hidden] activation both use axis = 1: every lane runs along
/// the reduced dimension.
struct IntQuantized {
  Shape shape;
  std::string name;
  std::size_t axis = 0;
  int bits = 8;
  IntMode mode = IntMode::kSymmetric;
  std::vector<std::int32_t> codes;
  std::vector<double> scales;
  std::vector<std::int32_t> zero_points;  // asymmetric only

  std::int32_t code_min() const;
  std::int32_t code_max() const;
};

/// scale = max|x| / (2^(bits-1) - 1), codes in +-(2^(bits-1) - 1), rounding
/// half away from zero. An all-zero lane gets scale 1.
IntQuantized int_quantize_symmetric(const Tensor& t, std::size_t axis, int bits);

/// scale = (max - min) / (2^bits - 1), zero point round(-min / scale), codes
/// in [0, 2^bits - 1]. A constant lane is reconstructed exactly.
IntQuantized int_quantize_asymmetric(const Tensor& t, std::size_t axis, int bits);

Tensor int_dequantize(const IntQuantized& q);

/// floor(|v| + 0.5) with the sign of v.
double round_half_away(double v);

}  // namespace lofiq
