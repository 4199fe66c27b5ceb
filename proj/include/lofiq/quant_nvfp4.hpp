// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lofiq/tensor.hpp"

namespace lofiq {

inline constexpr std::size_t kNvfp4BlockSize = 16;
inline constexpr double kNvfp4ElementMax = 6.0;                  // E2M1
inline constexpr double kNvfp4ScaleMax = 448.0;                  // E4M3
inline constexpr double kNvfp4VMax = kNvfp4ScaleMax * kNvfp4ElementMax;  // 2688

struct Nvfp4Quantized {
  Shape shape;
  std::string name;
  std::size_t axis = 0;
  double per_tensor_scale = 1.0;     // s2, kept at full precision
  std::vector<double> block_scales;  // s1 per 16-block; 0 marks a zero block
  std::vector<double> codes;         // E2M1 members, tensor order
};

/// Per-tensor scale for a tensor whose largest magnitude is max_abs.
///
/// max_abs / 2688, nudged up by the minimum number of ulps so that
/// max_abs / s2 never exceeds 2688 after rounding. Zero tensors get 1.
double nvfp4_tensor_scale(double max_abs);

Nvfp4Quantized nvfp4_quantize(const Tensor& t, std::size_t axis);
Tensor nvfp4_dequantize(const Nvfp4Quantized& q);

}  // namespace lofiq
