// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "lofiq/codebook.hpp"
#include "lofiq/tensor.hpp"

namespace lofiq {

inline constexpr std::size_t kMxDefaultBlockSize = 32;
inline constexpr int kE8M0MinExponent = -127;
inline constexpr int kE8M0MaxExponent = 127;

/// MXINT8 elements: sign-magnitude integers k/64, |k| <= 127.
FpFormatSpec mxint8_spec();

/// Element spec for an MX element selector: e4m3, e5m2, e3m2, e2m3, e2m1,
/// int8.
FpFormatSpec mx_element_spec(std::string_view element);

struct MxQuantized {
  Shape shape;
  std::string name;
  FpFormatSpec element_spec;
  std::size_t block_size = kMxDefaultBlockSize;
  std::size_t axis = 0;
  std::vector<int> shared_exponents;  // one per block, BlockView order
  std::vector<double> codes;          // element codebook members, tensor order
};

/// Smallest integer e with max_abs <= q_max * 2^e, clipped to the E8M0
/// exponent range. A zero block yields the lower bound. Exact: no floating
/// logarithm is involved.
int mx_shared_exponent(double max_abs, double q_max);

MxQuantized mx_quantize(const Tensor& t, std::size_t axis, const FpFormatSpec& element,
                        std::size_t block_size = kMxDefaultBlockSize);
Tensor mx_dequantize(const MxQuantized& q);

}  // namespace lofiq
