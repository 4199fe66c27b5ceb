// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lofiq/tensor.hpp"

namespace lofiq {

inline constexpr std::size_t kHif4BlockSize = 64;
inline constexpr std::size_t kHif4SubBlockSize = 8;
inline constexpr std::size_t kHif4MicroBlockSize = 4;
inline constexpr std::size_t kHif4SubBlocks = kHif4BlockSize / kHif4SubBlockSize;      // 8
inline constexpr std::size_t kHif4MicroBlocks = kHif4BlockSize / kHif4MicroBlockSize;  // 16
inline constexpr double kHif4ScaleMin = 0x1p-48;
inline constexpr double kHif4ScaleMax = 1.5 * 0x1p15;
inline constexpr double kHif4ElementMax = 1.75;

/// How the 1-bit sub-block and micro-block exponents are chosen.
///
/// kLiteral: E2 = floor(clip(A2/S1, 0, 4) / 4), E3 = floor(clip(A3/(S1 S2), 0, 2) / 2).
/// kHalfRange: E2 = [A2/S1 >= 2], E3 = [A3/(S1 S2) >= 1], i.e. the bit is set
/// once the local maximum reaches half of the clip range.
enum class Hif4Threshold { kLiteral, kHalfRange };

/// HiF4 fields. Each 64-element block is laid out as 8 sub-blocks x 2
/// micro-blocks x 4 elements, the micro-block being contiguous along the axis.
struct Hif4Quantized {
  Shape shape;
  std::string name;
  std::size_t axis = 0;
  Hif4Threshold threshold = Hif4Threshold::kLiteral;
  std::vector<int> e1;                // per block
  std::vector<int> m1;                // per block, in [4, 7]
  std::vector<std::uint8_t> e2;       // per sub-block, block-major
  std::vector<std::uint8_t> e3;       // per micro-block, block-major
  std::vector<std::int8_t> sign;      // per element, block layout order
  std::vector<std::uint8_t> code;     // X-hat in [0, 7], block layout order
  std::size_t m1_carries = 0;         // blocks where round() produced M1 = 8

  std::size_t block_count() const noexcept { return e1.size(); }
};

Hif4Quantized hif4_quantize(const Tensor& t, std::size_t axis,
                            Hif4Threshold threshold = Hif4Threshold::kLiteral);

/// sign * M1 * 2^(E1 + E2 + E3 - 4) * X-hat, restored to tensor order.
Tensor hif4_dequantize(const Hif4Quantized& q);

/// Element value from its fields by exponent addition.
double hif4_element_value(int sign, int m1, int e1, int e2, int e3, int code);

}  // namespace lofiq
