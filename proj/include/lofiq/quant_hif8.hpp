// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lofiq/codebook.hpp"
#include "lofiq/tensor.hpp"

namespace lofiq {

inline constexpr double kHif8DefaultEps = 0x1p-45;
inline constexpr double kHif8MaxValue = 0x1p15;
inline constexpr int kHif8MinNormalExponent = -15;
inline constexpr int kHif8MinSubnormalExponent = -22;

inline constexpr double kHif8ScaledDefaultEps = 1e-12;
inline constexpr double kHif8KWeight = 16.0;
inline constexpr double kHif8KActivation = 4.0;
inline constexpr double kHif8KKv = 1.0;

/// Decoded HiF8 value: sign * mantissa_code * 2^(exponent - mantissa_bits).
///
/// mantissa_code lies in [2^n, 2^(n+1)] for nonzero values, where n is
/// mantissa_bits; the upper end is the carry into the next binade.
struct Hif8Value {
  int sign = 1;
  int exponent = 0;
  int mantissa_bits = 3;
  std::int64_t mantissa_code = 0;

  double value() const;
};

/// Mantissa width for a binary exponent: 3 for |e| <= 3, 2 up to 7, 1 up to
/// 15, 0 beyond.
int hif8_mantissa_bits(int exponent);

/// Adaptive HiF8 rounding of one value.
///
/// e = floor(log2|x|) by exponent extraction, step 2^(e - n_m), code
/// floor(|x| / step + 0.5). Magnitudes above 2^15 saturate, magnitudes below
/// 2^-22 round on the 2^-22 grid (to 0 or 2^-22). `eps` only defines the
/// exponent of an exact zero, which always maps to 0.
Hif8Value hif8_encode(double x, double eps = kHif8DefaultEps);

double hif8_quantize_value(double x, double eps = kHif8DefaultEps);

/// All finite HiF8 values: normals with exponents in [-15, 15] (only 2^15 in
/// the top binade) and subnormals 2^-22 ... 2^-16, plus zero.
const Codebook& hif8_codebook();
Codebook hif8_enumerate();

Tensor hif8_quantize(const Tensor& t, double eps = kHif8DefaultEps);

struct ScaledHif8Quantized {
  Shape shape;
  std::string name;
  std::size_t axis = 0;
  double k = kHif8KWeight;
  double eps = kHif8ScaledDefaultEps;
  std::vector<double> scales;  // s = K / (max|x| + eps), one per lane
  std::vector<double> values;  // HiF8 values of s * x, tensor order
};

ScaledHif8Quantized hif8_scaled_quantize(const Tensor& t, std::size_t axis, double k,
                                         double eps = kHif8ScaledDefaultEps);
Tensor hif8_scaled_dequantize(const ScaledHif8Quantized& q);

}  // namespace lofiq
