// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/quant_hif8.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "lofiq/error.hpp"
#include "lofiq/parallel.hpp"

namespace lofiq {
namespace {

constexpr int kMaxExponent = 15;

Hif8Value saturated(int sign) { return {sign, kMaxExponent, 1, 2}; }

}  // namespace

double Hif8Value::value() const {
  if (mantissa_code == 0) return 0.0;
  return sign * std::ldexp(static_cast<double>(mantissa_code), exponent - mantissa_bits);
}

int hif8_mantissa_bits(int exponent) {
  const int m = std::abs(exponent);
  if (m <= 3) return 3;
  if (m <= 7) return 2;
  if (m <= 15) return 1;
  return 0;
}

Hif8Value hif8_encode(double x, double eps) {
  const int sign = x < 0 ? -1 : 1;
  const double a = std::fabs(x);
  if (a == 0) {
    // The only use of eps: floor(log2(0 + eps)) lies far below the subnormal
    // range, so zero encodes as zero.
    const int e = eps > 0 ? std::ilogb(eps) : kHif8MinSubnormalExponent - 1;
    return {1, std::min(e, kHif8MinSubnormalExponent), 0, 0};
  }
  const int e = std::ilogb(a);
  if (e < kHif8MinSubnormalExponent) {
    // Round on the 2^-22 grid: 0 or the smallest subnormal.
    const auto code = static_cast<std::int64_t>(
        std::floor(std::ldexp(a, -kHif8MinSubnormalExponent) + 0.5));
    return {sign, kHif8MinSubnormalExponent, 0, code};
  }
  if (e > kMaxExponent) return saturated(sign);
  const int n_m = hif8_mantissa_bits(e);
  const auto code = static_cast<std::int64_t>(std::floor(std::ldexp(a, n_m - e) + 0.5));
  Hif8Value v{sign, e, n_m, code};
  if (std::fabs(v.value()) > kHif8MaxValue) return saturated(sign);
  return v;
}

double hif8_quantize_value(double x, double eps) { return hif8_encode(x, eps).value(); }

Codebook hif8_enumerate() {
  std::vector<double> positive;
  for (int e = kHif8MinSubnormalExponent; e < kHif8MinNormalExponent; ++e) {
    positive.push_back(std::ldexp(1.0, e));
  }
  for (int e = kHif8MinNormalExponent; e <= kMaxExponent; ++e) {
    const int n_m = hif8_mantissa_bits(e);
    for (int code = 1 << n_m; code < (2 << n_m); ++code) {
      const double v = std::ldexp(static_cast<double>(code), e - n_m);
      if (v <= kHif8MaxValue) positive.push_back(v);
    }
  }
  std::vector<double> values;
  values.reserve(2 * positive.size() + 1);
  for (auto it = positive.rbegin(); it != positive.rend(); ++it) values.push_back(-*it);
  values.push_back(0.0);
  values.insert(values.end(), positive.begin(), positive.end());
  return Codebook("HiF8", std::move(values), std::ldexp(1.0, kHif8MinNormalExponent));
}

const Codebook& hif8_codebook() {
  static const Codebook cb = hif8_enumerate();
  return cb;
}

Tensor hif8_quantize(const Tensor& t, double eps) {
  const auto data = t.data();
  std::vector<double> out(t.size());
  parallel_for(out.size(), 1 << 16, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = hif8_quantize_value(data[i], eps);
  });
  return Tensor(t.shape(), std::move(out), t.name());
}

ScaledHif8Quantized hif8_scaled_quantize(const Tensor& t, std::size_t axis, double k,
                                         double eps) {
  if (!(k > 0)) throw Error(ErrorCode::kInvalidArgument, "K must be positive");
  if (!(eps > 0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  const BlockView lanes = lane_view(t, axis);
  ScaledHif8Quantized q;
  q.shape = t.shape();
  q.name = t.name();
  q.axis = axis;
  q.k = k;
  q.eps = eps;
  q.scales.assign(lanes.total_blocks(), 0.0);
  q.values.assign(t.size(), 0.0);

  const auto data = t.data();
  const std::size_t n = lanes.block_size();
  const std::size_t stride = lanes.stride();
  parallel_for(lanes.total_blocks(), 64, [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      const std::size_t base = lanes.base(g);
      double amax = 0;
      for (std::size_t j = 0; j < n; ++j) amax = std::max(amax, std::fabs(data[base + j * stride]));
      const double s = k / (amax + eps);
      q.scales[g] = s;
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t idx = base + j * stride;
        q.values[idx] = hif8_quantize_value(s * data[idx]);
      }
    }
  });
  return q;
}

Tensor hif8_scaled_dequantize(const ScaledHif8Quantized& q) {
  const BlockView lanes(q.shape, q.axis, q.shape.at(q.axis));
  std::vector<double> out(q.values.size());
  const std::size_t n = lanes.block_size();
  const std::size_t stride = lanes.stride();
  for (std::size_t g = 0; g < lanes.total_blocks(); ++g) {
    const std::size_t base = lanes.base(g);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t idx = base + j * stride;
      out[idx] = q.values[idx] / q.scales[g];
    }
  }
  return Tensor(q.shape, std::move(out), q.name);
}

}  // namespace lofiq
