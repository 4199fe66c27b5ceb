// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/quant_hif4.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>

#include "lofiq/parallel.hpp"
#include "lofiq/quant_int.hpp"

namespace lofiq {

double hif4_element_value(int sign, int m1, int e1, int e2, int e3, int code) {
  if (code == 0) return 0.0;
  return sign * std::ldexp(static_cast<double>(m1 * code), e1 + e2 + e3 - 4);
}

Hif4Quantized hif4_quantize(const Tensor& t, std::size_t axis, Hif4Threshold threshold) {
  const BlockView blocks = block_view(t, axis, kHif4BlockSize);
  const std::size_t nb = blocks.total_blocks();

  Hif4Quantized q;
  q.shape = t.shape();
  q.name = t.name();
  q.axis = axis;
  q.threshold = threshold;
  q.e1.assign(nb, 0);
  q.m1.assign(nb, 4);
  q.e2.assign(nb * kHif4SubBlocks, 0);
  q.e3.assign(nb * kHif4MicroBlocks, 0);
  q.sign.assign(nb * kHif4BlockSize, 1);
  q.code.assign(nb * kHif4BlockSize, 0);

  const bool literal = threshold == Hif4Threshold::kLiteral;
  const double e2_cut = literal ? 4.0 : 2.0;
  const double e3_cut = literal ? 2.0 : 1.0;

  const auto data = t.data();
  const std::size_t stride = blocks.stride();
  std::atomic<std::size_t> carries{0};
  parallel_for(nb, 512, [&](std::size_t begin, std::size_t end) {
    std::array<double, kHif4BlockSize> x{};
    std::array<double, kHif4MicroBlocks> a3{};
    std::array<double, kHif4SubBlocks> a2{};
    std::size_t local_carries = 0;
    for (std::size_t b = begin; b < end; ++b) {
      const std::size_t base = blocks.base(b);
      for (std::size_t j = 0; j < kHif4BlockSize; ++j) x[j] = data[base + j * stride];

      // Sequential max-abs reductions over the 8 x 2 x 4 reshape.
      for (std::size_t m = 0; m < kHif4MicroBlocks; ++m) {
        double v = 0;
        for (std::size_t k = 0; k < kHif4MicroBlockSize; ++k) {
          v = std::max(v, std::fabs(x[m * kHif4MicroBlockSize + k]));
        }
        a3[m] = v;
      }
      double a1 = 0;
      for (std::size_t i = 0; i < kHif4SubBlocks; ++i) {
        a2[i] = std::max(a3[2 * i], a3[2 * i + 1]);
        a1 = std::max(a1, a2[i]);
      }

      // Block scale on the unsigned E6M2 grid.
      const double a1_tilde = std::clamp(a1 / 7.0, kHif4ScaleMin, kHif4ScaleMax);
      int e1 = std::ilogb(a1_tilde);
      int m1 = static_cast<int>(round_half_away(std::ldexp(a1_tilde, 2 - e1)));
      if (m1 == 8) {
        // Binade carry: 8 * 2^(e1-2) == 4 * 2^(e1+1), same S1.
        m1 = 4;
        ++e1;
        ++local_carries;
      }
      q.e1[b] = e1;
      q.m1[b] = m1;
      const double s1 = std::ldexp(static_cast<double>(m1), e1 - 2);

      for (std::size_t i = 0; i < kHif4SubBlocks; ++i) {
        const double a2_tilde = std::clamp(a2[i] / s1, 0.0, 4.0);
        const int e2 = a2_tilde >= e2_cut ? 1 : 0;
        q.e2[b * kHif4SubBlocks + i] = static_cast<std::uint8_t>(e2);
        const double s12 = std::ldexp(s1, e2);
        for (std::size_t h = 0; h < 2; ++h) {
          const std::size_t m = 2 * i + h;
          const double a3_tilde = std::clamp(a3[m] / s12, 0.0, 2.0);
          const int e3 = a3_tilde >= e3_cut ? 1 : 0;
          q.e3[b * kHif4MicroBlocks + m] = static_cast<std::uint8_t>(e3);
          const double s123 = std::ldexp(s12, e3);
          for (std::size_t k = 0; k < kHif4MicroBlockSize; ++k) {
            const std::size_t j = m * kHif4MicroBlockSize + k;
            const double x_tilde = std::clamp(std::fabs(x[j]) / s123, 0.0, kHif4ElementMax);
            q.code[b * kHif4BlockSize + j] = static_cast<std::uint8_t>(std::floor(x_tilde * 4.0 + 0.5));
            q.sign[b * kHif4BlockSize + j] = x[j] < 0 ? -1 : 1;
          }
        }
      }
    }
    carries += local_carries;
  });
  q.m1_carries = carries.load();
  return q;
}

Tensor hif4_dequantize(const Hif4Quantized& q) {
  const BlockView blocks(q.shape, q.axis, kHif4BlockSize);
  std::vector<double> out(shape_size(q.shape));
  const std::size_t stride = blocks.stride();
  for (std::size_t b = 0; b < blocks.total_blocks(); ++b) {
    const std::size_t base = blocks.base(b);
    for (std::size_t j = 0; j < kHif4BlockSize; ++j) {
      const std::size_t m = j / kHif4MicroBlockSize;
      const std::size_t i = j / kHif4SubBlockSize;
      const std::size_t e = b * kHif4BlockSize + j;
      out[base + j * stride] =
          hif4_element_value(q.sign[e], q.m1[b], q.e1[b], q.e2[b * kHif4SubBlocks + i],
                             q.e3[b * kHif4MicroBlocks + m], q.code[e]);
    }
  }
  return Tensor(q.shape, std::move(out), q.name);
}

}  // namespace lofiq
