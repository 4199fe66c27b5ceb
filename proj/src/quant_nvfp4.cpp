// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/quant_nvfp4.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lofiq/codebook.hpp"
#include "lofiq/parallel.hpp"

namespace lofiq {

double nvfp4_tensor_scale(double max_abs) {
  if (!(max_abs > 0)) return 1.0;
  double s2 = max_abs / kNvfp4VMax;
  while (max_abs / s2 > kNvfp4VMax) {
    s2 = std::nextafter(s2, std::numeric_limits<double>::infinity());
  }
  return s2;
}

Nvfp4Quantized nvfp4_quantize(const Tensor& t, std::size_t axis) {
  const BlockView blocks = block_view(t, axis, kNvfp4BlockSize);
  static const Codebook scale_cb = enumerate(builtin_spec("E4M3"));
  static const Codebook element_cb = enumerate(builtin_spec("E2M1"));

  const auto data = t.data();
  double amax = 0;
  for (double v : data) amax = std::max(amax, std::fabs(v));

  Nvfp4Quantized q;
  q.shape = t.shape();
  q.name = t.name();
  q.axis = axis;
  q.per_tensor_scale = nvfp4_tensor_scale(amax);
  q.block_scales.assign(blocks.total_blocks(), 0.0);
  q.codes.assign(t.size(), 0.0);

  const double s2 = q.per_tensor_scale;
  const std::size_t stride = blocks.stride();
  parallel_for(blocks.total_blocks(), 1024, [&](std::size_t begin, std::size_t end) {
    double scaled[kNvfp4BlockSize];
    for (std::size_t b = begin; b < end; ++b) {
      const std::size_t base = blocks.base(b);
      double bmax = 0;
      for (std::size_t j = 0; j < kNvfp4BlockSize; ++j) {
        scaled[j] = data[base + j * stride] / s2;
        bmax = std::max(bmax, std::fabs(scaled[j]));
      }
      const double s1 = scale_cb.project(bmax / kNvfp4ElementMax);
      q.block_scales[b] = s1;
      // s1 == 0: zero block, or a block too small for the E4M3 grid.
      if (s1 == 0) continue;
      for (std::size_t j = 0; j < kNvfp4BlockSize; ++j) {
        const double v = std::clamp(scaled[j] / s1, -kNvfp4ElementMax, kNvfp4ElementMax);
        q.codes[base + j * stride] = element_cb.project(v);
      }
    }
  });
  return q;
}

Tensor nvfp4_dequantize(const Nvfp4Quantized& q) {
  const BlockView blocks(q.shape, q.axis, kNvfp4BlockSize);
  std::vector<double> out(q.codes.size());
  const std::size_t stride = blocks.stride();
  for (std::size_t b = 0; b < blocks.total_blocks(); ++b) {
    const std::size_t base = blocks.base(b);
    const double scale = q.block_scales[b] * q.per_tensor_scale;
    for (std::size_t j = 0; j < kNvfp4BlockSize; ++j) {
      const std::size_t idx = base + j * stride;
      out[idx] = scale * q.codes[idx];
    }
  }
  return Tensor(q.shape, std::move(out), q.name);
}

}  // namespace lofiq
