// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/quant_mx.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "lofiq/error.hpp"
#include "lofiq/parallel.hpp"

namespace lofiq {

FpFormatSpec mxint8_spec() {
  // No exponent field: every code is "subnormal", m * 2^(1 - 0 - 6) = m / 64.
  return {"INT8", 0, 7, true, 0, false, 0, true};
}

FpFormatSpec mx_element_spec(std::string_view element) {
  std::string key(element);
  for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (key == "int8") return mxint8_spec();
  if (key == "e4m3" || key == "e5m2" || key == "e3m2" || key == "e2m3" || key == "e2m1") {
    return builtin_spec(key);
  }
  throw Error(ErrorCode::kUnknownFormat, "unknown MX element type '" + std::string(element) + "'");
}

int mx_shared_exponent(double max_abs, double q_max) {
  if (!(max_abs > 0)) return kE8M0MinExponent;
  int e = std::ilogb(max_abs) - std::ilogb(q_max);
  if (e < kE8M0MinExponent - 2) return kE8M0MinExponent;
  if (e > kE8M0MaxExponent + 2) return kE8M0MaxExponent;
  // q_max * 2^e is exact, so these comparisons decide ceil(log2(max/q_max))
  // without rounding.
  while (std::ldexp(q_max, e) < max_abs) ++e;
  while (std::ldexp(q_max, e - 1) >= max_abs) --e;
  return std::clamp(e, kE8M0MinExponent, kE8M0MaxExponent);
}

MxQuantized mx_quantize(const Tensor& t, std::size_t axis, const FpFormatSpec& element,
                        std::size_t block_size) {
  const BlockView blocks = block_view(t, axis, block_size);
  const Codebook cb = enumerate(element);
  const double q_max = cb.max_finite();

  MxQuantized q;
  q.shape = t.shape();
  q.name = t.name();
  q.element_spec = element;
  q.block_size = block_size;
  q.axis = axis;
  q.shared_exponents.assign(blocks.total_blocks(), kE8M0MinExponent);
  q.codes.assign(t.size(), 0.0);

  const auto data = t.data();
  const std::size_t stride = blocks.stride();
  parallel_for(blocks.total_blocks(), 1024, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      const std::size_t base = blocks.base(b);
      double amax = 0;
      for (std::size_t j = 0; j < block_size; ++j) {
        amax = std::max(amax, std::fabs(data[base + j * stride]));
      }
      const int e = mx_shared_exponent(amax, q_max);
      q.shared_exponents[b] = e;
      if (amax == 0) continue;
      const double inv_scale = std::ldexp(1.0, -e);
      for (std::size_t j = 0; j < block_size; ++j) {
        const std::size_t idx = base + j * stride;
        const double v = std::clamp(data[idx] * inv_scale, -q_max, q_max);
        q.codes[idx] = cb.project(v);
      }
    }
  });
  return q;
}

Tensor mx_dequantize(const MxQuantized& q) {
  const BlockView blocks(q.shape, q.axis, q.block_size);
  std::vector<double> out(q.codes.size());
  const std::size_t stride = blocks.stride();
  for (std::size_t b = 0; b < blocks.total_blocks(); ++b) {
    const std::size_t base = blocks.base(b);
    const int e = q.shared_exponents[b];
    for (std::size_t j = 0; j < q.block_size; ++j) {
      const std::size_t idx = base + j * stride;
      out[idx] = std::ldexp(q.codes[idx], e);
    }
  }
  return Tensor(q.shape, std::move(out), q.name);
}

}  // namespace lofiq
