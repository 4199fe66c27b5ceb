// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/quant_int.hpp"

#include <algorithm>
#include <cmath>

#include "lofiq/error.hpp"
#include "lofiq/parallel.hpp"

namespace lofiq {
namespace {

void check_bits(int bits) {
  if (bits != 4 && bits != 8) {
    throw Error(ErrorCode::kInvalidArgument, "integer bit width must be 4 or 8, got " +
                                                 std::to_string(bits));
  }
}

std::int32_t clamp_code(double v, std::int32_t lo, std::int32_t hi) {
  return static_cast<std::int32_t>(std::clamp(v, static_cast<double>(lo), static_cast<double>(hi)));
}

}  // namespace

double round_half_away(double v) {
  const double r = std::floor(std::fabs(v) + 0.5);
  return v < 0 ? -r : r;
}

std::int32_t IntQuantized::code_min() const {
  return mode == IntMode::kSymmetric ? -((1 << (bits - 1)) - 1) : 0;
}

std::int32_t IntQuantized::code_max() const {
  return mode == IntMode::kSymmetric ? (1 << (bits - 1)) - 1 : (1 << bits) - 1;
}

IntQuantized int_quantize_symmetric(const Tensor& t, std::size_t axis, int bits) {
  check_bits(bits);
  const BlockView lanes = lane_view(t, axis);
  IntQuantized q;
  q.shape = t.shape();
  q.name = t.name();
  q.axis = axis;
  q.bits = bits;
  q.mode = IntMode::kSymmetric;
  q.codes.assign(t.size(), 0);
  q.scales.assign(lanes.total_blocks(), 1.0);

  const std::int32_t qmax = q.code_max();
  const auto data = t.data();
  const std::size_t n = lanes.block_size();
  const std::size_t stride = lanes.stride();
  parallel_for(lanes.total_blocks(), 256, [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      const std::size_t base = lanes.base(g);
      double amax = 0;
      for (std::size_t j = 0; j < n; ++j) amax = std::max(amax, std::fabs(data[base + j * stride]));
      if (amax == 0) continue;  // scale 1, codes 0
      q.scales[g] = amax / qmax;
      // x * qmax / amax rather than x / scale: keeps grid points exact.
      const double ratio = qmax / amax;
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t idx = base + j * stride;
        q.codes[idx] = clamp_code(round_half_away(data[idx] * ratio), -qmax, qmax);
      }
    }
  });
  return q;
}

IntQuantized int_quantize_asymmetric(const Tensor& t, std::size_t axis, int bits) {
  check_bits(bits);
  const BlockView lanes = lane_view(t, axis);
  IntQuantized q;
  q.shape = t.shape();
  q.name = t.name();
  q.axis = axis;
  q.bits = bits;
  q.mode = IntMode::kAsymmetric;
  q.codes.assign(t.size(), 0);
  q.scales.assign(lanes.total_blocks(), 1.0);
  q.zero_points.assign(lanes.total_blocks(), 0);

  const std::int32_t levels = q.code_max();
  const auto data = t.data();
  const std::size_t n = lanes.block_size();
  const std::size_t stride = lanes.stride();
  parallel_for(lanes.total_blocks(), 256, [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      const std::size_t base = lanes.base(g);
      double lo = data[base];
      double hi = lo;
      for (std::size_t j = 1; j < n; ++j) {
        const double v = data[base + j * stride];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (lo == hi) {
        // Constant lane: scale |c| with code - zero_point = sign(c).
        if (lo != 0) {
          q.scales[g] = std::fabs(lo);
          q.zero_points[g] = lo < 0 ? 1 : 0;
          const std::int32_t code = lo < 0 ? 0 : 1;
          for (std::size_t j = 0; j < n; ++j) q.codes[base + j * stride] = code;
        }
        continue;
      }
      // The range always covers zero so that the zero point is on the grid.
      lo = std::min(lo, 0.0);
      hi = std::max(hi, 0.0);
      const double range = hi - lo;
      q.scales[g] = range / levels;
      const double ratio = levels / range;
      const std::int32_t zp = clamp_code(round_half_away(-lo * ratio), 0, levels);
      q.zero_points[g] = zp;
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t idx = base + j * stride;
        q.codes[idx] = clamp_code(round_half_away(data[idx] * ratio) + zp, 0, levels);
      }
    }
  });
  return q;
}

Tensor int_dequantize(const IntQuantized& q) {
  const BlockView lanes(q.shape, q.axis, q.shape.at(q.axis));
  std::vector<double> out(q.codes.size());
  const std::size_t n = lanes.block_size();
  const std::size_t stride = lanes.stride();
  const bool asym = q.mode == IntMode::kAsymmetric;
  for (std::size_t g = 0; g < lanes.total_blocks(); ++g) {
    const std::size_t base = lanes.base(g);
    const double scale = q.scales[g];
    const std::int32_t zp = asym ? q.zero_points[g] : 0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t idx = base + j * stride;
      out[idx] = scale * static_cast<double>(q.codes[idx] - zp);
    }
  }
  return Tensor(q.shape, std::move(out), q.name);
}

}  // namespace lofiq
