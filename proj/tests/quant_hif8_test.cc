// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/quant_hif8.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "test_util.hpp"

namespace lofiq {
namespace {

using testing::code_of;

// Positive HiF8 values written out from the width table directly: normals
// (1 + m/2^n) 2^e for |e| <= 15 with n = 3, 2, 1, 0 at |e| <= 3, 7, 15, and
// only 2^15 in the top binade; subnormals 2^-22 .. 2^-16.
std::vector<double> oracle_positive() {
  std::vector<double> v;
  for (int k = -22; k <= -16; ++k) v.push_back(std::ldexp(1.0, k));
  for (int e = -15; e <= 15; ++e) {
    const int a = std::abs(e);
    const int n = a <= 3 ? 3 : a <= 7 ? 2 : 1;
    const int count = e == 15 ? 1 : 1 << n;
    for (int m = 0; m < count; ++m) v.push_back(std::ldexp(1.0 + m / std::ldexp(1.0, n), e));
  }
  std::sort(v.begin(), v.end());
  return v;
}

TEST(Hif8Test, CodebookMatchesOracle) {
  const auto pos = oracle_positive();
  EXPECT_EQ(pos.size(), 126u);
  const Codebook& cb = hif8_codebook();
  ASSERT_EQ(cb.size(), 2 * pos.size() + 1);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    EXPECT_EQ(cb.values()[pos.size() + 1 + i], pos[i]);
    EXPECT_EQ(cb.values()[pos.size() - 1 - i], -pos[i]);
  }
  EXPECT_EQ(density_in_interval(cb, -1, 1), 129u);
}

TEST(Hif8Test, Extremes) {
  const auto ex = hif8_enumerate().extremes();
  EXPECT_EQ(ex.max_normal, 0x1p15);
  EXPECT_EQ(ex.min_normal, 0x1p-15);
  EXPECT_EQ(ex.max_subnormal, 0x1p-16);
  EXPECT_EQ(ex.min_subnormal, 0x1p-22);
  EXPECT_TRUE(hif8_codebook().contains(0.3125));
}

TEST(Hif8Test, MantissaWidthTable) {
  for (int e = -20; e <= 20; ++e) {
    const int a = std::abs(e);
    EXPECT_EQ(hif8_mantissa_bits(e), a <= 3 ? 3 : a <= 7 ? 2 : a <= 15 ? 1 : 0) << e;
  }
}

TEST(Hif8Test, WorkedValues) {
  EXPECT_EQ(hif8_quantize_value(1.0), 1.0);
  EXPECT_EQ(hif8_quantize_value(0.3), 0.3125);
  EXPECT_EQ(hif8_quantize_value(100), 96.0);
  EXPECT_EQ(hif8_quantize_value(0), 0.0);
  const Hif8Value a = hif8_encode(0.3);
  EXPECT_EQ(a.exponent, -2);
  EXPECT_EQ(a.mantissa_bits, 3);
  EXPECT_EQ(a.mantissa_code, 10);
  const Hif8Value b = hif8_encode(100);
  EXPECT_EQ(b.exponent, 6);
  EXPECT_EQ(b.mantissa_bits, 2);
  EXPECT_EQ(b.mantissa_code, 6);
  const Hif8Value one = hif8_encode(1.0);
  EXPECT_EQ(one.mantissa_code, 8);
  const Tensor t = hif8_quantize(Tensor({3}, {1.0, 0.3, 100}));
  EXPECT_EQ(t[0], 1.0);
  EXPECT_EQ(t[1], 0.3125);
  EXPECT_EQ(t[2], 96.0);
}

TEST(Hif8Test, CarrySaturationUnderflow) {
  EXPECT_EQ(hif8_quantize_value(15.9), 16.0);  // binade carry
  EXPECT_EQ(hif8_quantize_value(40000), 0x1p15);
  EXPECT_EQ(hif8_quantize_value(-1e12), -0x1p15);
  EXPECT_EQ(hif8_quantize_value(1.4 * 0x1p15), 0x1p15);
  EXPECT_EQ(hif8_quantize_value(0x1p-23), 0x1p-22);
  EXPECT_EQ(hif8_quantize_value(0x1.fp-24), 0.0);
  EXPECT_EQ(hif8_quantize_value(1e-300), 0.0);
}

TEST(Hif8Test, EpsOnlyDefinesZero) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> lg(-25, 16);
  for (int i = 0; i < 10000; ++i) {
    const double x = std::exp2(lg(rng));
    ASSERT_EQ(hif8_quantize_value(x, 1e-3), hif8_quantize_value(x));
  }
  EXPECT_EQ(hif8_quantize_value(0.0, 1.0), 0.0);
}

TEST(Hif8Test, IdempotentOnMembers) {
  for (double v : hif8_codebook().values()) ASSERT_EQ(hif8_quantize_value(v), v);
}

TEST(Hif8Test, ClosureNearRtnAndOddSymmetry) {
  const Codebook& cb = hif8_codebook();
  const auto vals = cb.values();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> lg(-26, 17);
  std::bernoulli_distribution neg;
  std::size_t off_nearest = 0;
  for (int i = 0; i < 200000; ++i) {
    const double x = (neg(rng) ? -1 : 1) * std::exp2(lg(rng));
    const double q = hif8_quantize_value(x);
    ASSERT_TRUE(cb.contains(q)) << x;
    ASSERT_EQ(hif8_quantize_value(-x), -q);
    const double nearest = cb.project(x);
    const auto iq = std::lower_bound(vals.begin(), vals.end(), q) - vals.begin();
    const auto in = std::lower_bound(vals.begin(), vals.end(), nearest) - vals.begin();
    ASSERT_LE(std::abs(iq - in), 1) << x;
    if (q != nearest) {
      ++off_nearest;
      // Only allowed when the nearest member lies in another binade.
      ASSERT_NE(std::ilogb(x), std::ilogb(nearest)) << x;
    }
  }
  RecordProperty("off_nearest", static_cast<int>(off_nearest));
}

TEST(ScaledHif8Test, HandExample) {
  const Tensor t({1, 3}, {0.1, 0.02, -0.05});
  const auto q = hif8_scaled_quantize(t, 1, 16);
  EXPECT_NEAR(q.scales[0], 160.0, 1e-6);
  EXPECT_EQ(q.values[1], 3.25);
  const Tensor r = hif8_scaled_dequantize(q);
  // scale = 16 / (0.1 + eps), so 0.1 lands just under 16 and rounds onto it.
  EXPECT_EQ(q.values[0], 16.0);
  EXPECT_EQ(q.values[2], -8.0);
  EXPECT_DOUBLE_EQ(r[0], 16 / q.scales[0]);
  EXPECT_NEAR(r[1], 0.0203125, 1e-12);
  EXPECT_DOUBLE_EQ(r[2], -8 / q.scales[0]);
}

TEST(ScaledHif8Test, ZeroLaneAndUnitScale) {
  const auto z = hif8_scaled_quantize(Tensor::zeros({2, 4}), 1, 4);
  EXPECT_DOUBLE_EQ(z.scales[0], 4 / kHif8ScaledDefaultEps);
  const Tensor dq = hif8_scaled_dequantize(z);
  for (double v : dq.data()) EXPECT_EQ(v, 0.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> d(64);
  for (auto& v : d) v = u(rng);
  d[5] = 1.0;
  for (auto& v : d) v = std::clamp(v, -1.0, 1.0);
  const Tensor t({64}, d);
  const Tensor scaled = hif8_scaled_dequantize(hif8_scaled_quantize(t, 0, 1.0));
  const Tensor plain = hif8_quantize(t);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(scaled[i], plain[i], 1e-9);
}

TEST(ScaledHif8Test, RejectsBadParameters) {
  EXPECT_EQ(code_of([] { hif8_scaled_quantize(Tensor({2}, {1, 2}), 0, 0.0); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { hif8_scaled_quantize(Tensor({2}, {1, 2}), 0, 1.0, -1); }),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace lofiq
