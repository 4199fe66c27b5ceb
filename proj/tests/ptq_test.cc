// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/ptq.hpp"
#include "lofiq/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

namespace lofiq {
namespace {

using testing::code_of;

Tensor gaussian(Shape shape, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  std::vector<double> d(shape_size(shape));
  for (auto& v : d) v = n(rng);
  return Tensor(std::move(shape), std::move(d));
}

// Plain triple loop, kept separate from the library matmul.
Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      long double acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += static_cast<long double>(a[i * k + p]) * b[p * n + j];
      out[i * n + j] = static_cast<double>(acc);
    }
  return Tensor({m, n}, std::move(out));
}

double rel_diff(const Tensor& a, const Tensor& b) {
  return frobenius_norm(subtract(a, b)) / frobenius_norm(b);
}

TEST(SmoothScalesTest, HandExamples) {
  const std::vector<double> x{8}, w{2};
  EXPECT_DOUBLE_EQ(smooth_scales(x, w, 0.5).scales[0], 2.0);
  EXPECT_DOUBLE_EQ(smooth_scales(x, w, 1.0).scales[0], 8.0);
  EXPECT_DOUBLE_EQ(smooth_scales(x, w, 0.0).scales[0], 0.5);
}

TEST(SmoothScalesTest, FloorsClampsAndErrors) {
  const std::vector<double> x{0, 1e12}, w{0, 1e-12};
  const auto p = smooth_scales(x, w, 0.5);
  EXPECT_DOUBLE_EQ(p.scales[0], 1.0);  // both maxima floored to 1e-8
  EXPECT_EQ(p.scales[1], kSmoothScaleMax);
  const std::vector<double> short_w{1};
  EXPECT_EQ(code_of([&] { smooth_scales(x, short_w, 0.5); }), ErrorCode::kLengthMismatch);
  EXPECT_EQ(code_of([&] { smooth_scales(x, w, 1.5); }), ErrorCode::kInvalidArgument);
}

TEST(ApplySmoothingTest, IdentityAndUniformPlans) {
  const Tensor x = gaussian({3, 4}, 1), w = gaussian({4, 2}, 2);
  SmoothingPlan ones;
  ones.scales.assign(4, 1.0);
  const auto [x1, w1] = apply_smoothing(x, w, ones);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x1[i], x[i]);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(w1[i], w[i]);
  SmoothingPlan twos;
  twos.scales.assign(4, 2.0);
  const auto [x2, w2] = apply_smoothing(x, w, twos);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x2[i], x[i] / 2);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(w2[i], w[i] * 2);
  const auto [xb, wb] = invert_smoothing(x2, w2, twos);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(xb[i], x[i]);
  SmoothingPlan bad;
  bad.scales.assign(3, 1.0);
  EXPECT_EQ(code_of([&] { apply_smoothing(x, w, bad); }), ErrorCode::kShapeMismatch);
  EXPECT_EQ(code_of([&] { apply_smoothing(x, gaussian({3, 2}, 3), ones); }),
            ErrorCode::kShapeMismatch);
}

TEST(ApplySmoothingTest, ProductPreservedOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Tensor x = gaussian({64, 64}, seed * 2 + 100), w = gaussian({64, 64}, seed * 2 + 101, 0.05);
    const auto plan = plan_smoothing(x, w, 0.1 * (1 + seed % 9));
    for (double s : plan.scales) ASSERT_GT(s, 0);
    const auto [xs, ws] = apply_smoothing(x, w, plan);
    ASSERT_LE(rel_diff(matmul(xs, ws), naive_matmul(x, w)), 1e-12);
    const auto [xb, wb] = invert_smoothing(xs, ws, plan);
    ASSERT_LE(rel_diff(xb, x), 1e-15);
    ASSERT_LE(rel_diff(wb, w), 1e-15);
  }
}

TEST(ApplySmoothingTest, ScaleInvariance) {
  const Tensor x = gaussian({16, 8}, 5), w = gaussian({8, 4}, 6);
  const double c = 7.5, alpha = 0.6;
  std::vector<double> cx(x.data().begin(), x.data().end());
  for (auto& v : cx) v *= c;
  const Tensor xc({16, 8}, cx);
  const auto p = plan_smoothing(x, w, alpha), pc = plan_smoothing(xc, w, alpha);
  for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(pc.scales[j], p.scales[j] * std::pow(c, alpha),
                                                  1e-12 * pc.scales[j]);
  const auto [xs, ws] = apply_smoothing(x, w, p);
  const auto [xcs, wcs] = apply_smoothing(xc, w, pc);
  EXPECT_LE(rel_diff(matmul(xcs, wcs), naive_matmul(xc, w)), 1e-12);
  EXPECT_LE(rel_diff(matmul(xs, ws), naive_matmul(x, w)), 1e-12);
}

TEST(MatmulTest, MatchesNaive) {
  const Tensor a = gaussian({7, 5}, 8), b = gaussian({5, 3}, 9);
  EXPECT_LE(rel_diff(matmul(a, b), naive_matmul(a, b)), 1e-15);
  EXPECT_EQ(code_of([&] { matmul(a, a); }), ErrorCode::kShapeMismatch);
  const Tensor t = transpose(a);
  EXPECT_EQ(t.shape(), (Shape{5, 7}));
  EXPECT_EQ(t[1 * 7 + 2], a[2 * 5 + 1]);
}

// W = I keeps every weight lane a single nonzero, so per-channel INT is lossless
// for any smoothing and only the activation error remains. Every row carries the
// outlier at +-M and the other columns peak at exactly 1, so the expected error
// is proportional to (1 + 1/a)^2 M^2 + (n - 1)(1 + a)^2 with a = M^(1 - alpha),
// which falls as alpha grows.
TEST(SearchAlphaTest, OutlierInstancePicksLargestAlpha) {
  const std::size_t n = 128, rows = 32;
  const double m = 4;
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> xd(rows * n);
  for (auto& v : xd) v = u(rng);
  for (std::size_t j = 1; j < n; ++j) xd[j] = 1;
  for (std::size_t i = 0; i < rows; ++i) xd[i * n] = i % 2 ? -m : m;
  const Tensor x({rows, n}, xd);
  std::vector<double> eye(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) eye[i * n + i] = 1;
  const Tensor w({n, n}, eye);
  const auto grid = default_alpha_grid();
  for (const char* sel : {"int8", "int4"}) {
    const auto r = search_alpha(x, w, Codec::parse(sel), grid);
    EXPECT_DOUBLE_EQ(r.alpha, 0.9) << sel;
    ASSERT_EQ(r.objective.size(), 9u);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_GT(r.objective[i], r.objective[8]) << sel;
  }
  const auto r8 = search_alpha(x, w, Codec::parse("int8"), grid);
  for (std::size_t i = 1; i < 9; ++i) EXPECT_LT(r8.objective[i], r8.objective[i - 1]);
}

TEST(SearchAlphaTest, FlatInstanceTiesToSmallest) {
  // x == w, symmetric, every row and column peaks at exactly 1: s = 1 for all alpha.
  const std::size_t n = 16;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) d[i * n + j] = d[j * n + i] = i == j ? 1.0 : u(rng);
  const Tensor x({n, n}, d);
  const auto r = search_alpha(x, x, Codec::parse("nvfp4"), default_alpha_grid());
  EXPECT_DOUBLE_EQ(r.alpha, 0.1);
  for (double o : r.objective) EXPECT_EQ(o, r.objective[0]);
}

TEST(SearchAlphaTest, GridOptimalAndSinglePoint) {
  const Tensor x = gaussian({32, 64}, 11), w = gaussian({64, 32}, 12, 0.02);
  const Codec codec = Codec::parse("hif4");
  const auto grid = default_alpha_grid();
  const auto r = search_alpha(x, w, codec, grid);
  const Tensor ref = matmul(x, w);
  for (double a : grid) {
    const auto [xs, ws] = apply_smoothing(x, w, plan_smoothing(x, w, a));
    EXPECT_GE(quantized_product_error(xs, ws, codec, ref),
              quantized_product_error(apply_smoothing(x, w, r.plan).first,
                                      apply_smoothing(x, w, r.plan).second, codec, ref));
  }
  const std::vector<double> one{0.35};
  EXPECT_DOUBLE_EQ(search_alpha(x, w, codec, one).alpha, 0.35);
  EXPECT_EQ(code_of([&] { search_alpha(x, w, codec, {}); }), ErrorCode::kInvalidArgument);
}

TEST(JacobiSvdTest, FactorsTallAndWide) {
  for (const Shape& s : {Shape{12, 5}, Shape{5, 12}, Shape{9, 9}}) {
    const Tensor a = gaussian(s, 13);
    const SvdResult r = jacobi_svd(a);
    const std::size_t p = std::min(s[0], s[1]);
    ASSERT_EQ(r.u.shape(), (Shape{s[0], p}));
    ASSERT_EQ(r.v.shape(), (Shape{s[1], p}));
    for (std::size_t k = 1; k < p; ++k) EXPECT_GE(r.sigma[k - 1], r.sigma[k]);
    std::vector<double> us(r.u.data().begin(), r.u.data().end());
    for (std::size_t i = 0; i < s[0]; ++i)
      for (std::size_t k = 0; k < p; ++k) us[i * p + k] *= r.sigma[k];
    EXPECT_LE(rel_diff(matmul(Tensor({s[0], p}, us), transpose(r.v)), a), 1e-13);
    const Tensor utu = matmul(transpose(r.u), r.u), vtv = matmul(transpose(r.v), r.v);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        EXPECT_NEAR(utu[i * p + j], i == j ? 1.0 : 0.0, 1e-13);
        EXPECT_NEAR(vtv[i * p + j], i == j ? 1.0 : 0.0, 1e-13);
      }
  }
}

TEST(SvdSplitTest, HandExamples) {
  const Tensor d({3, 3}, {5, 0, 0, 0, 3, 0, 0, 0, 1});
  const auto b = svd_split(d, 1);
  const Tensor l = matmul(b.l1, b.l2);
  const std::vector<double> top{5, 0, 0, 0, 0, 0, 0, 0, 0}, rest{0, 0, 0, 0, 3, 0, 0, 0, 1};
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_NEAR(l[i], top[i], 1e-14);
    EXPECT_NEAR(b.residual[i], rest[i], 1e-14);
  }
  EXPECT_EQ(b.sigma, (std::vector<double>{5, 3, 1}));

  const Tensor u = gaussian({10, 1}, 14), v = gaussian({1, 7}, 15);
  const Tensor r1 = matmul(u, v);
  EXPECT_LE(frobenius_norm(svd_split(r1, 1).residual), 1e-10 * frobenius_norm(r1));
  const Tensor full = gaussian({6, 9}, 16);
  EXPECT_LE(frobenius_norm(svd_split(full, 6).residual), 1e-12 * frobenius_norm(full));

  EXPECT_EQ(code_of([&] { svd_split(full, 0); }), ErrorCode::kRankOutOfRange);
  EXPECT_EQ(code_of([&] { svd_split(full, 7); }), ErrorCode::kRankOutOfRange);
  EXPECT_EQ(code_of([&] { jacobi_svd(gaussian({4, 4}, 1), 0); }), ErrorCode::kNonConvergence);
}

TEST(SvdSplitTest, EckartYoungAgainstRandomCompetitors) {
  std::mt19937_64 rng(18);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor w = gaussian({20, 14}, 200 + seed);
    for (std::size_t r : {1u, 3u, 8u}) {
      const auto b = svd_split(w, r);
      const double best = frobenius_norm(b.residual);
      double tail = 0;
      for (std::size_t k = r; k < b.sigma.size(); ++k) tail += b.sigma[k] * b.sigma[k];
      EXPECT_NEAR(best * best, tail, 1e-10 * tail);
      EXPECT_LE(rel_diff(add(matmul(b.l1, b.l2), b.residual), w), 1e-15);
      for (int c = 0; c < 50; ++c) {
        const Tensor comp = matmul(gaussian({20, r}, rng()), gaussian({r, 14}, rng()));
        EXPECT_LE(best, frobenius_norm(subtract(w, comp)));
      }
    }
  }
}

TEST(PipelineTest, FullRankLeavesNoResidualError) {
  const Tensor x = gaussian({32, 16}, 20), w = gaussian({16, 24}, 21, 0.02);
  PipelineOptions opt;
  opt.rank = 16;
  const auto r = svdquant_pipeline(x, w, Codec::parse("int4"), opt);
  EXPECT_LE(r.svdquant_error, 1e-9);
  EXPECT_LE(r.svdquant_error, r.smoothquant_error);
}

TEST(PipelineTest, Hif4Rank16BeatsRtn) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Tensor x = synth(parse_synth("gaussian_outlier:128x128:1:0.001:100", 300 + seed));
    const Tensor w = gaussian({128, 128}, 400 + seed, 0.02);
    const auto r = svdquant_pipeline(x, w, Codec::parse("hif4"));
    EXPECT_LE(r.svdquant_error, r.rtn_error) << seed;
    EXPECT_LE(r.smoothquant_error, r.rtn_error) << seed;
    EXPECT_EQ(r.rank, 16u);
    EXPECT_EQ(r.svdquant_alpha, r.smoothquant_alpha);
  }
}

TEST(PipelineTest, AblationSkipsSmoothing) {
  const Tensor x = gaussian({64, 64}, 30), w = gaussian({64, 64}, 31, 0.02);
  PipelineOptions opt;
  opt.smooth = false;
  const auto r = svdquant_pipeline(x, w, Codec::parse("nvfp4"), opt);
  EXPECT_FALSE(r.smoothed);
  EXPECT_EQ(r.svdquant_alpha, 0.0);
  EXPECT_GT(r.svdquant_error, 0.0);
  EXPECT_EQ(code_of([] {
              svdquant_pipeline(Tensor::zeros({2, 64}), Tensor::zeros({64, 2}),
                                Codec::parse("int8"));
            }),
            ErrorCode::kZeroSignal);
}

}  // namespace
}  // namespace lofiq
