// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lofiq/codec.hpp"
#include "lofiq/tensor.hpp"

namespace lofiq {

// Conventions for a linear layer Y = X W:
//   X is [tokens, in] and is quantized per token (lanes along axis 1);
//   W is [in, out] and is quantized per output channel (lanes along axis 0).
// Block formats therefore block both operands along the contraction axis.

inline constexpr double kSmoothMaxFloor = 1e-8;
inline constexpr double kSmoothScaleMin = 1e-5;
inline constexpr double kSmoothScaleMax = 1e5;
inline constexpr std::size_t kDefaultSvdRank = 16;

struct SmoothingPlan {
  std::vector<double> scales;  // s_j > 0, one per inner channel
  double alpha = 0.5;
  std::vector<double> activation_max;
  std::vector<double> weight_max;
};

/// s_j = max|X_:,j|^alpha / max|W_j,:|^(1 - alpha), maxima floored at 1e-8 and
/// s_j clamped to [1e-5, 1e5].
SmoothingPlan smooth_scales(std::span<const double> x_colmax, std::span<const double> w_rowmax,
                            double alpha);
SmoothingPlan plan_smoothing(const Tensor& x, const Tensor& w, double alpha);

/// (X diag(s)^-1, diag(s) W).
std::pair<Tensor, Tensor> apply_smoothing(const Tensor& x, const Tensor& w,
                                          const SmoothingPlan& plan);
std::pair<Tensor, Tensor> invert_smoothing(const Tensor& x_smoothed, const Tensor& w_smoothed,
                                           const SmoothingPlan& plan);

std::vector<double> default_alpha_grid();  // 0.1, 0.2, ..., 0.9

struct AlphaSearchResult {
  double alpha = 0;
  SmoothingPlan plan;
  std::vector<double> objective;  // ||Q(x')Q(w') - xw||_F per grid point
};

/// Grid point minimizing the quantized-product error; ties keep the earlier
/// (smaller) alpha.
AlphaSearchResult search_alpha(const Tensor& x, const Tensor& w, const Codec& codec,
                               std::span<const double> grid);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
double frobenius_norm(const Tensor& a);

/// ||Q(x) Q(w) - reference||_F with the layer conventions above.
double quantized_product_error(const Tensor& x, const Tensor& w, const Codec& codec,
                               const Tensor& reference);

/// Thin SVD a = U diag(sigma) V^T, singular values descending.
struct SvdResult {
  Tensor u;                    // m x p, p = min(m, n)
  std::vector<double> sigma;   // p
  Tensor v;                    // n x p
  int sweeps = 0;
};

/// One-sided (Hestenes) Jacobi SVD. Throws NonConvergence when the
/// orthogonality test still fails after max_sweeps.
SvdResult jacobi_svd(const Tensor& a, int max_sweeps = 80);

struct LowRankBranch {
  Tensor l1;        // m x r, U_r diag(sigma_r)
  Tensor l2;        // r x n, V_r^T
  Tensor residual;  // w - l1 l2
  std::size_t rank = 0;
  std::vector<double> sigma;  // all singular values of w
};

LowRankBranch svd_split(const Tensor& w, std::size_t rank);

struct PipelineOptions {
  std::vector<double> alpha_grid = default_alpha_grid();
  std::size_t rank = kDefaultSvdRank;
  bool smooth = true;  // false: low-rank split of the raw weight (ablation)
};

/// Relative errors ||approx - xw||_F / ||xw||_F of the three routes.
struct PipelineReport {
  std::string format;
  std::size_t rank = 0;
  double rtn_error = 0;
  double smoothquant_error = 0;
  double smoothquant_alpha = 0;
  double svdquant_error = 0;
  double svdquant_alpha = 0;  // alpha of the smoothing applied before the split
  bool smoothed = true;
};

/// RTN: Q(x)Q(w). SmoothQuant: Q(x')Q(w') at the searched alpha. SVDQuant:
/// x' L1 L2 + Q(x') Q(w' - L1 L2) with the split taken on the smoothed weight.
PipelineReport svdquant_pipeline(const Tensor& x, const Tensor& w, const Codec& codec,
                                 const PipelineOptions& options = {});

}  // namespace lofiq
