// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/ptq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lofiq/error.hpp"

namespace lofiq {
namespace {

void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(what) + " must be 2-D, got " + shape_to_string(t.shape()));
  }
}

void require_layer(const Tensor& x, const Tensor& w) {
  require_matrix(x, "x");
  require_matrix(w, "w");
  if (x.extent(1) != w.extent(0)) {
    throw Error(ErrorCode::kShapeMismatch, "x " + shape_to_string(x.shape()) + " and w " +
                                               shape_to_string(w.shape()) + " do not chain");
  }
}

std::vector<double> column_max_abs(const Tensor& x) {
  const std::size_t rows = x.extent(0), cols = x.extent(1);
  std::vector<double> m(cols, 0.0);
  const auto d = x.data();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m[j] = std::max(m[j], std::abs(d[i * cols + j]));
  return m;
}

std::vector<double> row_max_abs(const Tensor& w) {
  const std::size_t rows = w.extent(0), cols = w.extent(1);
  std::vector<double> m(rows, 0.0);
  const auto d = w.data();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m[i] = std::max(m[i], std::abs(d[i * cols + j]));
  return m;
}

Tensor scale_columns(const Tensor& x, const std::vector<double>& s, bool divide) {
  const std::size_t rows = x.extent(0), cols = x.extent(1);
  if (s.size() != cols) throw Error(ErrorCode::kShapeMismatch, "plan length does not match x");
  std::vector<double> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out[i * cols + j] = divide ? out[i * cols + j] / s[j] : out[i * cols + j] * s[j];
  return Tensor(x.shape(), std::move(out), x.name());
}

Tensor scale_rows(const Tensor& w, const std::vector<double>& s, bool divide) {
  const std::size_t rows = w.extent(0), cols = w.extent(1);
  if (s.size() != rows) throw Error(ErrorCode::kShapeMismatch, "plan length does not match w");
  std::vector<double> out(w.data().begin(), w.data().end());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out[i * cols + j] = divide ? out[i * cols + j] / s[i] : out[i * cols + j] * s[i];
  return Tensor(w.shape(), std::move(out), w.name());
}

Tensor quantize_x(const Tensor& x, const Codec& codec) {
  return codec.fake_quantize(x, 1, Role::kActivation);
}

Tensor quantize_w(const Tensor& w, const Codec& codec) {
  return codec.fake_quantize(w, 0, Role::kWeight);
}

double distance(const Tensor& a, const Tensor& b) {
  double acc = 0;
  const auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

// Column-major working copy: cols[j] is column j.
using Columns = std::vector<std::vector<double>>;

SvdResult jacobi_tall(const Tensor& a, int max_sweeps) {
  const std::size_t m = a.extent(0), n = a.extent(1);
  Columns u(n, std::vector<double>(m));
  Columns v(n, std::vector<double>(n, 0.0));
  const auto d = a.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) u[j][i] = d[i * n + j];
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(m);
  int sweep = 0;
  bool converged = n < 2;
  while (!converged) {
    if (sweep == max_sweeps) {
      throw Error(ErrorCode::kNonConvergence,
                  "Jacobi SVD did not converge in " + std::to_string(max_sweeps) + " sweeps");
    }
    ++sweep;
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto& up = u[p];
        auto& uq = u[q];
        double alpha = 0, beta = 0, gamma = 0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += up[i] * up[i];
          beta += uq[i] * uq[i];
          gamma += up[i] * uq[i];
        }
        if (alpha == 0 || beta == 0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double a1 = up[i], a2 = uq[i];
          up[i] = c * a1 - s * a2;
          uq[i] = s * a1 + c * a2;
        }
        auto& vp = v[p];
        auto& vq = v[q];
        for (std::size_t i = 0; i < n; ++i) {
          const double a1 = vp[i], a2 = vq[i];
          vp[i] = c * a1 - s * a2;
          vq[i] = s * a1 + c * a2;
        }
      }
    }
  }

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0;
    for (double x : u[j]) acc += x * x;
    norms[j] = std::sqrt(acc);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return norms[l] > norms[r]; });

  SvdResult r;
  r.sweeps = sweep;
  r.sigma.resize(n);
  std::vector<double> ud(m * n, 0.0), vd(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    r.sigma[k] = norms[j];
    if (norms[j] > 0)
      for (std::size_t i = 0; i < m; ++i) ud[i * n + k] = u[j][i] / norms[j];
    for (std::size_t i = 0; i < n; ++i) vd[i * n + k] = v[j][i];
  }
  r.u = Tensor({m, n}, std::move(ud));
  r.v = Tensor({n, n}, std::move(vd));
  return r;
}

}  // namespace

SmoothingPlan smooth_scales(std::span<const double> x_colmax, std::span<const double> w_rowmax,
                            double alpha) {
  if (x_colmax.size() != w_rowmax.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "activation maxima have " + std::to_string(x_colmax.size()) +
                    " channels, weight maxima " + std::to_string(w_rowmax.size()));
  }
  if (!(alpha >= 0 && alpha <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  }
  SmoothingPlan plan;
  plan.alpha = alpha;
  plan.activation_max.assign(x_colmax.begin(), x_colmax.end());
  plan.weight_max.assign(w_rowmax.begin(), w_rowmax.end());
  plan.scales.resize(x_colmax.size());
  for (std::size_t j = 0; j < x_colmax.size(); ++j) {
    const double xm = std::max(std::abs(x_colmax[j]), kSmoothMaxFloor);
    const double wm = std::max(std::abs(w_rowmax[j]), kSmoothMaxFloor);
    const double s = std::pow(xm, alpha) / std::pow(wm, 1.0 - alpha);
    plan.scales[j] = std::clamp(s, kSmoothScaleMin, kSmoothScaleMax);
  }
  return plan;
}

SmoothingPlan plan_smoothing(const Tensor& x, const Tensor& w, double alpha) {
  require_layer(x, w);
  const auto xm = column_max_abs(x);
  const auto wm = row_max_abs(w);
  return smooth_scales(xm, wm, alpha);
}

std::pair<Tensor, Tensor> apply_smoothing(const Tensor& x, const Tensor& w,
                                          const SmoothingPlan& plan) {
  require_layer(x, w);
  return {scale_columns(x, plan.scales, true), scale_rows(w, plan.scales, false)};
}

std::pair<Tensor, Tensor> invert_smoothing(const Tensor& x_smoothed, const Tensor& w_smoothed,
                                           const SmoothingPlan& plan) {
  require_layer(x_smoothed, w_smoothed);
  return {scale_columns(x_smoothed, plan.scales, false),
          scale_rows(w_smoothed, plan.scales, true)};
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  return grid;
}

AlphaSearchResult search_alpha(const Tensor& x, const Tensor& w, const Codec& codec,
                               std::span<const double> grid) {
  require_layer(x, w);
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "alpha grid is empty");
  const Tensor reference = matmul(x, w);
  AlphaSearchResult best;
  best.objective.reserve(grid.size());
  double best_err = std::numeric_limits<double>::infinity();
  for (double alpha : grid) {
    SmoothingPlan plan = plan_smoothing(x, w, alpha);
    const auto [xs, ws] = apply_smoothing(x, w, plan);
    const double err = quantized_product_error(xs, ws, codec, reference);
    best.objective.push_back(err);
    if (err < best_err || best.objective.size() == 1) {
      best_err = err;
      best.alpha = alpha;
      best.plan = std::move(plan);
    }
  }
  return best;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "left operand");
  require_matrix(b, "right operand");
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  if (b.extent(0) != k) {
    throw Error(ErrorCode::kShapeMismatch,
                "cannot multiply " + shape_to_string(a.shape()) + " by " + shape_to_string(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  const auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = da[i * k + p];
      if (av == 0) continue;
      const double* brow = db.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  return Tensor({m, n}, std::move(out));
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw Error(ErrorCode::kShapeMismatch, "add: shapes differ");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return Tensor(a.shape(), std::move(out));
}

Tensor subtract(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw Error(ErrorCode::kShapeMismatch, "subtract: shapes differ");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return Tensor(a.shape(), std::move(out));
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "operand");
  const std::size_t m = a.extent(0), n = a.extent(1);
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  return Tensor({n, m}, std::move(out), a.name());
}

double frobenius_norm(const Tensor& a) {
  double acc = 0;
  for (double v : a.data()) acc += v * v;
  return std::sqrt(acc);
}

double quantized_product_error(const Tensor& x, const Tensor& w, const Codec& codec,
                               const Tensor& reference) {
  const Tensor approx = matmul(quantize_x(x, codec), quantize_w(w, codec));
  if (approx.shape() != reference.shape())
    throw Error(ErrorCode::kShapeMismatch, "reference shape does not match x w");
  return distance(approx, reference);
}

SvdResult jacobi_svd(const Tensor& a, int max_sweeps) {
  require_matrix(a, "SVD input");
  if (a.extent(0) >= a.extent(1)) return jacobi_tall(a, max_sweeps);
  SvdResult t = jacobi_tall(transpose(a), max_sweeps);
  std::swap(t.u, t.v);
  return t;
}

LowRankBranch svd_split(const Tensor& w, std::size_t rank) {
  require_matrix(w, "w");
  const std::size_t m = w.extent(0), n = w.extent(1);
  const std::size_t p = std::min(m, n);
  if (rank == 0 || rank > p) {
    throw Error(ErrorCode::kRankOutOfRange,
                "rank " + std::to_string(rank) + " outside [1, " + std::to_string(p) + "]");
  }
  const SvdResult svd = jacobi_svd(w);
  std::vector<double> l1(m * rank), l2(rank * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < rank; ++k) l1[i * rank + k] = svd.u[i * p + k] * svd.sigma[k];
  for (std::size_t k = 0; k < rank; ++k)
    for (std::size_t j = 0; j < n; ++j) l2[k * n + j] = svd.v[j * p + k];

  LowRankBranch b;
  b.l1 = Tensor({m, rank}, std::move(l1), "l1");
  b.l2 = Tensor({rank, n}, std::move(l2), "l2");
  b.residual = subtract(w, matmul(b.l1, b.l2)).with_name("residual");
  b.rank = rank;
  b.sigma = svd.sigma;
  return b;
}

PipelineReport svdquant_pipeline(const Tensor& x, const Tensor& w, const Codec& codec,
                                 const PipelineOptions& options) {
  require_layer(x, w);
  const Tensor reference = matmul(x, w);
  const double norm = frobenius_norm(reference);
  if (norm == 0) throw Error(ErrorCode::kZeroSignal, "x w is identically zero");

  PipelineReport r;
  r.format = codec.name();
  r.rank = options.rank;
  r.smoothed = options.smooth;
  r.rtn_error = quantized_product_error(x, w, codec, reference) / norm;

  const AlphaSearchResult search = search_alpha(x, w, codec, options.alpha_grid);
  r.smoothquant_alpha = search.alpha;
  r.smoothquant_error =
      *std::min_element(search.objective.begin(), search.objective.end()) / norm;

  Tensor xs = x, ws = w;
  if (options.smooth) {
    std::tie(xs, ws) = apply_smoothing(x, w, search.plan);
    r.svdquant_alpha = search.alpha;
  }
  const LowRankBranch branch = svd_split(ws, options.rank);
  const Tensor high = matmul(matmul(xs, branch.l1), branch.l2);
  const Tensor low = matmul(quantize_x(xs, codec), quantize_w(branch.residual, codec));
  r.svdquant_error = distance(add(high, low), reference) / norm;
  return r;
}

}  // namespace lofiq
