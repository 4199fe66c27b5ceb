// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

// Checks the low-rank split against Eigen's two-sided Jacobi SVD.

#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <random>

#include "lofiq/ptq.hpp"

namespace lofiq {
namespace {

TEST(SvdOracleTest, TailEnergyMatchesEigen) {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<std::size_t> dim(2, 32);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = dim(rng), k = dim(rng);
    Eigen::MatrixXd a(m, k);
    std::vector<double> d(m * k);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < k; ++j) a(i, j) = d[i * k + j] = n(rng);
    const Eigen::JacobiSVD<Eigen::MatrixXd> oracle(a);
    const Eigen::VectorXd sv = oracle.singularValues();
    const std::size_t p = std::min(m, k);
    std::uniform_int_distribution<std::size_t> rank(1, p);
    const std::size_t r = rank(rng);

    const auto b = svd_split(Tensor({m, k}, d), r);
    for (std::size_t i = 0; i < p; ++i) ASSERT_NEAR(b.sigma[i], sv(i), 1e-12 * sv(0));
    double tail = 0;
    for (std::size_t i = r; i < p; ++i) tail += sv(i) * sv(i);
    const double res = frobenius_norm(b.residual);
    if (tail == 0) {
      ASSERT_LE(res, 1e-12 * sv(0));
    } else {
      ASSERT_NEAR(res, std::sqrt(tail), 1e-8 * std::sqrt(tail)) << m << "x" << k << " r=" << r;
    }
  }
}

}  // namespace
}  // namespace lofiq
