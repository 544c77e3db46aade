#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "covfield/errors.hpp"
#include "covfield/geometry.hpp"
#include "covfield/kernel.hpp"
#include "covfield/lrsp.hpp"
#include "oracles.hpp"

namespace covfield {
namespace {

std::vector<std::size_t> first_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// K_XS K_SS^{-1} K_SX from the explicit long double inverse.
Eigen::MatrixXd nystrom_oracle(const PointSet& x, const PointSet& s, const KernelConfig& cfg) {
  const auto kxs = oracle::kernel_block(x, s, cfg);
  return oracle::to_double(kxs * oracle::inverse(oracle::kernel_block(s, s, cfg)) * kxs.transpose());
}

TEST(Nystrom, AllPointsAsLandmarksIsExact) {
  Rng rng(1);
  const auto x = oracle::separated_points(rng, 30, 2, 0.1);
  const KernelConfig cfg{0.1, 1.0, 0.0};
  const auto f = nystrom_build(x, first_n(x.size()), cfg);
  EXPECT_EQ(f.jitter, 0.0);
  EXPECT_LE(error_max_norm(kernel_matrix(x, x, cfg), lowrank_dense(f)), 1e-8);
}

TEST(Nystrom, SingleLandmarkIsRankOne) {
  Rng rng(2);
  const auto x = oracle::uniform_points(rng, 12, 3);
  const KernelConfig cfg{0.7, 2.0, 0.0};
  const std::vector<std::size_t> lm{5};
  const auto approx = lowrank_dense(nystrom_build(x, lm, cfg));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double expected = kernel_eval(x[i], x[5], cfg) * kernel_eval(x[5], x[j], cfg) / cfg.beta;
      EXPECT_NEAR(approx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), expected, 1e-14);
    }
  }
}

TEST(Nystrom, MatchesDenseInverseOracle) {
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto x = oracle::uniform_points(rng, 40, 3);
    const KernelConfig cfg{0.2, 1.0, 0.0};
    const auto lm = first_n(15);
    const auto f = nystrom_build(x, lm, cfg);
    const auto ref = nystrom_oracle(x, x.select(lm), cfg);
    EXPECT_LE(oracle::relative_frobenius(lowrank_dense(f), ref), 1e-10);
  }
}

TEST(Nystrom, GaussianCloudProbeBlock) {
  const auto x = generate_gaussian_cloud(1000, 3, 42);
  const KernelConfig cfg{0.5, 1.0, 0.0};
  const auto lm = random_permutation(x.size(), 42);
  const std::vector<std::size_t> landmarks(lm.begin(), lm.begin() + 100);
  const auto f = nystrom_build(x, landmarks, cfg);
  const auto probe = first_n(50);
  const auto ref = nystrom_oracle(x.select(probe), x.select(landmarks), cfg);
  const Eigen::MatrixXd got = f.w.leftCols(50).transpose() * f.w.leftCols(50);
  EXPECT_LE((got - ref).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Nystrom, RejectsBadLandmarks) {
  const auto x = equispaced(10);
  const std::vector<std::size_t> dup{1, 1};
  const std::vector<std::size_t> oob{3, 10};
  EXPECT_THROW(nystrom_build(x, dup, {}), InvalidArgument);
  EXPECT_THROW(nystrom_build(x, oob, {}), InvalidArgument);
}

TEST(PatternByRadius, DiagonalAndFull) {
  Rng rng(4);
  const auto x = oracle::uniform_points(rng, 25, 2);
  const auto diag = pattern_by_radius(x, 0.0);
  EXPECT_EQ(diag.nnz(), 25u);
  for (std::size_t i = 0; i < 25; ++i) {
    ASSERT_EQ(diag.row_ptr[i + 1] - diag.row_ptr[i], 1u);
    EXPECT_EQ(diag.cols[diag.row_ptr[i]], i);
  }
  EXPECT_EQ(pattern_by_radius(x, 2.0).nnz(), 625u);
  EXPECT_THROW(pattern_by_radius(x, -1.0), InvalidArgument);
}

TEST(PatternByRadius, SymmetricSortedAndGrowing) {
  const auto x = generate_gaussian_cloud(300, 3, 5);
  const double sigma = 0.3;
  std::size_t prev = 0;
  for (int k = 1; k <= 10; ++k) {
    const auto p = pattern_by_radius(x, k * sigma);
    EXPECT_GE(p.nnz(), prev);
    prev = p.nnz();
    for (std::size_t i = 0; i < p.n; ++i) {
      EXPECT_TRUE(std::is_sorted(p.cols.begin() + static_cast<std::ptrdiff_t>(p.row_ptr[i]),
                                 p.cols.begin() + static_cast<std::ptrdiff_t>(p.row_ptr[i + 1])));
      for (std::size_t q = p.row_ptr[i]; q < p.row_ptr[i + 1]; ++q) {
        const std::size_t j = p.cols[q];
        EXPECT_LE(distance(x[i], x[j]), k * sigma);
        const auto b = p.cols.begin() + static_cast<std::ptrdiff_t>(p.row_ptr[j]);
        const auto e = p.cols.begin() + static_cast<std::ptrdiff_t>(p.row_ptr[j + 1]);
        EXPECT_TRUE(std::binary_search(b, e, i));
      }
    }
  }
}

TEST(SparseCorrection, EntriesMatchBruteForceResidual) {
  const auto x = generate_gaussian_cloud(200, 3, 6);
  const KernelConfig cfg{0.4, 1.0, 0.0};
  const auto lm = first_n(20);
  const auto f = nystrom_build(x, lm, cfg);
  const auto c = sparse_correction(x, f, pattern_by_radius(x, 1.0));
  const auto ny = nystrom_oracle(x, x.select(lm), cfg);
  Rng rng(7);
  const auto& p = c.pattern;
  for (int t = 0; t < 100; ++t) {
    const std::size_t i = rng.index(p.n);
    const std::size_t q = p.row_ptr[i] + rng.index(p.row_ptr[i + 1] - p.row_ptr[i]);
    const std::size_t j = p.cols[q];
    const double expected = kernel_eval(x[i], x[j], cfg) - ny(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    EXPECT_NEAR(c.values[q], expected, 1e-12);
  }
  // symmetric values
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t q = p.row_ptr[i]; q < p.row_ptr[i + 1]; ++q) {
      const std::size_t j = p.cols[q];
      const auto b = p.cols.begin() + static_cast<std::ptrdiff_t>(p.row_ptr[j]);
      const auto e = p.cols.begin() + static_cast<std::ptrdiff_t>(p.row_ptr[j + 1]);
      const auto qt = static_cast<std::size_t>(std::lower_bound(b, e, i) - p.cols.begin());
      EXPECT_EQ(c.values[q], c.values[qt]);
    }
  }
}

TEST(SparseCorrection, VanishesOnLandmarkRows) {
  const auto x = generate_gaussian_cloud(150, 2, 8);
  const KernelConfig cfg{0.3, 1.0, 0.0};
  const auto lm = first_n(25);
  const auto c = sparse_correction(x, nystrom_build(x, lm, cfg), pattern_by_radius(x, 0.9));
  const auto& p = c.pattern;
  for (std::size_t i = 0; i < 25; ++i) {
    for (std::size_t q = p.row_ptr[i]; q < p.row_ptr[i + 1]; ++q) EXPECT_LE(std::abs(c.values[q]), 1e-8);
  }
}

TEST(SparseCorrection, FullPatternReconstructsKernel) {
  const auto x = generate_gaussian_cloud(80, 3, 9);
  const KernelConfig cfg{0.5, 1.0, 0.0};
  const auto f = nystrom_build(x, first_n(10), cfg);
  const auto c = sparse_correction(x, f, pattern_by_radius(x, 100.0));
  EXPECT_LE(error_max_norm(kernel_matrix(x, x, cfg), lrsp_dense(f, c)), 1e-8);
}

TEST(LrspError, NonincreasingInRadius) {
  const auto x = generate_gaussian_cloud(300, 3, 10);
  const KernelConfig cfg{0.4, 1.0, 0.0};
  const auto f = nystrom_build(x, first_n(30), cfg);
  const auto exact = kernel_matrix(x, x, cfg);
  double prev = HUGE_VAL;
  for (int k = 0; k <= 10; ++k) {
    const double e = error_max_norm(exact, lrsp_dense(f, sparse_correction(x, f, pattern_by_radius(x, k * cfg.sigma))));
    EXPECT_LE(e, prev);
    prev = e;
  }
}

TEST(CostEquivalentRank, Examples) {
  EXPECT_DOUBLE_EQ(cost_equivalent_rank(100, 1000, 0), 100.0);
  EXPECT_NEAR(cost_equivalent_rank(100, 1000, 1201), 101.0, 1e-12);
  double prev = cost_equivalent_rank(50, 500, 0);
  for (double nnz = 100; nnz < 1e6; nnz *= 1.7) {
    const double k = cost_equivalent_rank(50, 500, nnz);
    EXPECT_GT(k, prev);
    prev = k;
  }
}

TEST(CostEquivalentRank, BalancesStorage) {
  Rng rng(11);
  for (int t = 0; t < 1000; ++t) {
    const double n = 1.0 + std::floor(rng.uniform() * 1e5);
    const double r0 = std::floor(rng.uniform() * n);
    const double nnz = std::floor(rng.uniform() * n * n);
    const double k = cost_equivalent_rank(r0, n, nnz);
    const double lhs = k * k + n * k;
    const double rhs = r0 * r0 + n * r0 + nnz;
    EXPECT_LE(std::abs(lhs - rhs), 1e-9 * rhs);
    EXPECT_GE(k, r0);
  }
}

TEST(ErrorNorms, ZeroForExactAndBelowSpectralNorm) {
  const auto x = generate_gaussian_cloud(200, 3, 12);
  const KernelConfig cfg{0.5, 1.0, 0.0};
  const auto exact = kernel_matrix(x, x, cfg);
  EXPECT_EQ(error_max_norm(exact, exact), 0.0);
  EXPECT_EQ(error_two_norm_randomized(exact, exact, 1), 0.0);
  const auto approx = lowrank_dense(nystrom_build(x, first_n(20), cfg));
  const Eigen::MatrixXd e = exact - approx;
  const double spectral = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e).eigenvalues().cwiseAbs().maxCoeff();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const double est = error_two_norm_randomized(exact, approx, seed);
    EXPECT_GE(est, 0.0);
    EXPECT_LE(est, spectral * (1.0 + 1e-12));
  }
  EXPECT_GE(error_max_norm(exact, approx), 0.0);
}

TEST(ErrorCurve, RowsAreConsistent) {
  const auto x = generate_gaussian_cloud(300, 3, 13);
  const LrspExperiment exp{x, {0.5, 1.0, 0.0}, 42};
  const std::vector<double> deltas{2.0, 4.0};
  const auto rows = lrsp_error_curve(exp, 30, deltas);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& row : rows) {
    EXPECT_NEAR(row.equiv_rank, cost_equivalent_rank(30, 300, static_cast<double>(row.nnz)), 1e-12);
    EXPECT_EQ(row.lr_rank, static_cast<std::size_t>(std::lround(row.equiv_rank)));
  }
  const std::vector<std::size_t> ranks{30, 60};
  const auto lr = lowrank_error_sweep(exp, ranks);
  ASSERT_EQ(lr.size(), 2u);
  EXPECT_EQ(lr[1].rank, 60u);
}

}  // namespace
}  // namespace covfield
