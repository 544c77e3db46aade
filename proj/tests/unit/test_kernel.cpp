#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <gtest/gtest.h>

#include "covfield/errors.hpp"
#include "covfield/geometry.hpp"
#include "covfield/kernel.hpp"
#include "oracles.hpp"

namespace covfield {
namespace {

constexpr double kDemoBeta = 0.9453058162554949;
constexpr double kDemoSigma = 0.06332725946674625;

TEST(KernelConfig, Validation) {
  EXPECT_NO_THROW((KernelConfig{0.1, 1.0, 0.0}.validate()));
  EXPECT_THROW((KernelConfig{0.0, 1.0, 0.0}.validate()), InvalidArgument);
  EXPECT_THROW((KernelConfig{0.1, -1.0, 0.0}.validate()), InvalidArgument);
  EXPECT_THROW((KernelConfig{0.1, 1.0, -0.1}.validate()), InvalidArgument);
  EXPECT_THROW((KernelConfig{std::nan(""), 1.0, 0.0}.validate()), InvalidArgument);
}

TEST(KernelEval, CoincidentPointsGiveBeta) {
  const double u[] = {0.3, -1.2};
  EXPECT_EQ(kernel_eval(u, u, {0.7, 1.0, 0.0}), 1.0);
  EXPECT_EQ(kernel_eval(u, u, {0.7, 2.5, 0.0}), 2.5);
}

TEST(KernelEval, OneBandwidthApart) {
  const double u[] = {0.0};
  const double v[] = {0.1};
  EXPECT_NEAR(kernel_eval(u, v, {0.1, 1.0, 0.0}), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(kernel_eval(u, v, {0.1, 1.0, 0.0}), 0.606531, 1e-6);
}

TEST(KernelEval, TrainedDemoParameters) {
  const double u[] = {0.0};
  const double v[] = {1.0};
  const double expected = kDemoBeta * std::exp(-1.0 / (2.0 * kDemoSigma * kDemoSigma));
  EXPECT_DOUBLE_EQ(kernel_eval(u, v, {kDemoSigma, kDemoBeta, 0.0}), expected);
}

TEST(KernelEval, DimensionMismatchThrows) {
  const double u[] = {0.0};
  const double v[] = {0.0, 1.0};
  EXPECT_THROW(kernel_eval(u, v, {}), InvalidArgument);
}

TEST(KernelEval, BoundedAndRadiallyDecreasing) {
  Rng rng(2);
  const KernelConfig cfg{0.4, 1.7, 0.0};
  for (int t = 0; t < 1000; ++t) {
    const auto p = oracle::uniform_points(rng, 3, 2, -1.0, 1.0);
    const double kv = kernel_eval(p[0], p[1], cfg);
    const double kw = kernel_eval(p[0], p[2], cfg);
    EXPECT_GT(kv, 0.0);
    EXPECT_LT(kv, cfg.beta);
    if (distance(p[0], p[1]) < distance(p[0], p[2])) EXPECT_GT(kv, kw);
  }
}

TEST(KernelMatrix, SinglePoint) {
  const double v[] = {0.4};
  const auto p = PointSet::from_scalars(v);
  const auto k = kernel_matrix(p, p, {0.2, 3.0, 0.0});
  ASSERT_EQ(k.rows(), 1);
  EXPECT_EQ(k(0, 0), 3.0);
}

TEST(KernelMatrix, UniformPresetIsNearlyDiagonal) {
  const auto s = preset_observations(Preset::Uniform1d);
  const auto k = kernel_matrix(s, s, {0.1, 1.0, 0.0});
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    EXPECT_EQ(k(i, i), 1.0);
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      if (i != j) EXPECT_LT(k(i, j), std::exp(-2.88));
    }
  }
}

TEST(KernelMatrix, SymmetryAndTranspose) {
  Rng rng(4);
  const auto u = oracle::uniform_points(rng, 9, 3);
  const auto v = oracle::uniform_points(rng, 5, 3);
  const KernelConfig cfg{0.3, 1.2, 0.0};
  const auto kuv = kernel_matrix(u, v, cfg);
  const auto kvu = kernel_matrix(v, u, cfg);
  EXPECT_TRUE(kuv == kvu.transpose());
  const auto kuu = kernel_matrix(u, u, cfg);
  EXPECT_TRUE(kuu == kuu.transpose());
  for (Eigen::Index i = 0; i < kuu.rows(); ++i) EXPECT_EQ(kuu(i, i), cfg.beta);
  for (Eigen::Index i = 0; i < kuv.rows(); ++i) {
    for (Eigen::Index j = 0; j < kuv.cols(); ++j) {
      EXPECT_NEAR(kuv(i, j), kernel_eval(u[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)], cfg), 1e-15);
    }
  }
}

TEST(KernelMatrix, DimensionMismatchThrows) {
  const auto a = generate_gaussian_cloud(3, 2, 1);
  const auto b = generate_gaussian_cloud(3, 3, 1);
  EXPECT_THROW(kernel_matrix(a, b, {}), InvalidArgument);
}

TEST(KernelMatrix, PositiveDefiniteOnDistinctPoints) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto x = oracle::separated_points(rng, 15, 2, 0.1);
    Eigen::MatrixXd k = kernel_matrix(x, x, {0.1, 1.0, 0.0});
    EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(k).info(), Eigen::Success);
    k.diagonal().array() += 0.01;
    EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(k).info(), Eigen::Success);
  }
}

TEST(Lipschitz, ClosedForm) {
  EXPECT_NEAR(lipschitz_bound({1.0, 1.0, 0.0}), 1.0 / std::sqrt(std::numbers::e), 1e-15);
  EXPECT_NEAR(lipschitz_bound({1.0, 1.0, 0.0}), 0.606531, 1e-6);
  EXPECT_NEAR(lipschitz_bound({0.5, 1.0, 0.0}), 1.213061, 1e-6);
  EXPECT_NEAR(lipschitz_bound({0.5, 2.0, 0.0}), 2.0 * 1.2130613194252668, 1e-12);
}

TEST(Lipschitz, FiniteDifferenceGradientBelowBound) {
  Rng rng(6);
  const double h = 1e-6;
  for (const double sigma : {0.05, 0.5, 5.0}) {
    const KernelConfig cfg{sigma, 1.0, 0.0};
    const double bound = lipschitz_bound(cfg);
    for (int t = 0; t < 2000; ++t) {
      const auto p = oracle::uniform_points(rng, 2, 2, -2.0 * sigma, 2.0 * sigma);
      double g2 = 0.0;
      for (int k = 0; k < 2; ++k) {
        double up[2] = {p[0][0], p[0][1]};
        double dn[2] = {p[0][0], p[0][1]};
        up[k] += h;
        dn[k] -= h;
        const double g = (kernel_eval(up, p[1], cfg) - kernel_eval(dn, p[1], cfg)) / (2.0 * h);
        g2 += g * g;
      }
      EXPECT_LE(std::sqrt(g2), bound * (1.0 + 1e-6));
    }
  }
}

}  // namespace
}  // namespace covfield
