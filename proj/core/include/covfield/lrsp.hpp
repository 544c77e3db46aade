#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "covfield/geometry.hpp"
#include "covfield/kernel.hpp"

namespace covfield {

/// Nystrom factor W = L^{-1} K_SX with L the lower factor of K_SS.
/// K_XX is approximated by W^T W.
struct NystromFactor {
  std::vector<std::size_t> landmark_indices;
  Eigen::MatrixXd w;  // r0 x n
  KernelConfig config;
  double jitter = 0.0;

  std::size_t rank() const noexcept { return landmark_indices.size(); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(w.cols()); }
};

NystromFactor nystrom_build(const PointSet& points, std::span<const std::size_t> landmark_indices,
                            const KernelConfig& cfg);

/// Symmetric sparsity pattern in compressed-row form, columns sorted per row.
struct SymmetricPattern {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;  // size n + 1
  std::vector<std::size_t> cols;

  std::size_t nnz() const noexcept { return cols.size(); }
};

/// {(i, j) : |x_i - x_j| <= delta}. The diagonal is always present.
SymmetricPattern pattern_by_radius(const PointSet& points, double delta);

/// Residual K_XX - W^T W sampled on a pattern.
struct SparseCorrection {
  SymmetricPattern pattern;
  std::vector<double> values;  // aligned with pattern.cols
};

/// One dot product per stored entry; the dense residual is never formed.
SparseCorrection sparse_correction(const PointSet& points, const NystromFactor& nystrom,
                                   SymmetricPattern pattern);

/// Positive root of k^2 + N k = r0^2 + N r0 + nnz.
double cost_equivalent_rank(double r0, double n, double nnz);

/// W^T W.
Eigen::MatrixXd lowrank_dense(const NystromFactor& nystrom);

/// W^T W plus the correction on its pattern.
Eigen::MatrixXd lrsp_dense(const NystromFactor& nystrom, const SparseCorrection& correction);

/// max_ij |exact - approx|_ij.
double error_max_norm(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& approx);

/// |(exact - approx) v| / |v| for one standard normal v drawn from `seed`.
double error_two_norm_randomized(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& approx,
                                 std::uint64_t seed);

struct LrspCurveRow {
  double delta_over_sigma = 0.0;
  std::size_t nnz = 0;
  double equiv_rank = 0.0;
  std::size_t lr_rank = 0;  // equiv_rank rounded to the nearest integer
  double lr_max = 0.0;
  double lrsp_max = 0.0;
  double lr_2norm = 0.0;
  double lrsp_2norm = 0.0;
};

struct LowRankRow {
  std::size_t rank = 0;
  double lr_max = 0.0;
  double lr_2norm = 0.0;
};

/// Shared setup for the error curves: one seeded landmark permutation, so the
/// landmark sets of every rank are nested.
struct LrspExperiment {
  const PointSet& points;
  KernelConfig config;
  std::uint64_t seed = 42;
};

/// LRSP with r0 landmarks and pattern radius delta_k * sigma, compared with
/// plain Nystrom at the cost-equivalent rank.
std::vector<LrspCurveRow> lrsp_error_curve(const LrspExperiment& exp, std::size_t r0,
                                           std::span<const double> delta_multiples);

/// Plain Nystrom error at each requested rank.
std::vector<LowRankRow> lowrank_error_sweep(const LrspExperiment& exp, std::span<const std::size_t> ranks);

}  // namespace covfield
