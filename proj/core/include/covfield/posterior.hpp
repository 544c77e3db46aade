#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "covfield/geometry.hpp"
#include "covfield/kernel.hpp"

namespace covfield {

/// Lower Cholesky factor of an SPD matrix plus the diagonal shift it needed.
struct JitteredCholesky {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

/// Factors `a`, retrying with a + j*I for j in {1e-12, 1e-10, 1e-8, 1e-6} * scale
/// when the plain factorization fails. Throws IllConditionedKernel if every
/// rung fails.
JitteredCholesky factor_with_jitter(const Eigen::MatrixXd& a, double scale);

/// Observations S conditioned on, with the factor of K_SS + tau^2 I held.
///
/// Immutable after `fit`; every evaluation is read-only, so one model can be
/// shared across threads.
class PosteriorModel {
 public:
  PosteriorModel(PointSet observations, KernelConfig cfg, JitteredCholesky factor);

  const PointSet& observations() const noexcept { return observations_; }
  const KernelConfig& config() const noexcept { return cfg_; }
  std::size_t size() const noexcept { return observations_.size(); }
  std::size_t dim() const noexcept { return observations_.dim(); }

  /// L with L L^T = K_SS + (tau^2 + jitter) I.
  const Eigen::MatrixXd& cholesky_factor() const noexcept { return chol_; }
  double jitter_used() const noexcept { return jitter_; }

  /// tau^2 + jitter; zero means the factor reproduces K_SS itself.
  double diagonal_shift() const noexcept { return shift_; }

  /// Index of an observation bitwise equal to `y`, if any.
  std::optional<std::size_t> observation_index(Point y) const;

  /// K_Sy as a vector of length r.
  Eigen::VectorXd cross_covariance(Point y) const;

  /// L^{-1} K_Sy. The posterior covariance is kappa(x, y) - <v(x), v(y)>.
  Eigen::VectorXd half_weights(Point y) const;

  /// L^{-1} K_{S,Y} for every point of Y, one column per point.
  Eigen::MatrixXd half_weights(const PointSet& points) const;

 private:
  PointSet observations_;
  KernelConfig cfg_;
  Eigen::MatrixXd chol_;
  double jitter_;
  double shift_;
};

/// Factors K_SS + tau^2 I. Observations must be pairwise distinct.
PosteriorModel fit(PointSet observations, const KernelConfig& cfg);

/// w = (K_SS + (tau^2 + jitter) I)^{-1} K_Sy.
Eigen::VectorXd cross_weights(const PosteriorModel& model, Point y);

/// R(x, y) = kappa(x, y) - K_xS w(y). Evaluated in a canonical argument order,
/// so swapping x and y gives a bitwise identical result.
double posterior_cov(const PosteriorModel& model, Point x, Point y);

/// Dense R(X*, Y*). Passing the same PointSet object twice yields an exactly
/// symmetric result.
Eigen::MatrixXd posterior_cov_matrix(const PosteriorModel& model, const PointSet& rows,
                                     const PointSet& cols);

/// K_{X*S} (K_SS + tau^2 I)^{-1} y.
Eigen::VectorXd posterior_mean(const PosteriorModel& model, std::span<const double> obs_values,
                               const PointSet& points);

/// R(x, x). Throws NumericalConsistency below -1e-8 * beta.
double posterior_variance(const PosteriorModel& model, Point x);

enum class NormOrder { One, Two, Infinity };

/// max over the grid of ||w(y)||_p: a lower estimate of the supremum over R^d.
double gamma_p(const PosteriorModel& model, const PointSet& grid, NormOrder p);

}  // namespace covfield
