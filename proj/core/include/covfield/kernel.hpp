#pragma once

#include <Eigen/Core>

#include "covfield/geometry.hpp"

namespace covfield {

/// Hyperparameters of the Gaussian covariance beta * exp(-|u - v|^2 / (2 sigma^2)).
struct KernelConfig {
  double sigma = 1.0;  // bandwidth (length scale)
  double beta = 1.0;   // prior variance
  double tau = 0.0;    // observation noise level

  /// Throws InvalidArgument unless sigma > 0, beta > 0, tau >= 0 (all finite).
  void validate() const;
};

double kernel_eval(Point u, Point v, const KernelConfig& cfg);

/// Dense |U| x |V| covariance block. Passing the same PointSet object twice
/// yields an exactly symmetric matrix with beta on the diagonal.
Eigen::MatrixXd kernel_matrix(const PointSet& rows, const PointSet& cols, const KernelConfig& cfg);

/// Upper bound beta / (sigma sqrt(e)) on the gradient norm of u -> kappa(u, v).
double lipschitz_bound(const KernelConfig& cfg);

}  // namespace covfield
