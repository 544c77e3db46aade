#include "covfield/kernel.hpp"

#include <cmath>
#include <numbers>

#include "covfield/errors.hpp"

namespace covfield {

namespace {

// Squared distance without touching the per-thread evaluation counter; the
// counter tracks the cheap estimators, not dense assembly.
inline double sqdist_raw(Point a, Point b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return sum;
}

}  // namespace

void KernelConfig::validate() const {
  if (!(std::isfinite(sigma) && sigma > 0.0)) throw InvalidArgument("sigma must be a positive finite number");
  if (!(std::isfinite(beta) && beta > 0.0)) throw InvalidArgument("beta must be a positive finite number");
  if (!(std::isfinite(tau) && tau >= 0.0)) throw InvalidArgument("tau must be a nonnegative finite number");
}

double kernel_eval(Point u, Point v, const KernelConfig& cfg) {
  return cfg.beta * std::exp(-squared_distance(u, v) / (2.0 * cfg.sigma * cfg.sigma));
}

Eigen::MatrixXd kernel_matrix(const PointSet& rows, const PointSet& cols, const KernelConfig& cfg) {
  if (rows.dim() != cols.dim()) throw InvalidArgument("kernel_matrix: dimension mismatch");
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(cols.size());
  const double scale = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  Eigen::MatrixXd k(m, n);
  if (&rows == &cols) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k(j, j) = cfg.beta;
      for (Eigen::Index i = j + 1; i < m; ++i) {
        const double value = cfg.beta * std::exp(-sqdist_raw(rows[i], cols[j]) * scale);
        k(i, j) = value;
        k(j, i) = value;
      }
    }
    return k;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      k(i, j) = cfg.beta * std::exp(-sqdist_raw(rows[i], cols[j]) * scale);
    }
  }
  return k;
}

double lipschitz_bound(const KernelConfig& cfg) {
  return cfg.beta / (cfg.sigma * std::sqrt(std::numbers::e));
}

}  // namespace covfield
