#include "covfield/posterior.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "covfield/errors.hpp"

namespace covfield {

namespace {

constexpr std::array<double, 5> kJitterLadder = {0.0, 1e-12, 1e-10, 1e-8, 1e-6};

bool lexicographically_less(Point a, Point b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void check_point_dim(const PosteriorModel& model, Point p) {
  if (p.size() != model.dim()) {
    throw InvalidArgument("query dimension " + std::to_string(p.size()) +
                          " does not match observations of dimension " + std::to_string(model.dim()));
  }
}

}  // namespace

JitteredCholesky factor_with_jitter(const Eigen::MatrixXd& a, double scale) {
  if (a.rows() != a.cols()) throw InvalidArgument("factor_with_jitter: matrix is not square");
  if (!a.allFinite()) throw IllConditionedKernel("matrix to factor contains non-finite entries");
  const Eigen::Index n = a.rows();
  for (const double rung : kJitterLadder) {
    const double jitter = rung * scale;
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd lower = llt.matrixL();
      if (lower.allFinite() && (lower.diagonal().array() > 0.0).all()) {
        return {std::move(lower), jitter};
      }
    }
  }
  throw IllConditionedKernel("Cholesky factorization of a " + std::to_string(n) + "x" +
                             std::to_string(n) + " kernel block failed at jitter " +
                             std::to_string(kJitterLadder.back() * scale));
}

PosteriorModel::PosteriorModel(PointSet observations, KernelConfig cfg, JitteredCholesky factor)
    : observations_(std::move(observations)),
      cfg_(cfg),
      chol_(std::move(factor.lower)),
      jitter_(factor.jitter),
      shift_(cfg.tau * cfg.tau + factor.jitter) {}

std::optional<std::size_t> PosteriorModel::observation_index(Point y) const {
  for (std::size_t j = 0; j < observations_.size(); ++j) {
    const Point s = observations_[j];
    if (std::equal(s.begin(), s.end(), y.begin(), y.end())) return j;
  }
  return std::nullopt;
}

Eigen::VectorXd PosteriorModel::cross_covariance(Point y) const {
  check_point_dim(*this, y);
  Eigen::VectorXd k(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) k(static_cast<Eigen::Index>(i)) = kernel_eval(observations_[i], y, cfg_);
  return k;
}

Eigen::VectorXd PosteriorModel::half_weights(Point y) const {
  if (shift_ == 0.0) {
    if (const auto j = observation_index(y)) {
      // L^{-1} K_{S s_j} = L^T e_j when L L^T = K_SS.
      return chol_.row(static_cast<Eigen::Index>(*j)).transpose();
    }
  }
  Eigen::VectorXd v = cross_covariance(y);
  chol_.triangularView<Eigen::Lower>().solveInPlace(v);
  return v;
}

Eigen::MatrixXd PosteriorModel::half_weights(const PointSet& points) const {
  if (points.dim() != dim()) throw InvalidArgument("half_weights: dimension mismatch");
  Eigen::MatrixXd v = kernel_matrix(observations_, points, cfg_);
  chol_.triangularView<Eigen::Lower>().solveInPlace(v);
  if (shift_ == 0.0) {
    for (std::size_t c = 0; c < points.size(); ++c) {
      if (const auto j = observation_index(points[c])) {
        v.col(static_cast<Eigen::Index>(c)) = chol_.row(static_cast<Eigen::Index>(*j)).transpose();
      }
    }
  }
  return v;
}

PosteriorModel fit(PointSet observations, const KernelConfig& cfg) {
  cfg.validate();
  const auto r = observations.size();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = i + 1; j < r; ++j) {
      const Point a = observations[i];
      const Point b = observations[j];
      if (std::equal(a.begin(), a.end(), b.begin(), b.end())) {
        throw InvalidArgument("observations " + std::to_string(i) + " and " + std::to_string(j) +
                              " coincide");
      }
    }
  }
  Eigen::MatrixXd kss = kernel_matrix(observations, observations, cfg);
  kss.diagonal().array() += cfg.tau * cfg.tau;
  auto factor = factor_with_jitter(kss, cfg.beta);
  return PosteriorModel(std::move(observations), cfg, std::move(factor));
}

Eigen::VectorXd cross_weights(const PosteriorModel& model, Point y) {
  check_point_dim(model, y);
  if (model.diagonal_shift() == 0.0) {
    if (const auto j = model.observation_index(y)) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.size()));
      e(static_cast<Eigen::Index>(*j)) = 1.0;
      return e;
    }
  }
  Eigen::VectorXd w = model.cross_covariance(y);
  const auto& l = model.cholesky_factor();
  l.triangularView<Eigen::Lower>().solveInPlace(w);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(w);
  return w;
}

double posterior_cov(const PosteriorModel& model, Point x, Point y) {
  check_point_dim(model, x);
  check_point_dim(model, y);
  if (lexicographically_less(x, y)) std::swap(x, y);
  const Eigen::VectorXd vx = model.half_weights(x);
  const Eigen::VectorXd vy = model.half_weights(y);
  return kernel_eval(x, y, model.config()) - vx.dot(vy);
}

Eigen::MatrixXd posterior_cov_matrix(const PosteriorModel& model, const PointSet& rows,
                                     const PointSet& cols) {
  if (rows.dim() != model.dim() || cols.dim() != model.dim()) {
    throw InvalidArgument("posterior_cov_matrix: dimension mismatch");
  }
  if (&rows == &cols) {
    const Eigen::MatrixXd v = model.half_weights(rows);
    Eigen::MatrixXd r = kernel_matrix(rows, rows, model.config());
    r.noalias() -= v.transpose() * v;
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      for (Eigen::Index i = j + 1; i < r.rows(); ++i) r(j, i) = r(i, j);
    }
    return r;
  }
  const Eigen::MatrixXd vr = model.half_weights(rows);
  const Eigen::MatrixXd vc = model.half_weights(cols);
  Eigen::MatrixXd r = kernel_matrix(rows, cols, model.config());
  r.noalias() -= vr.transpose() * vc;
  return r;
}

Eigen::VectorXd posterior_mean(const PosteriorModel& model, std::span<const double> obs_values,
                               const PointSet& points) {
  if (obs_values.size() != model.size()) {
    throw InvalidArgument("posterior_mean: expected " + std::to_string(model.size()) +
                          " observation values, got " + std::to_string(obs_values.size()));
  }
  if (points.dim() != model.dim()) throw InvalidArgument("posterior_mean: dimension mismatch");
  Eigen::VectorXd alpha =
      Eigen::Map<const Eigen::VectorXd>(obs_values.data(), static_cast<Eigen::Index>(obs_values.size()));
  const auto& l = model.cholesky_factor();
  l.triangularView<Eigen::Lower>().solveInPlace(alpha);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha);

  const Eigen::MatrixXd kxs = kernel_matrix(points, model.observations(), model.config());
  Eigen::VectorXd mean = kxs * alpha;
  if (model.diagonal_shift() == 0.0) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (const auto j = model.observation_index(points[i])) {
        mean(static_cast<Eigen::Index>(i)) = obs_values[*j];
      }
    }
  }
  return mean;
}

double posterior_variance(const PosteriorModel& model, Point x) {
  const double v = posterior_cov(model, x, x);
  if (v < -1e-8 * model.config().beta) {
    throw NumericalConsistency("posterior variance " + std::to_string(v) +
                               " is negative beyond tolerance; the factorization is unreliable");
  }
  return v;
}

double gamma_p(const PosteriorModel& model, const PointSet& grid, NormOrder p) {
  if (grid.dim() != model.dim()) throw InvalidArgument("gamma_p: dimension mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd w = cross_weights(model, grid[i]);
    double norm = 0.0;
    switch (p) {
      case NormOrder::One:
        norm = w.lpNorm<1>();
        break;
      case NormOrder::Two:
        norm = w.norm();
        break;
      case NormOrder::Infinity:
        norm = w.lpNorm<Eigen::Infinity>();
        break;
    }
    best = std::max(best, norm);
  }
  return best;
}

}  // namespace covfield
