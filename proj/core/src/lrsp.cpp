#include "covfield/lrsp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "covfield/errors.hpp"
#include "covfield/posterior.hpp"

namespace covfield {

namespace {

void check_landmarks(std::span<const std::size_t> idx, std::size_t n) {
  if (idx.empty()) throw InvalidArgument("at least one landmark is required");
  std::vector<std::size_t> sorted(idx.begin(), idx.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.back() >= n) throw InvalidArgument("landmark index out of range");
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidArgument("landmark indices must be distinct");
  }
}

}  // namespace

NystromFactor nystrom_build(const PointSet& points, std::span<const std::size_t> landmark_indices,
                            const KernelConfig& cfg) {
  cfg.validate();
  check_landmarks(landmark_indices, points.size());
  const PointSet landmarks = points.select(landmark_indices);
  auto chol = factor_with_jitter(kernel_matrix(landmarks, landmarks, cfg), cfg.beta);
  Eigen::MatrixXd w = kernel_matrix(landmarks, points, cfg);
  chol.lower.triangularView<Eigen::Lower>().solveInPlace(w);
  return NystromFactor{
      .landmark_indices = {landmark_indices.begin(), landmark_indices.end()},
      .w = std::move(w),
      .config = cfg,
      .jitter = chol.jitter,
  };
}

SymmetricPattern pattern_by_radius(const PointSet& points, double delta) {
  if (!(delta >= 0.0)) throw InvalidArgument("pattern radius must be nonnegative");
  const auto n = points.size();
  const double delta2 = delta * delta;
  const auto& c = points.coords();
  SymmetricPattern p;
  p.n = n;
  p.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ri = c.row(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || (ri - c.row(static_cast<Eigen::Index>(j))).squaredNorm() <= delta2) p.cols.push_back(j);
    }
    p.row_ptr[i + 1] = p.cols.size();
  }
  return p;
}

SparseCorrection sparse_correction(const PointSet& points, const NystromFactor& nystrom,
                                   SymmetricPattern pattern) {
  if (pattern.n != points.size() || nystrom.size() != points.size()) {
    throw InvalidArgument("sparse_correction: pattern, factor and points disagree in size");
  }
  const auto& w = nystrom.w;
  std::vector<double> values(pattern.nnz());
  for (std::size_t i = 0; i < pattern.n; ++i) {
    for (std::size_t k = pattern.row_ptr[i]; k < pattern.row_ptr[i + 1]; ++k) {
      const std::size_t j = pattern.cols[k];
      if (j < i) continue;
      const double v = kernel_eval(points[i], points[j], nystrom.config) -
                       w.col(static_cast<Eigen::Index>(i)).dot(w.col(static_cast<Eigen::Index>(j)));
      values[k] = v;
    }
  }
  // Mirror the upper triangle so stored values are exactly symmetric.
  for (std::size_t i = 0; i < pattern.n; ++i) {
    for (std::size_t k = pattern.row_ptr[i]; k < pattern.row_ptr[i + 1]; ++k) {
      const std::size_t j = pattern.cols[k];
      if (j >= i) continue;
      const auto begin = pattern.cols.begin() + static_cast<std::ptrdiff_t>(pattern.row_ptr[j]);
      const auto end = pattern.cols.begin() + static_cast<std::ptrdiff_t>(pattern.row_ptr[j + 1]);
      const auto it = std::lower_bound(begin, end, i);
      if (it == end || *it != i) throw InvalidArgument("sparse_correction: pattern is not symmetric");
      values[k] = values[static_cast<std::size_t>(it - pattern.cols.begin())];
    }
  }
  return {std::move(pattern), std::move(values)};
}

double cost_equivalent_rank(double r0, double n, double nnz) {
  if (!(n >= 1.0) || !(r0 >= 0.0) || !(nnz >= 0.0)) {
    throw InvalidArgument("cost_equivalent_rank needs N >= 1, r0 >= 0, nnz >= 0");
  }
  const double c = r0 * r0 + n * r0 + nnz;
  // Rationalized root avoids cancellation when c << N^2.
  return 2.0 * c / (n + std::sqrt(n * n + 4.0 * c));
}

Eigen::MatrixXd lowrank_dense(const NystromFactor& nystrom) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nystrom.w.cols(), nystrom.w.cols());
  k.selfadjointView<Eigen::Lower>().rankUpdate(nystrom.w.transpose());
  return k.selfadjointView<Eigen::Lower>();
}

Eigen::MatrixXd lrsp_dense(const NystromFactor& nystrom, const SparseCorrection& correction) {
  Eigen::MatrixXd k = lowrank_dense(nystrom);
  const auto& p = correction.pattern;
  if (static_cast<Eigen::Index>(p.n) != k.rows()) throw InvalidArgument("lrsp_dense: size mismatch");
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t q = p.row_ptr[i]; q < p.row_ptr[i + 1]; ++q) {
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p.cols[q])) += correction.values[q];
    }
  }
  return k;
}

double error_max_norm(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& approx) {
  if (exact.rows() != approx.rows() || exact.cols() != approx.cols()) {
    throw InvalidArgument("error_max_norm: shape mismatch");
  }
  return (exact - approx).cwiseAbs().maxCoeff();
}

double error_two_norm_randomized(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& approx,
                                 std::uint64_t seed) {
  if (exact.rows() != approx.rows() || exact.cols() != approx.cols()) {
    throw InvalidArgument("error_two_norm_randomized: shape mismatch");
  }
  Rng rng(seed);
  Eigen::VectorXd v(exact.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  const Eigen::VectorXd ev = (exact - approx) * v;
  return ev.norm() / v.norm();
}

std::vector<LrspCurveRow> lrsp_error_curve(const LrspExperiment& exp, std::size_t r0,
                                           std::span<const double> delta_multiples) {
  const auto n = exp.points.size();
  if (r0 < 1 || r0 > n) throw InvalidArgument("r0 must satisfy 1 <= r0 <= n");
  const auto perm = random_permutation(n, exp.seed);
  const Eigen::MatrixXd exact = kernel_matrix(exp.points, exp.points, exp.config);
  const auto base = nystrom_build(exp.points, std::span(perm).first(r0), exp.config);
  const Eigen::MatrixXd base_dense = lowrank_dense(base);

  std::vector<LrspCurveRow> rows;
  for (const double m : delta_multiples) {
    if (!(m >= 0.0)) throw InvalidArgument("delta multiples must be nonnegative");
    LrspCurveRow row;
    row.delta_over_sigma = m;
    auto corr = sparse_correction(exp.points, base, pattern_by_radius(exp.points, m * exp.config.sigma));
    row.nnz = corr.pattern.nnz();
    row.equiv_rank = cost_equivalent_rank(static_cast<double>(r0), static_cast<double>(n),
                                          static_cast<double>(row.nnz));
    row.lr_rank = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(row.equiv_rank)));
    const Eigen::MatrixXd lrsp = lrsp_dense(base, corr);
    const Eigen::MatrixXd lr =
        row.lr_rank == r0 ? base_dense
                          : lowrank_dense(nystrom_build(exp.points, std::span(perm).first(row.lr_rank), exp.config));
    row.lr_max = error_max_norm(exact, lr);
    row.lrsp_max = error_max_norm(exact, lrsp);
    row.lr_2norm = error_two_norm_randomized(exact, lr, exp.seed);
    row.lrsp_2norm = error_two_norm_randomized(exact, lrsp, exp.seed);
    rows.push_back(row);
  }
  return rows;
}

std::vector<LowRankRow> lowrank_error_sweep(const LrspExperiment& exp, std::span<const std::size_t> ranks) {
  const auto n = exp.points.size();
  const auto perm = random_permutation(n, exp.seed);
  const Eigen::MatrixXd exact = kernel_matrix(exp.points, exp.points, exp.config);
  std::vector<LowRankRow> rows;
  for (const auto k : ranks) {
    if (k < 1 || k > n) throw InvalidArgument("rank " + std::to_string(k) + " outside [1, n]");
    const Eigen::MatrixXd lr = lowrank_dense(nystrom_build(exp.points, std::span(perm).first(k), exp.config));
    rows.push_back({k, error_max_norm(exact, lr), error_two_norm_randomized(exact, lr, exp.seed)});
  }
  return rows;
}

}  // namespace covfield
