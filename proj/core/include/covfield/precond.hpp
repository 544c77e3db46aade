#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "covfield/geometry.hpp"
#include "covfield/kernel.hpp"
#include "covfield/posterior.hpp"

namespace covfield {

/// Lower-triangular pattern in compressed-row form. Columns are sorted and
/// every row ends with its diagonal.
struct LowerPattern {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> cols;

  std::size_t nnz() const noexcept { return cols.size(); }
  std::size_t row_length(std::size_t i) const { return row_ptr[i + 1] - row_ptr[i]; }
};

/// Sparse lower-triangular matrix over a LowerPattern.
class SparseLower {
 public:
  SparseLower(LowerPattern pattern, std::vector<double> values);

  const LowerPattern& pattern() const noexcept { return pattern_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return pattern_.n; }
  double diagonal(std::size_t i) const { return values_[pattern_.row_ptr[i + 1] - 1]; }

  Eigen::VectorXd multiply(const Eigen::VectorXd& v) const;            // G v
  Eigen::VectorXd multiply_transpose(const Eigen::VectorXd& v) const;  // G^T v
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const;               // G^{-1} v
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& v) const;     // G^{-T} v
  Eigen::MatrixXd to_dense() const;

 private:
  LowerPattern pattern_;
  std::vector<double> values_;
};

/// Entries of R_TT = K_TT - K_TS K_SS^{-1} K_ST (plus tau^2 on the diagonal),
/// each from one dot product of precomputed columns of L^{-1} K_ST.
class SchurComplement {
 public:
  SchurComplement(const PosteriorModel& model, PointSet targets);

  std::size_t size() const noexcept { return targets_.size(); }
  const PointSet& targets() const noexcept { return targets_; }
  /// L^{-1} K_ST, r x nT.
  const Eigen::MatrixXd& half_weights() const noexcept { return w_; }

  double entry(std::size_t i, std::size_t j) const;

 private:
  PointSet targets_;
  KernelConfig cfg_;
  Eigen::MatrixXd w_;
};

/// {(i, j) : j <= i, |t_i - t_j| <= delta}.
LowerPattern geometric_pattern(const PointSet& targets, double delta);

/// Per row i: min(i, floor(cap_fraction nT)) distinct j < i drawn uniformly,
/// plus the diagonal.
LowerPattern random_pattern(std::size_t n, double cap_fraction, std::uint64_t seed);

/// Every (i, j) with j <= i.
LowerPattern full_lower_pattern(std::size_t n);

using EntryAccessor = std::function<double(std::size_t, std::size_t)>;

/// FSAI factor G with G^T G ~ A^{-1}: row i solves A[J,J] g = e_last on its
/// pattern J and is scaled so (G A G^T)_ii = 1. Throws FsaiRowError when a
/// local block cannot be factored even after jitter.
SparseLower fsai_build(const EntryAccessor& entry, const LowerPattern& pattern);

struct GeometricRule {
  double delta;
};
struct RandomRule {
  double cap_fraction;
  std::uint64_t seed;
};
using PatternRule = std::variant<GeometricRule, RandomRule>;

/// M = F F^T with F = [L 0; W_T^T G^{-1}] in landmark-first ordering, where
/// L L^T = K_SS, W_T = L^{-1} K_ST and G^T G ~ R_TT^{-1}.
class AfnPreconditioner {
 public:
  AfnPreconditioner(std::vector<std::size_t> permutation, std::size_t rank, PosteriorModel model,
                    Eigen::MatrixXd w_t, SparseLower g);

  std::size_t size() const noexcept { return perm_.size(); }
  std::size_t rank() const noexcept { return rank_; }
  /// perm[k] is the original index placed at position k; the first `rank`
  /// positions are the landmarks.
  const std::vector<std::size_t>& permutation() const noexcept { return perm_; }
  const PosteriorModel& landmark_model() const noexcept { return model_; }
  const Eigen::MatrixXd& cross_weights() const noexcept { return w_t_; }
  const SparseLower& fsai() const noexcept { return g_; }
  /// nnz(G) / nT^2.
  double fsai_nnz_fraction() const;

  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

 private:
  std::vector<std::size_t> perm_;
  std::size_t rank_;
  PosteriorModel model_;
  Eigen::MatrixXd w_t_;
  SparseLower g_;
};

/// Picks `rank` landmarks uniformly at random from `landmark_seed`, factors
/// K_SS and builds the FSAI factor of the Schur complement on the rest.
AfnPreconditioner afn_build(const PointSet& points, const KernelConfig& cfg, std::size_t rank,
                            const PatternRule& rule, std::uint64_t landmark_seed = 42);

Eigen::VectorXd afn_apply_inverse(const AfnPreconditioner& p, const Eigen::VectorXd& v);
Eigen::VectorXd afn_apply(const AfnPreconditioner& p, const Eigen::VectorXd& v);

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct PcgResult {
  Eigen::VectorXd solution;
  std::size_t iterations = 0;
  std::vector<double> residual_history;  // residual norm after each iteration
  bool converged = false;
  double final_residual = 0.0;           // |b - A x| recomputed at exit
};

/// Preconditioned conjugate gradient from x0 = 0, stopping once
/// |b - A x|_2 <= tol_abs or after max_iter iterations. A recursive residual
/// below tolerance is confirmed against the true residual before stopping;
/// on disagreement the iteration restarts from the true residual.
PcgResult pcg(const LinearOperator& a, const Eigen::VectorXd& b, const LinearOperator& precond,
              double tol_abs, std::size_t max_iter);

/// Unpreconditioned variant.
PcgResult pcg(const LinearOperator& a, const Eigen::VectorXd& b, double tol_abs, std::size_t max_iter);

enum class RhsKind { Randn, KernelTimesRandn };

struct BenchmarkOptions {
  double r_fraction = 0.2;
  double delta_over_sigma = 2.0;
  double random_cap = 0.1;
  double tol = 1e-5;
  std::size_t max_iter = 1000;
  std::uint64_t seed = 42;
  RhsKind rhs = RhsKind::Randn;
  bool plain_cg = true;
  bool random_afn = true;
  bool geometric_afn = true;
};

struct BenchmarkRow {
  std::string method;
  std::size_t iterations = 0;
  double rel_err = 0.0;
  double residual = 0.0;
  std::optional<double> fsai_nnz_fraction;
  bool converged = false;
  double seconds = 0.0;
};

/// Solves K x = b with plain CG, random-pattern AFN and geometric-pattern AFN.
/// The relative error is measured against a dense Cholesky solve.
std::vector<BenchmarkRow> precond_benchmark(const PointSet& points, const KernelConfig& cfg,
                                            const BenchmarkOptions& opt);

}  // namespace covfield
