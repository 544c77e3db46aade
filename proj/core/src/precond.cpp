#include "covfield/precond.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "covfield/errors.hpp"

namespace covfield {

namespace {

using Clock = std::chrono::steady_clock;

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

void check_length(const Eigen::VectorXd& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw InvalidArgument(std::string(what) + ": vector length " + std::to_string(v.size()) +
                          " does not match operator size " + std::to_string(n));
  }
}

void check_lower_pattern(const LowerPattern& p) {
  if (p.row_ptr.size() != p.n + 1 || p.row_ptr.front() != 0 || p.row_ptr.back() != p.cols.size()) {
    throw InvalidArgument("malformed lower pattern");
  }
  for (std::size_t i = 0; i < p.n; ++i) {
    const auto b = p.row_ptr[i];
    const auto e = p.row_ptr[i + 1];
    if (e <= b || p.cols[e - 1] != i) throw InvalidArgument("lower pattern row " + std::to_string(i) + " lacks its diagonal");
    for (auto k = b + 1; k < e; ++k) {
      if (p.cols[k - 1] >= p.cols[k]) throw InvalidArgument("lower pattern columns must be strictly increasing");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// SparseLower

SparseLower::SparseLower(LowerPattern pattern, std::vector<double> values)
    : pattern_(std::move(pattern)), values_(std::move(values)) {
  check_lower_pattern(pattern_);
  if (values_.size() != pattern_.nnz()) throw InvalidArgument("SparseLower: value count mismatch");
}

Eigen::VectorXd SparseLower::multiply(const Eigen::VectorXd& v) const {
  check_length(v, size(), "SparseLower::multiply");
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < size(); ++i) {
    double acc = 0.0;
    for (auto k = pattern_.row_ptr[i]; k < pattern_.row_ptr[i + 1]; ++k) acc += values_[k] * v(ix(pattern_.cols[k]));
    out(ix(i)) = acc;
  }
  return out;
}

Eigen::VectorXd SparseLower::multiply_transpose(const Eigen::VectorXd& v) const {
  check_length(v, size(), "SparseLower::multiply_transpose");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (std::size_t i = 0; i < size(); ++i) {
    const double vi = v(ix(i));
    for (auto k = pattern_.row_ptr[i]; k < pattern_.row_ptr[i + 1]; ++k) out(ix(pattern_.cols[k])) += values_[k] * vi;
  }
  return out;
}

Eigen::VectorXd SparseLower::solve(const Eigen::VectorXd& v) const {
  check_length(v, size(), "SparseLower::solve");
  Eigen::VectorXd x(v.size());
  for (std::size_t i = 0; i < size(); ++i) {
    const auto last = pattern_.row_ptr[i + 1] - 1;
    double acc = v(ix(i));
    for (auto k = pattern_.row_ptr[i]; k < last; ++k) acc -= values_[k] * x(ix(pattern_.cols[k]));
    x(ix(i)) = acc / values_[last];
  }
  return x;
}

Eigen::VectorXd SparseLower::solve_transpose(const Eigen::VectorXd& v) const {
  check_length(v, size(), "SparseLower::solve_transpose");
  Eigen::VectorXd x = v;
  for (std::size_t i = size(); i-- > 0;) {
    const auto last = pattern_.row_ptr[i + 1] - 1;
    x(ix(i)) /= values_[last];
    const double xi = x(ix(i));
    for (auto k = pattern_.row_ptr[i]; k < last; ++k) x(ix(pattern_.cols[k])) -= values_[k] * xi;
  }
  return x;
}

Eigen::MatrixXd SparseLower::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ix(size()), ix(size()));
  for (std::size_t i = 0; i < size(); ++i) {
    for (auto k = pattern_.row_ptr[i]; k < pattern_.row_ptr[i + 1]; ++k) m(ix(i), ix(pattern_.cols[k])) = values_[k];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Schur complement and patterns

SchurComplement::SchurComplement(const PosteriorModel& model, PointSet targets)
    : targets_(std::move(targets)), cfg_(model.config()), w_(model.half_weights(targets_)) {}

double SchurComplement::entry(std::size_t i, std::size_t j) const {
  if (i >= size() || j >= size()) throw InvalidArgument("SchurComplement::entry: index out of range");
  double v = kernel_eval(targets_[i], targets_[j], cfg_) - w_.col(ix(i)).dot(w_.col(ix(j)));
  if (i == j) v += cfg_.tau * cfg_.tau;
  return v;
}

LowerPattern geometric_pattern(const PointSet& targets, double delta) {
  if (!(delta >= 0.0)) throw InvalidArgument("geometric_pattern: delta must be nonnegative");
  const auto n = targets.size();
  const auto& c = targets.coords();
  const double delta2 = delta * delta;
  LowerPattern p;
  p.n = n;
  p.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if ((c.row(ix(i)) - c.row(ix(j))).squaredNorm() <= delta2) p.cols.push_back(j);
    }
    p.cols.push_back(i);
    p.row_ptr[i + 1] = p.cols.size();
  }
  return p;
}

LowerPattern random_pattern(std::size_t n, double cap_fraction, std::uint64_t seed) {
  if (!(cap_fraction > 0.0 && cap_fraction <= 1.0)) {
    throw InvalidArgument("random_pattern: cap fraction must lie in (0, 1]");
  }
  const auto cap = static_cast<std::size_t>(std::floor(cap_fraction * static_cast<double>(n)));
  Rng rng(seed);
  LowerPattern p;
  p.n = n;
  p.row_ptr.assign(n + 1, 0);
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = std::min(i, cap);
    pool.resize(i);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // Partial Fisher-Yates: the first m entries are a uniform m-subset.
    for (std::size_t k = 0; k < m; ++k) std::swap(pool[k], pool[k + rng.index(i - k)]);
    std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
    p.cols.insert(p.cols.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
    p.cols.push_back(i);
    p.row_ptr[i + 1] = p.cols.size();
  }
  return p;
}

LowerPattern full_lower_pattern(std::size_t n) {
  LowerPattern p;
  p.n = n;
  p.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) p.cols.push_back(j);
    p.row_ptr[i + 1] = p.cols.size();
  }
  return p;
}

// ---------------------------------------------------------------------------
// FSAI

SparseLower fsai_build(const EntryAccessor& entry, const LowerPattern& pattern) {
  check_lower_pattern(pattern);
  std::vector<double> values(pattern.nnz());
  for (std::size_t i = 0; i < pattern.n; ++i) {
    const auto b = pattern.row_ptr[i];
    const auto m = ix(pattern.row_length(i));
    Eigen::MatrixXd local(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index c = 0; c <= a; ++c) {
        local(a, c) = entry(pattern.cols[b + static_cast<std::size_t>(a)], pattern.cols[b + static_cast<std::size_t>(c)]);
        local(c, a) = local(a, c);
      }
    }
    const double scale = local.diagonal().cwiseAbs().maxCoeff();
    JitteredCholesky chol;
    try {
      chol = factor_with_jitter(local, scale > 0.0 ? scale : 1.0);
    } catch (const IllConditionedKernel& e) {
      throw FsaiRowError(i, e.what());
    }
    // With A = L L^T, A^{-1} e_m = L^{-T} e_m / L_mm, and the diagonal entry
    // of that solution is 1 / L_mm^2. The normalized row is L^{-T} e_m.
    Eigen::VectorXd row = Eigen::VectorXd::Zero(m);
    row(m - 1) = 1.0;
    chol.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(row);
    if (!row.allFinite() || !(row(m - 1) > 0.0)) throw FsaiRowError(i, "non-finite local solve");
    for (Eigen::Index a = 0; a < m; ++a) values[b + static_cast<std::size_t>(a)] = row(a);
  }
  return SparseLower(pattern, std::move(values));
}

// ---------------------------------------------------------------------------
// AFN

AfnPreconditioner::AfnPreconditioner(std::vector<std::size_t> permutation, std::size_t rank,
                                     PosteriorModel model, Eigen::MatrixXd w_t, SparseLower g)
    : perm_(std::move(permutation)), rank_(rank), model_(std::move(model)), w_t_(std::move(w_t)), g_(std::move(g)) {}

double AfnPreconditioner::fsai_nnz_fraction() const {
  const auto nt = static_cast<double>(g_.size());
  return static_cast<double>(g_.pattern().nnz()) / (nt * nt);
}

Eigen::VectorXd AfnPreconditioner::apply_inverse(const Eigen::VectorXd& v) const {
  check_length(v, size(), "afn_apply_inverse");
  const auto r = ix(rank_);
  const auto nt = ix(size() - rank_);
  const auto& l = model_.cholesky_factor();

  Eigen::VectorXd vs(r);
  Eigen::VectorXd vt(nt);
  for (Eigen::Index k = 0; k < r; ++k) vs(k) = v(ix(perm_[static_cast<std::size_t>(k)]));
  for (Eigen::Index k = 0; k < nt; ++k) vt(k) = v(ix(perm_[rank_ + static_cast<std::size_t>(k)]));

  // F^{-1} v
  l.triangularView<Eigen::Lower>().solveInPlace(vs);
  const Eigen::VectorXd ut = g_.multiply(vt - w_t_.transpose() * vs);
  // F^{-T} u
  const Eigen::VectorXd zt = g_.multiply_transpose(ut);
  Eigen::VectorXd zs = vs - w_t_ * zt;
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(zs);

  Eigen::VectorXd out(v.size());
  for (Eigen::Index k = 0; k < r; ++k) out(ix(perm_[static_cast<std::size_t>(k)])) = zs(k);
  for (Eigen::Index k = 0; k < nt; ++k) out(ix(perm_[rank_ + static_cast<std::size_t>(k)])) = zt(k);
  return out;
}

Eigen::VectorXd AfnPreconditioner::apply(const Eigen::VectorXd& v) const {
  check_length(v, size(), "afn_apply");
  const auto r = ix(rank_);
  const auto nt = ix(size() - rank_);
  const auto& l = model_.cholesky_factor();

  Eigen::VectorXd vs(r);
  Eigen::VectorXd vt(nt);
  for (Eigen::Index k = 0; k < r; ++k) vs(k) = v(ix(perm_[static_cast<std::size_t>(k)]));
  for (Eigen::Index k = 0; k < nt; ++k) vt(k) = v(ix(perm_[rank_ + static_cast<std::size_t>(k)]));

  // F^T v
  const Eigen::VectorXd as = l.transpose() * vs + w_t_ * vt;
  const Eigen::VectorXd at = g_.solve_transpose(vt);
  // F a
  const Eigen::VectorXd os = l * as;
  const Eigen::VectorXd ot = w_t_.transpose() * as + g_.solve(at);

  Eigen::VectorXd out(v.size());
  for (Eigen::Index k = 0; k < r; ++k) out(ix(perm_[static_cast<std::size_t>(k)])) = os(k);
  for (Eigen::Index k = 0; k < nt; ++k) out(ix(perm_[rank_ + static_cast<std::size_t>(k)])) = ot(k);
  return out;
}

AfnPreconditioner afn_build(const PointSet& points, const KernelConfig& cfg, std::size_t rank,
                            const PatternRule& rule, std::uint64_t landmark_seed) {
  cfg.validate();
  const auto n = points.size();
  if (rank < 1 || rank >= n) throw InvalidArgument("afn_build: rank must satisfy 1 <= r < n");
  auto perm = random_permutation(n, landmark_seed);
  const std::span<const std::size_t> all(perm);
  PosteriorModel model = fit(points.select(all.first(rank)), cfg);
  SchurComplement schur(model, points.select(all.subspan(rank)));

  const LowerPattern pattern = std::visit(
      [&](const auto& r) -> LowerPattern {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, GeometricRule>) {
          return geometric_pattern(schur.targets(), r.delta);
        } else {
          return random_pattern(schur.size(), r.cap_fraction, r.seed);
        }
      },
      rule);
  SparseLower g = fsai_build([&](std::size_t i, std::size_t j) { return schur.entry(i, j); }, pattern);
  Eigen::MatrixXd w_t = schur.half_weights();
  return AfnPreconditioner(std::move(perm), rank, std::move(model), std::move(w_t), std::move(g));
}

Eigen::VectorXd afn_apply_inverse(const AfnPreconditioner& p, const Eigen::VectorXd& v) {
  return p.apply_inverse(v);
}

Eigen::VectorXd afn_apply(const AfnPreconditioner& p, const Eigen::VectorXd& v) { return p.apply(v); }

// ---------------------------------------------------------------------------
// PCG

PcgResult pcg(const LinearOperator& a, const Eigen::VectorXd& b, const LinearOperator& precond,
              double tol_abs, std::size_t max_iter) {
  if (!(tol_abs > 0.0)) throw InvalidArgument("pcg: tolerance must be positive");
  if (!b.allFinite()) throw InvalidArgument("pcg: right-hand side is not finite");
  PcgResult res;
  res.solution = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = b;
  double r_norm = r.norm();
  if (r_norm <= tol_abs) {
    res.converged = true;
    res.final_residual = r_norm;
    return res;
  }
  Eigen::VectorXd z = precond(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);

  auto& x = res.solution;
  while (res.iterations < max_iter) {
    const Eigen::VectorXd ap = a(p);
    const double pap = p.dot(ap);
    const double alpha = rz / pap;
    if (!std::isfinite(alpha)) {
      throw Divergence("pcg: step length is not finite at iteration " + std::to_string(res.iterations + 1));
    }
    x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    ++res.iterations;
    r_norm = r.norm();
    if (!std::isfinite(r_norm) || !x.allFinite()) {
      throw Divergence("pcg: non-finite iterate at iteration " + std::to_string(res.iterations));
    }
    bool restart = false;
    if (r_norm <= tol_abs) {
      Eigen::VectorXd true_r = b - a(x);
      const double true_norm = true_r.norm();
      if (true_norm <= tol_abs) {
        res.residual_history.push_back(true_norm);
        res.converged = true;
        break;
      }
      r = std::move(true_r);
      r_norm = true_norm;
      restart = true;
    }
    res.residual_history.push_back(r_norm);
    z = precond(r);
    const double rz_next = r.dot(z);
    if (restart) {
      p = z;
    } else {
      p = z + (rz_next / rz) * p;
    }
    rz = rz_next;
  }
  res.final_residual = (b - a(x)).norm();
  return res;
}

PcgResult pcg(const LinearOperator& a, const Eigen::VectorXd& b, double tol_abs, std::size_t max_iter) {
  return pcg(a, b, [](const Eigen::VectorXd& v) { return v; }, tol_abs, max_iter);
}

// ---------------------------------------------------------------------------
// Benchmark

std::vector<BenchmarkRow> precond_benchmark(const PointSet& points, const KernelConfig& cfg,
                                            const BenchmarkOptions& opt) {
  cfg.validate();
  const auto n = points.size();
  if (!(opt.r_fraction > 0.0 && opt.r_fraction < 1.0)) throw InvalidArgument("r fraction must lie in (0, 1)");
  const auto rank = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opt.r_fraction * static_cast<double>(n))));
  if (rank >= n) throw InvalidArgument("landmark count must be smaller than n");

  Eigen::MatrixXd k = kernel_matrix(points, points, cfg);
  k.diagonal().array() += cfg.tau * cfg.tau;
  const LinearOperator apply_k = [&k](const Eigen::VectorXd& v) -> Eigen::VectorXd { return k * v; };

  Rng rng(opt.seed);
  Eigen::VectorXd b(ix(n));
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.normal();
  if (opt.rhs == RhsKind::KernelTimesRandn) {
    b = k * b;
    b /= b.norm();
  }

  const auto chol = factor_with_jitter(k, cfg.beta);
  Eigen::VectorXd reference = b;
  chol.lower.triangularView<Eigen::Lower>().solveInPlace(reference);
  chol.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(reference);
  const double ref_norm = reference.norm();

  std::vector<BenchmarkRow> rows;
  auto record = [&](std::string name, const PcgResult& res, std::optional<double> frac, Clock::time_point start) {
    BenchmarkRow row;
    row.method = std::move(name);
    row.iterations = res.iterations;
    row.rel_err = (res.solution - reference).norm() / ref_norm;
    row.residual = res.final_residual;
    row.fsai_nnz_fraction = frac;
    row.converged = res.converged;
    row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    rows.push_back(std::move(row));
  };

  if (opt.plain_cg) {
    const auto start = Clock::now();
    record("plain-CG", pcg(apply_k, b, opt.tol, opt.max_iter), std::nullopt, start);
  }
  const auto run_afn = [&](std::string name, const PatternRule& rule) {
    const auto start = Clock::now();
    const auto p = afn_build(points, cfg, rank, rule, opt.seed);
    const LinearOperator m_inv = [&p](const Eigen::VectorXd& v) { return p.apply_inverse(v); };
    record(std::move(name), pcg(apply_k, b, m_inv, opt.tol, opt.max_iter), p.fsai_nnz_fraction(), start);
  };
  if (opt.random_afn) run_afn("random-precond-CG", RandomRule{opt.random_cap, opt.seed + 1});
  if (opt.geometric_afn) run_afn("geometric-precond-CG", GeometricRule{opt.delta_over_sigma * cfg.sigma});
  return rows;
}

}  // namespace covfield
