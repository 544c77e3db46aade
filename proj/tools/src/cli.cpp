#include "covfield_cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "covfield/bounds.hpp"
#include "covfield/csv_writer.hpp"
#include "covfield/errors.hpp"
#include "covfield/estimators.hpp"
#include "covfield/geometry.hpp"
#include "covfield/kernel.hpp"
#include "covfield/lrsp.hpp"
#include "covfield/posterior.hpp"
#include "covfield/precond.hpp"

namespace covfield::cli {

namespace {

using Clock = std::chrono::steady_clock;

/// A flag value that parsed but violates a precondition.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

// ---------------------------------------------------------------------------
// Option groups

struct Common {
  std::string out;
  std::uint64_t seed = 42;
  bool no_timestamp = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Output CSV path")->required();
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_flag("--no-timestamp", c.no_timestamp, "Omit the timestamp comment line");
}

struct Observations {
  std::string preset = "uniform1d";
  std::string obs_path;
};

void add_observations(CLI::App* cmd, Observations& o) {
  auto* preset = cmd->add_option("--preset", o.preset, "Observation preset")
                     ->check(CLI::IsMember({"uniform1d", "nonuniform1d"}))
                     ->capture_default_str();
  auto* obs = cmd->add_option("--obs", o.obs_path, "CSV file of observation points")->check(CLI::ExistingFile);
  preset->excludes(obs);
}

PointSet load_observations(const Observations& o) {
  return o.obs_path.empty() ? preset_observations(o.preset) : load_csv(o.obs_path);
}

struct Hyper {
  double sigma = 0.1;
  double beta = 1.0;
  double tau = 0.0;
};

void add_hyper(CLI::App* cmd, Hyper& h, bool with_sigma = true) {
  if (with_sigma) cmd->add_option("--sigma", h.sigma, "Kernel bandwidth")->capture_default_str();
  cmd->add_option("--beta", h.beta, "Prior variance")->capture_default_str();
  cmd->add_option("--tau", h.tau, "Observation noise standard deviation")->capture_default_str();
}

KernelConfig validated(const Hyper& h) {
  require(std::isfinite(h.sigma) && h.sigma > 0.0, "--sigma must be positive");
  require(std::isfinite(h.beta) && h.beta > 0.0, "--beta must be positive");
  require(std::isfinite(h.tau) && h.tau >= 0.0, "--tau must be nonnegative");
  return KernelConfig{h.sigma, h.beta, h.tau};
}

struct Source {
  std::string gen;
  std::string input;
  std::size_t n = 1000;
  std::size_t d = 3;
  std::size_t subsample = 0;
};

void add_source(CLI::App* cmd, Source& s) {
  auto* gen = cmd->add_option("--gen", s.gen, "Synthetic point generator")->check(CLI::IsMember({"randn"}));
  auto* input = cmd->add_option("--input", s.input, "CSV file of points (standardized on load)")
                    ->check(CLI::ExistingFile);
  gen->excludes(input);
  cmd->add_option("--n", s.n, "Number of generated points")->capture_default_str();
  cmd->add_option("--d", s.d, "Dimension of generated points")->capture_default_str();
  cmd->add_option("--subsample", s.subsample, "Seeded subsample size for CSV input (0 keeps all)");
}

void validate_source(const Source& s) {
  require(!s.gen.empty() || !s.input.empty(), "one of --gen or --input is required");
  if (s.input.empty()) {
    require(s.n >= 2, "--n must be at least 2");
    require(s.d >= 1, "--d must be at least 1");
  }
}

PointSet load_source(const Source& s, std::uint64_t seed) {
  if (s.input.empty()) return generate_gaussian_cloud(s.n, s.d, seed);
  PointSet raw = load_csv(s.input);
  if (s.subsample > 0) {
    if (s.subsample > raw.size()) {
      throw InvalidArgument("--subsample " + std::to_string(s.subsample) + " exceeds the " +
                            std::to_string(raw.size()) + " rows of the input");
    }
    raw = subsample(raw, s.subsample, seed);
  }
  return standardize(raw);
}

template <typename T>
std::vector<T> parse_sweep(const std::string& text, const char* flag) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      require(used == item.size(), "");
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + " expects lo:hi:step, got '" + text + "'");
    }
  }
  require(parts.size() == 3, std::string(flag) + " expects lo:hi:step, got '" + text + "'");
  const double lo = parts[0];
  const double hi = parts[1];
  const double step = parts[2];
  require(step > 0.0 && hi >= lo && lo >= 0.0, std::string(flag) + " needs 0 <= lo <= hi and step > 0");
  std::vector<T> out;
  for (std::size_t k = 0;; ++k) {
    const double v = lo + step * static_cast<double>(k);
    if (v > hi + 1e-9 * step) break;
    out.push_back(static_cast<T>(std::is_integral_v<T> ? std::llround(v) : v));
  }
  return out;
}

std::filesystem::path sibling_path(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  return p.parent_path() / (p.stem().string() + suffix + p.extension().string());
}

void require_1d(const PointSet& s, const char* cmd) {
  if (s.dim() != 1) {
    throw UnsupportedDimension(std::string(cmd) + " needs one-dimensional observations, got d=" +
                               std::to_string(s.dim()));
  }
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns the number of data rows written.

struct FieldArgs {
  Common common;
  Observations obs;
  Hyper hyper;
  std::size_t grid = 101;
};

std::size_t cmd_field(const FieldArgs& a) {
  const auto cfg = validated(a.hyper);
  require(a.grid >= 2, "--grid must be at least 2");
  auto s = load_observations(a.obs);
  require_1d(s, "field");
  const auto model = fit(std::move(s), cfg);
  const auto grid = equispaced(a.grid);
  const Eigen::MatrixXd r = posterior_cov_matrix(model, grid, grid);
  CsvWriter csv(a.common.out, {"x", "y", "value"}, !a.common.no_timestamp);
  for (std::size_t i = 0; i < a.grid; ++i) {
    for (std::size_t j = 0; j < a.grid; ++j) {
      csv.row({grid[i][0], grid[j][0], r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    }
  }
  return csv.rows_written();
}

struct Field2dArgs {
  Common common;
  Hyper hyper;
  std::size_t grid = 101;
  std::size_t n_obs = 20;
  double radius = 0.4;
  std::vector<double> xstar;
};

std::size_t cmd_field2d(const Field2dArgs& a) {
  const auto cfg = validated(a.hyper);
  require(a.grid >= 2, "--grid must be at least 2");
  require(a.n_obs >= 1, "--n-obs must be at least 1");
  require(a.radius > 0.0, "--radius must be positive");
  require(a.xstar.empty() || a.xstar.size() == 2, "--xstar takes two coordinates");
  if (a.xstar.size() == 2) {
    require(std::hypot(a.xstar[0], a.xstar[1]) <= a.radius, "--xstar must lie in the disk");
  }

  Rng rng(a.common.seed);
  auto in_disk = [&] {
    while (true) {
      const double u = (2.0 * rng.uniform() - 1.0) * a.radius;
      const double v = (2.0 * rng.uniform() - 1.0) * a.radius;
      if (u * u + v * v <= a.radius * a.radius) return std::array<double, 2>{u, v};
    }
  };
  std::vector<double> flat;
  for (std::size_t i = 0; i < a.n_obs; ++i) {
    const auto p = in_disk();
    flat.insert(flat.end(), p.begin(), p.end());
  }
  const auto xs = a.xstar.size() == 2 ? std::array<double, 2>{a.xstar[0], a.xstar[1]} : in_disk();
  const auto model = fit(PointSet::from_rows(flat, 2), cfg);

  std::vector<double> grid_flat;
  const double step = 2.0 * a.radius / static_cast<double>(a.grid - 1);
  for (std::size_t i = 0; i < a.grid; ++i) {
    for (std::size_t j = 0; j < a.grid; ++j) {
      const double u = -a.radius + step * static_cast<double>(i);
      const double v = -a.radius + step * static_cast<double>(j);
      if (u * u + v * v <= a.radius * a.radius) {
        grid_flat.push_back(u);
        grid_flat.push_back(v);
      }
    }
  }
  const auto grid = PointSet::from_rows(grid_flat, 2);
  const auto xstar_set = PointSet::from_rows(xs, 2);
  const Eigen::MatrixXd r = posterior_cov_matrix(model, xstar_set, grid);

  CsvWriter csv(a.common.out, {"kind", "y1", "y2", "value"}, !a.common.no_timestamp);
  csv.row({"xstar", format_number(xs[0]), format_number(xs[1]), "0"});
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto s = model.observations()[i];
    csv.row({"obs", format_number(s[0]), format_number(s[1]), "0"});
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    csv.row({"grid", format_number(grid[k][0]), format_number(grid[k][1]),
             format_number(std::abs(r(0, static_cast<Eigen::Index>(k))))});
  }
  return csv.rows_written();
}

struct BoundsArgs {
  Common common;
  Observations obs;
  Hyper hyper;
  int condition = 1;
  double ystar = 0.15;
  std::optional<double> sigma;
  std::size_t grid = 1001;
};

std::size_t cmd_bounds(BoundsArgs a) {
  static constexpr double kDefaultSigma[] = {0.05, 0.05, 0.4};
  require(a.condition >= 1 && a.condition <= 3, "--condition must be 1, 2 or 3");
  a.hyper.sigma = a.sigma.value_or(kDefaultSigma[a.condition - 1]);
  const auto cfg = validated(a.hyper);
  require(a.grid >= 2, "--grid must be at least 2");
  require(std::isfinite(a.ystar), "--ystar must be finite");
  auto s = load_observations(a.obs);
  require_1d(s, "bounds");
  const auto model = fit(std::move(s), cfg);
  const auto grid = equispaced(a.grid);
  const double y[] = {a.ystar};
  const EtaRegion region = a.condition == 1 ? EtaRegion::Far : a.condition == 2 ? EtaRegion::Near : EtaRegion::All;

  const auto e1 = eta_curves(model, y, grid, EtaKind::Eta1, region);
  const auto e2 = eta_curves(model, y, grid, EtaKind::Eta2, region);
  const auto e3 = eta_curves(model, y, grid, EtaKind::Eta3, region);
  CsvWriter csv(a.common.out, {"x", "abs_r", "eta1", "eta2", "eta3", "in_region"}, !a.common.no_timestamp);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv.row({grid[i][0], e1.exact[i], e1.values[i], e2.values[i], e3.values[i], e1.in_region[i] ? 1.0 : 0.0});
  }
  return csv.rows_written();
}

struct EstimateArgs {
  Common common;
  Observations obs;
  Hyper hyper;
  std::size_t grid = 101;
  std::string estimator = "auto";
};

std::size_t cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  const auto cfg = validated(a.hyper);
  require(a.grid >= 2, "--grid must be at least 2");
  auto s = load_observations(a.obs);
  require_1d(s, "estimate");
  const auto model = fit(std::move(s), cfg);
  const auto grid = equispaced(a.grid);
  const FieldRegime regime = a.estimator == "small"   ? FieldRegime::Small
                             : a.estimator == "large" ? FieldRegime::Large
                                                      : regime_for(cfg.sigma);
  const Eigen::MatrixXd exact = exact_abs_field(model, grid);
  const Eigen::MatrixXd rel = relative_field(model.observations(), cfg, grid, regime);
  const auto est = absolute_field(std::span(rel.data(), static_cast<std::size_t>(rel.size())), exact.maxCoeff());
  const double jaccard = top_decile_jaccard(std::span(exact.data(), static_cast<std::size_t>(exact.size())), est);

  CsvWriter csv(a.common.out, {"x", "y", "exact", "estimate"}, !a.common.no_timestamp);
  const auto n = static_cast<Eigen::Index>(a.grid);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // Column-major storage: entry (i, j) sits at i + j n.
      csv.row({grid[static_cast<std::size_t>(i)][0], grid[static_cast<std::size_t>(j)][0], exact(i, j),
               est[static_cast<std::size_t>(i + j * n)]});
    }
  }
  out << "estimator=" << (regime == FieldRegime::Small ? "g_small" : "g_large")
      << " top_decile_jaccard=" << format_number(jaccard) << '\n';
  return csv.rows_written();
}

struct GpDemoArgs {
  Common common;
  Hyper hyper{0.06332725946674625, 0.9453058162554949, 0.0};
  std::size_t n_obs = 15;
  std::size_t grid = 1001;
};

std::size_t cmd_gp_demo(const GpDemoArgs& a) {
  const auto cfg = validated(a.hyper);
  require(a.n_obs >= 2, "--n-obs must be at least 2");
  require(a.grid >= 2, "--grid must be at least 2");
  auto f = [](double x) { return std::cos(25.0 * x * x); };

  Rng rng(a.common.seed);
  std::vector<double> xs(a.n_obs);
  for (auto& x : xs) x = rng.uniform();
  std::sort(xs.begin(), xs.end());
  std::vector<double> ys(xs.size());
  std::transform(xs.begin(), xs.end(), ys.begin(), f);
  const auto model = fit(PointSet::from_scalars(xs), cfg);
  const auto refs = reference_points_1d(model);

  std::vector<double> query;
  for (std::size_t i = 0; i < a.grid; ++i) query.push_back(static_cast<double>(i) / static_cast<double>(a.grid - 1));
  query.insert(query.end(), xs.begin(), xs.end());
  std::sort(query.begin(), query.end());
  query.erase(std::unique(query.begin(), query.end()), query.end());
  const auto q = PointSet::from_scalars(query);
  const Eigen::VectorXd mean = posterior_mean(model, ys, q);

  CsvWriter csv(a.common.out, {"x", "f", "mean", "true_std", "est_std", "is_obs"}, !a.common.no_timestamp);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double var = posterior_variance(model, q[i]);
    const double est = var_auto(q[i], model, refs);
    const bool is_obs = model.observation_index(q[i]).has_value();
    csv.row({query[i], f(query[i]), mean(static_cast<Eigen::Index>(i)), std::sqrt(std::max(var, 0.0)),
             std::sqrt(est), is_obs ? 1.0 : 0.0});
  }
  return csv.rows_written();
}

struct SvdArgs {
  Common common;
  Hyper hyper{0.1, 1.0, 0.0};
  std::size_t equispaced_n = 500;
  std::size_t k = 50;
};

std::size_t cmd_svd(const SvdArgs& a) {
  const auto cfg = validated(a.hyper);
  require(a.equispaced_n >= 1, "--equispaced must be at least 1");
  require(a.k >= 1 && a.k <= a.equispaced_n, "--k must lie in [1, n]");
  const auto x = equispaced(a.equispaced_n);
  const Eigen::MatrixXd k = kernel_matrix(x, x, cfg);
  // K is symmetric, so its singular values are the eigenvalue magnitudes.
  Eigen::VectorXd sv = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs();
  std::sort(sv.begin(), sv.end(), std::greater<>());
  CsvWriter csv(a.common.out, {"index", "singular_value"}, !a.common.no_timestamp);
  for (std::size_t i = 0; i < a.k; ++i) {
    csv.row({format_number(i + 1), format_number(sv(static_cast<Eigen::Index>(i)))});
  }
  return csv.rows_written();
}

struct LrspArgs {
  Common common;
  Source source;
  Hyper hyper{0.5, 1.0, 0.0};
  std::size_t r0 = 100;
  std::string delta_sweep = "1:10:1";
  std::string rank_sweep = "100:660:40";
  std::string rank_out;
};

std::size_t cmd_lrsp(const LrspArgs& a, std::ostream& out) {
  const auto cfg = validated(a.hyper);
  validate_source(a.source);
  const auto deltas = parse_sweep<double>(a.delta_sweep, "--delta-sweep");
  const auto ranks = parse_sweep<std::size_t>(a.rank_sweep, "--rank-sweep");
  require(a.r0 >= 1, "--r0 must be at least 1");
  if (a.source.input.empty()) {
    require(a.r0 <= a.source.n, "--r0 must not exceed --n");
    require(ranks.empty() || (ranks.front() >= 1 && ranks.back() <= a.source.n), "--rank-sweep must stay within [1, n]");
  }

  const auto points = load_source(a.source, a.common.seed);
  const LrspExperiment exp{points, cfg, a.common.seed};
  const auto curve = lrsp_error_curve(exp, a.r0, deltas);
  CsvWriter csv(a.common.out, {"equiv_rank", "lr_max", "lrsp_max", "lr_2norm", "lrsp_2norm"},
                !a.common.no_timestamp);
  for (const auto& row : curve) csv.row({row.equiv_rank, row.lr_max, row.lrsp_max, row.lr_2norm, row.lrsp_2norm});

  const auto rank_path = a.rank_out.empty() ? sibling_path(a.common.out, "_ranks") : std::filesystem::path(a.rank_out);
  const auto sweep = lowrank_error_sweep(exp, ranks);
  CsvWriter rank_csv(rank_path, {"rank", "lr_max", "lr_2norm"}, !a.common.no_timestamp);
  for (const auto& row : sweep) {
    rank_csv.row({format_number(row.rank), format_number(row.lr_max), format_number(row.lr_2norm)});
  }
  out << "rank sweep: " << rank_csv.rows_written() << " rows to " << rank_path.string() << '\n';
  return csv.rows_written();
}

struct PrecondArgs {
  Common common;
  Source source;
  Hyper hyper;
  std::optional<double> sigma;
  double percentile = 2.0;
  double r_fraction = 0.2;
  std::optional<double> delta;
  double random_cap = 0.1;
  double tol = 1e-5;
  std::size_t maxit = 1000;
  std::string rhs = "randn";
  std::vector<std::string> methods{"1", "2", "3"};
};

std::size_t cmd_precond(PrecondArgs a, std::ostream& out) {
  validate_source(a.source);
  require(a.percentile > 0.0 && a.percentile < 100.0, "--percentile must lie in (0, 100)");
  require(a.r_fraction > 0.0 && a.r_fraction < 1.0, "--r-fraction must lie in (0, 1)");
  require(a.random_cap > 0.0 && a.random_cap <= 1.0, "--random-cap must lie in (0, 1]");
  require(a.tol > 0.0, "--tol must be positive");
  require(a.maxit >= 1, "--maxit must be at least 1");
  if (a.sigma) a.hyper.sigma = *a.sigma;
  if (a.delta) require(*a.delta >= 0.0, "--delta must be nonnegative");
  validated(a.hyper);

  const auto points = load_source(a.source, a.common.seed);
  if (!a.sigma) a.hyper.sigma = bandwidth_percentile(points, a.percentile);
  const auto cfg = validated(a.hyper);

  BenchmarkOptions opt;
  opt.r_fraction = a.r_fraction;
  opt.delta_over_sigma = a.delta ? *a.delta / cfg.sigma : 2.0;
  opt.random_cap = a.random_cap;
  opt.tol = a.tol;
  opt.max_iter = a.maxit;
  opt.seed = a.common.seed;
  opt.rhs = a.rhs == "kz" ? RhsKind::KernelTimesRandn : RhsKind::Randn;
  auto has = [&](const char* m) { return std::find(a.methods.begin(), a.methods.end(), m) != a.methods.end(); };
  opt.plain_cg = has("1");
  opt.random_afn = has("2");
  opt.geometric_afn = has("3");

  const auto rows = precond_benchmark(points, cfg, opt);
  CsvWriter csv(a.common.out, {"method", "iterations", "rel_err", "residual", "fsai_nnz_fraction"},
                !a.common.no_timestamp);
  for (const auto& r : rows) {
    csv.row({r.method, format_number(r.iterations), format_number(r.rel_err), format_number(r.residual),
             r.fsai_nnz_fraction ? format_number(*r.fsai_nnz_fraction) : std::string("NA")});
  }
  char line[160];
  std::snprintf(line, sizeof line, "n=%zu d=%zu sigma=%.6g\n", points.size(), points.dim(), cfg.sigma);
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-22s iterations=%-5zu residual=%.3e rel_err=%.3e %s\n", r.method.c_str(),
                  r.iterations, r.residual, r.rel_err, r.converged ? "converged" : "not converged");
    out << line;
  }
  return csv.rows_written();
}

struct GenArgs {
  Common common;
  std::size_t n = 1000;
  std::size_t d = 3;
};

std::size_t cmd_gen(const GenArgs& a) {
  require(a.n >= 1, "--n must be at least 1");
  require(a.d >= 1, "--d must be at least 1");
  const auto points = generate_gaussian_cloud(a.n, a.d, a.common.seed);
  std::vector<std::string> header;
  for (std::size_t k = 0; k < a.d; ++k) header.push_back("x" + std::to_string(k + 1));
  CsvWriter csv(a.common.out, header, !a.common.no_timestamp);
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<std::string> row;
    for (const double v : points[i]) row.push_back(format_number(v));
    csv.row(row);
  }
  return csv.rows_written();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Posterior covariance fields, their bounds and estimators, LRSP and AFN experiments", "covfield"};
  app.require_subcommand(1);

  FieldArgs field;
  auto* c_field = app.add_subcommand("field", "Signed posterior covariance R(x, y) on a 1D grid pair");
  add_observations(c_field, field.obs);
  add_hyper(c_field, field.hyper);
  c_field->add_option("--grid", field.grid, "Grid points per axis")->capture_default_str();
  add_common(c_field, field.common);

  Field2dArgs field2d;
  auto* c_field2d = app.add_subcommand("field2d", "|R(x*, y)| over a disk for seeded 2D observations");
  add_hyper(c_field2d, field2d.hyper);
  c_field2d->add_option("--grid", field2d.grid, "Grid points per axis of the bounding square")->capture_default_str();
  c_field2d->add_option("--n-obs", field2d.n_obs, "Number of observation points")->capture_default_str();
  c_field2d->add_option("--radius", field2d.radius, "Disk radius")->capture_default_str();
  c_field2d->add_option("--xstar", field2d.xstar, "Fixed x* (two values); seeded when omitted")->expected(2);
  add_common(c_field2d, field2d.common);

  BoundsArgs bounds;
  auto* c_bounds = app.add_subcommand("bounds", "Rescaled eta curves against |R(x, y*)|");
  add_observations(c_bounds, bounds.obs);
  add_hyper(c_bounds, bounds.hyper, false);
  c_bounds->add_option("--condition", bounds.condition, "1: far from y*, 2: near y*, 3: whole domain")
      ->capture_default_str();
  c_bounds->add_option("--ystar", bounds.ystar, "Fixed second argument y*")->capture_default_str();
  c_bounds->add_option("--sigma", bounds.sigma, "Bandwidth (default 0.05, 0.05, 0.4 by condition)");
  c_bounds->add_option("--grid", bounds.grid, "Grid points")->capture_default_str();
  add_common(c_bounds, bounds.common);

  EstimateArgs estimate;
  auto* c_estimate = app.add_subcommand("estimate", "Exact |R| field next to the rescaled geometric estimator");
  add_observations(c_estimate, estimate.obs);
  add_hyper(c_estimate, estimate.hyper);
  c_estimate->add_option("--grid", estimate.grid, "Grid points per axis")->capture_default_str();
  c_estimate->add_option("--estimator", estimate.estimator, "auto switches at sigma = 0.3")
      ->check(CLI::IsMember({"auto", "small", "large"}))
      ->capture_default_str();
  add_common(c_estimate, estimate.common);

  GpDemoArgs gp;
  auto* c_gp = app.add_subcommand("gp-demo", "GP regression of cos(25 x^2) with true and estimated deviation");
  add_hyper(c_gp, gp.hyper);
  c_gp->add_option("--n-obs", gp.n_obs, "Number of seeded observation points")->capture_default_str();
  c_gp->add_option("--grid", gp.grid, "Evaluation grid points")->capture_default_str();
  add_common(c_gp, gp.common);

  SvdArgs svd;
  auto* c_svd = app.add_subcommand("svd", "Leading singular values of an equispaced kernel matrix");
  add_hyper(c_svd, svd.hyper);
  c_svd->add_option("--equispaced", svd.equispaced_n, "Number of equispaced points in [0, 1]")->capture_default_str();
  c_svd->add_option("--k", svd.k, "Number of singular values")->capture_default_str();
  add_common(c_svd, svd.common);

  LrspArgs lrsp;
  auto* c_lrsp = app.add_subcommand("lrsp", "Low-rank versus low-rank-plus-sparse error curves");
  add_source(c_lrsp, lrsp.source);
  add_hyper(c_lrsp, lrsp.hyper);
  c_lrsp->add_option("--r0", lrsp.r0, "Landmarks of the LRSP base factor")->capture_default_str();
  c_lrsp->add_option("--delta-sweep", lrsp.delta_sweep, "Pattern radii lo:hi:step in units of sigma")
      ->capture_default_str();
  c_lrsp->add_option("--rank-sweep", lrsp.rank_sweep, "Plain low-rank ranks lo:hi:step")->capture_default_str();
  c_lrsp->add_option("--rank-out", lrsp.rank_out, "Rank-sweep CSV (default: <out>_ranks.csv)");
  add_common(c_lrsp, lrsp.common);

  PrecondArgs pc;
  auto* c_pc = app.add_subcommand("precond", "CG, random-pattern AFN-CG and geometric AFN-CG on K x = b");
  add_source(c_pc, pc.source);
  add_hyper(c_pc, pc.hyper, false);
  c_pc->add_option("--sigma", pc.sigma, "Bandwidth (default: distance percentile)");
  c_pc->add_option("--percentile", pc.percentile, "Pairwise-distance percentile for the bandwidth")
      ->capture_default_str();
  c_pc->add_option("--r-fraction", pc.r_fraction, "Landmark fraction r / n")->capture_default_str();
  c_pc->add_option("--delta", pc.delta, "Geometric pattern radius (default 2 sigma)");
  c_pc->add_option("--random-cap", pc.random_cap, "Row cap fraction of the random pattern")->capture_default_str();
  c_pc->add_option("--tol", pc.tol, "Absolute residual tolerance")->capture_default_str();
  c_pc->add_option("--maxit", pc.maxit, "Iteration limit")->capture_default_str();
  c_pc->add_option("--rhs", pc.rhs, "Right-hand side: randn, or kz = K z / |K z|")
      ->check(CLI::IsMember({"randn", "kz"}))
      ->capture_default_str();
  c_pc->add_option("--methods", pc.methods, "Subset of methods 1 2 3")
      ->check(CLI::IsMember({"1", "2", "3"}))
      ->delimiter(',');
  add_common(c_pc, pc.common);

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "Seeded standard normal point cloud");
  c_gen->add_option("--n", gen.n, "Number of points")->capture_default_str();
  c_gen->add_option("--d", gen.d, "Dimension")->capture_default_str();
  add_common(c_gen, gen.common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsageError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const auto start = Clock::now();
  std::size_t rows = 0;
  std::string out_path;
  try {
    const std::string name = chosen->get_name();
    if (name == "field") {
      rows = cmd_field(field), out_path = field.common.out;
    } else if (name == "field2d") {
      rows = cmd_field2d(field2d), out_path = field2d.common.out;
    } else if (name == "bounds") {
      rows = cmd_bounds(bounds), out_path = bounds.common.out;
    } else if (name == "estimate") {
      rows = cmd_estimate(estimate, out), out_path = estimate.common.out;
    } else if (name == "gp-demo") {
      rows = cmd_gp_demo(gp), out_path = gp.common.out;
    } else if (name == "svd") {
      rows = cmd_svd(svd), out_path = svd.common.out;
    } else if (name == "lrsp") {
      rows = cmd_lrsp(lrsp, out), out_path = lrsp.common.out;
    } else if (name == "precond") {
      rows = cmd_precond(pc, out), out_path = pc.common.out;
    } else {
      rows = cmd_gen(gen), out_path = gen.common.out;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << chosen->help();
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  char line[64];
  std::snprintf(line, sizeof line, "%.3f", seconds);
  out << chosen->get_name() << ": wrote " << rows << " rows to " << out_path << " in " << line << " s\n";
  return kOk;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace covfield::cli
