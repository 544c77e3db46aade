#include "covfield/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>
#include <string>

#include "covfield/errors.hpp"

namespace covfield {

namespace {

void require_1d(const PointSet& observations, const char* what) {
  if (observations.dim() != 1) {
    throw UnsupportedDimension(std::string(what) + " is defined for one-dimensional data only");
  }
}

std::vector<double> sorted_scalars(const PointSet& observations) {
  std::vector<double> s(observations.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = observations[i][0];
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

HMetrics h_metrics(Point x, const PointSet& observations, double sigma) {
  if (x.size() != observations.dim()) throw InvalidArgument("h_metrics: dimension mismatch");
  double min_sq = std::numeric_limits<double>::infinity();
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const double d2 = squared_distance(x, observations[i]);
    min_sq = std::min(min_sq, d2);
    sum_sq += d2;
  }
  return {std::sqrt(min_sq) / sigma, std::sqrt(sum_sq) / sigma};
}

double g_small(Point x, Point y, const PointSet& observations, const KernelConfig& cfg) {
  const double hx = h_metrics(x, observations, cfg.sigma).h_inf;
  const double hy = h_metrics(y, observations, cfg.sigma).h_inf;
  return std::sqrt(hx * hy) * kernel_eval(x, y, cfg);
}

double g_large(Point x, Point y, const PointSet& observations, double sigma) {
  const auto mx = h_metrics(x, observations, sigma);
  const auto my = h_metrics(y, observations, sigma);
  return (mx.h_inf * mx.h_2) * (my.h_inf * my.h_2);
}

std::vector<double> absolute_field(std::span<const double> g_values, double ref_max) {
  if (g_values.empty()) throw InvalidArgument("absolute_field: empty input");
  if (!(ref_max >= 0.0)) throw InvalidArgument("absolute_field: ref_max must be nonnegative");
  const double g_max = *std::max_element(g_values.begin(), g_values.end());
  if (!(g_max > 0.0)) throw DegenerateData("absolute_field: estimator is zero everywhere");
  std::vector<double> out(g_values.size());
  std::transform(g_values.begin(), g_values.end(), out.begin(),
                 [&](double g) { return ref_max * (g / g_max); });
  return out;
}

double var_small(Point x, const PointSet& observations, const KernelConfig& cfg) {
  const double nu = dist_to_set(x, observations).distance;
  return 0.0 - cfg.beta * std::expm1(-nu * nu / (2.0 * cfg.sigma * cfg.sigma));
}

ReferencePointSet reference_points_1d(const PosteriorModel& model) {
  require_1d(model.observations(), "reference_points_1d");
  if (model.size() < 2) throw InvalidArgument("reference_points_1d needs at least two observations");
  const auto s = sorted_scalars(model.observations());
  std::vector<double> mids(s.size() - 1);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) mids[i] = 0.5 * (s[i] + s[i + 1]);
  auto points = PointSet::from_scalars(mids);
  std::vector<double> variances(mids.size());
  for (std::size_t i = 0; i < mids.size(); ++i) variances[i] = posterior_variance(model, points[i]);
  return {std::move(points), std::move(variances)};
}

double var_large(Point x, const ReferencePointSet& refs, const PointSet& observations) {
  if (refs.variances.empty() || refs.variances.size() != refs.points.size()) {
    throw InvalidArgument("var_large: reference set is empty or inconsistent");
  }
  const double dx = dist_to_set(x, observations).distance;
  if (dx == 0.0) return 0.0;
  const auto nearest = dist_to_set(x, refs.points);
  const double dz = dist_to_set(refs.points[nearest.index], observations).distance;
  if (!(dz > 0.0)) throw InvalidArgument("var_large: reference point coincides with an observation");
  return (dx / dz) * refs.variances[nearest.index];
}

double containing_gap_width(double x, const PointSet& observations) {
  require_1d(observations, "containing_gap_width");
  const auto s = sorted_scalars(observations);
  if (x <= s.front()) return 2.0 * (s.front() - x);
  if (x >= s.back()) return 2.0 * (x - s.back());
  const auto upper = std::upper_bound(s.begin(), s.end(), x);
  return *upper - *std::prev(upper);
}

double var_auto(Point x, const PosteriorModel& model, const ReferencePointSet& refs) {
  require_1d(model.observations(), "var_auto");
  if (x.size() != 1) throw InvalidArgument("var_auto: query must be one-dimensional");
  const double gap = containing_gap_width(x[0], model.observations());
  if (gap > 2.0 * model.config().sigma) return var_small(x, model.observations(), model.config());
  return var_large(x, refs, model.observations());
}

FieldRegime regime_for(double sigma) { return sigma < 0.3 ? FieldRegime::Small : FieldRegime::Large; }

Eigen::MatrixXd exact_abs_field(const PosteriorModel& model, const PointSet& grid) {
  return posterior_cov_matrix(model, grid, grid).cwiseAbs();
}

Eigen::MatrixXd relative_field(const PointSet& observations, const KernelConfig& cfg,
                               const PointSet& grid, FieldRegime regime) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd h_inf(n);
  Eigen::VectorXd h_2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto m = h_metrics(grid[static_cast<std::size_t>(i)], observations, cfg.sigma);
    h_inf(i) = m.h_inf;
    h_2(i) = m.h_2;
  }
  if (regime == FieldRegime::Large) {
    const Eigen::VectorXd a = h_inf.cwiseProduct(h_2);
    return a * a.transpose();
  }
  const Eigen::VectorXd root = h_inf.cwiseSqrt();
  Eigen::MatrixXd field = kernel_matrix(grid, grid, cfg);
  field.array() *= (root * root.transpose()).array();
  return field;
}

std::vector<std::size_t> top_decile(std::span<const double> values) {
  const auto n = values.size();
  const auto k = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return values[a] > values[b] || (values[a] == values[b] && a < b);
                    });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double top_decile_jaccard(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw InvalidArgument("top_decile_jaccard: size mismatch");
  const auto ta = top_decile(a);
  const auto tb = top_decile(b);
  std::vector<std::size_t> common;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(common));
  const double inter = static_cast<double>(common.size());
  return inter / (static_cast<double>(ta.size() + tb.size()) - inter);
}

}  // namespace covfield
