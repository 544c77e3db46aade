#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "covfield/geometry.hpp"
#include "covfield/kernel.hpp"
#include "covfield/posterior.hpp"

namespace covfield {

struct HMetrics {
  double h_inf = 0.0;  // dist(x, S) / sigma
  double h_2 = 0.0;    // sqrt(sum_i |x - s_i|^2) / sigma
};

HMetrics h_metrics(Point x, const PointSet& observations, double sigma);

/// sqrt(h_inf(x) h_inf(y)) kappa(x, y). Relative estimator for small bandwidths.
double g_small(Point x, Point y, const PointSet& observations, const KernelConfig& cfg);

/// h_inf(x) h_inf(y) h_2(x) h_2(y). Relative estimator for large bandwidths;
/// the kernel does not enter.
double g_large(Point x, Point y, const PointSet& observations, double sigma);

/// ref_max * g / max(g). Throws DegenerateData when g is identically zero.
std::vector<double> absolute_field(std::span<const double> g_values, double ref_max);

/// beta (1 - exp(-dist(x, S)^2 / (2 sigma^2))).
double var_small(Point x, const PointSet& observations, const KernelConfig& cfg);

/// Off-observation points with their exact posterior variances.
struct ReferencePointSet {
  PointSet points;
  std::vector<double> variances;
};

/// Midpoints of consecutive sorted observations (1D only).
ReferencePointSet reference_points_1d(const PosteriorModel& model);

/// (dist(x, S) / dist(z, S)) V(z), z the reference point nearest to x.
double var_large(Point x, const ReferencePointSet& refs, const PointSet& observations);

/// var_small inside gaps wider than 2 sigma, var_large elsewhere (1D only).
/// A query left of the first or right of the last observation sits in a
/// boundary gap whose width is twice its distance to that observation.
double var_auto(Point x, const PosteriorModel& model, const ReferencePointSet& refs);

/// Width of the gap containing x among the observations (1D only).
double containing_gap_width(double x, const PointSet& observations);

// ---------------------------------------------------------------------------
// Grid fields

enum class FieldRegime { Small, Large };

/// g_small below sigma = 0.3, g_large from there on.
FieldRegime regime_for(double sigma);

/// |R(x_i, x_j)| over grid x grid.
Eigen::MatrixXd exact_abs_field(const PosteriorModel& model, const PointSet& grid);

/// Relative estimator over grid x grid. Metrics are computed once per grid
/// point, so the cost is O(N r + N^2).
Eigen::MatrixXd relative_field(const PointSet& observations, const KernelConfig& cfg,
                               const PointSet& grid, FieldRegime regime);

/// Indices of the ceil(0.1 n) largest entries; ties go to the lower index.
std::vector<std::size_t> top_decile(std::span<const double> values);

/// |A n B| / |A u B| of the two top-decile index sets.
double top_decile_jaccard(std::span<const double> a, std::span<const double> b);

}  // namespace covfield
