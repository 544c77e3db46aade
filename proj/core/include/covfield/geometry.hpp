#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace covfield {

/// A single point, borrowed from a PointSet row or any contiguous buffer.
using Point = std::span<const double>;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Ordered, immutable collection of n points in R^d. Row i is point i.
///
/// Construction validates that n >= 1, d >= 1 and that every coordinate is
/// finite; afterwards the set never changes, so it can be shared freely.
class PointSet {
 public:
  explicit PointSet(RowMatrix coords);

  /// Builds an n x 1 set from scalars.
  static PointSet from_scalars(std::span<const double> values);
  /// Builds a set from a flat row-major buffer of n*d values.
  static PointSet from_rows(std::span<const double> flat, std::size_t dim);

  std::size_t size() const noexcept { return static_cast<std::size_t>(coords_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(coords_.cols()); }

  Point point(std::size_t i) const noexcept {
    return {coords_.data() + i * dim(), dim()};
  }
  Point operator[](std::size_t i) const noexcept { return point(i); }

  const RowMatrix& coords() const noexcept { return coords_; }

  /// Rows selected by index, in the given order.
  PointSet select(std::span<const std::size_t> indices) const;

 private:
  RowMatrix coords_;
};

/// Seedable generator with output that is identical on every platform.
///
/// The engine is std::mt19937_64, whose sequence the standard fixes. Uniforms
/// use the top 53 bits; normals use the Box-Muller transform. The standard
/// library distributions are avoided because their output is unspecified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                         // [0, 1)
  double normal();                          // N(0, 1)
  std::size_t index(std::size_t bound);     // uniform in [0, bound)

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

double squared_distance(Point a, Point b);
double distance(Point a, Point b);

/// Number of point-to-point distance evaluations made on this thread.
/// Lets callers verify per-query cost claims.
std::uint64_t distance_evaluation_count() noexcept;
void reset_distance_evaluation_count() noexcept;

struct NearestPoint {
  double distance;
  std::size_t index;
};

/// min over s in S of ||x - s||, with the lowest minimizing index.
NearestPoint dist_to_set(Point x, const PointSet& set);

enum class Preset { Uniform1d, NonUniform1d };

Preset parse_preset(std::string_view name);
PointSet preset_observations(Preset preset);
PointSet preset_observations(std::string_view name);

/// n i.i.d. standard-normal points in R^d.
PointSet generate_gaussian_cloud(std::size_t n, std::size_t dim, std::uint64_t seed);

/// n equispaced points on [lo, hi] (endpoints included).
PointSet equispaced(std::size_t n, double lo = 0.0, double hi = 1.0);

/// Reads one point per line; a non-numeric first row is treated as a header.
PointSet load_csv(const std::filesystem::path& path);

/// Per-column centering and scaling to unit sample variance (n - 1 denominator).
PointSet standardize(const PointSet& points);

/// Nearest-rank percentile of the n(n-1)/2 pairwise distances.
double bandwidth_percentile(const PointSet& points, double percent);

/// m distinct rows drawn uniformly without replacement.
PointSet subsample(const PointSet& points, std::size_t m, std::uint64_t seed);

/// A uniformly random permutation of 0..n-1.
std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed);

}  // namespace covfield
