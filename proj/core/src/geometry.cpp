#include "covfield/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include "covfield/errors.hpp"

namespace covfield {

namespace {

thread_local std::uint64_t g_distance_evaluations = 0;

void check_same_dim(Point a, Point b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view field, double& out) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

PointSet::PointSet(RowMatrix coords) : coords_(std::move(coords)) {
  if (coords_.rows() < 1 || coords_.cols() < 1) {
    throw InvalidArgument("PointSet needs at least one point of dimension >= 1");
  }
  if (!coords_.allFinite()) {
    throw InvalidArgument("PointSet coordinates must be finite");
  }
}

PointSet PointSet::from_scalars(std::span<const double> values) {
  RowMatrix m(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
  return PointSet(std::move(m));
}

PointSet PointSet::from_rows(std::span<const double> flat, std::size_t dim) {
  if (dim == 0 || flat.size() % dim != 0) {
    throw InvalidArgument("flat buffer length is not a multiple of the dimension");
  }
  const auto n = static_cast<Eigen::Index>(flat.size() / dim);
  RowMatrix m = Eigen::Map<const RowMatrix>(flat.data(), n, static_cast<Eigen::Index>(dim));
  return PointSet(std::move(m));
}

PointSet PointSet::select(std::span<const std::size_t> indices) const {
  RowMatrix m(static_cast<Eigen::Index>(indices.size()), coords_.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= size()) throw InvalidArgument("selection index out of range");
    m.row(static_cast<Eigen::Index>(k)) = coords_.row(static_cast<Eigen::Index>(indices[k]));
  }
  return PointSet(std::move(m));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

std::size_t Rng::index(std::size_t bound) {
  if (bound == 0) throw InvalidArgument("Rng::index bound must be positive");
  const std::uint64_t b = bound;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % b;
  std::uint64_t draw = 0;
  do {
    draw = engine_();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % b);
}

double squared_distance(Point a, Point b) {
  check_same_dim(a, b);
  ++g_distance_evaluations;
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return sum;
}

double distance(Point a, Point b) { return std::sqrt(squared_distance(a, b)); }

std::uint64_t distance_evaluation_count() noexcept { return g_distance_evaluations; }
void reset_distance_evaluation_count() noexcept { g_distance_evaluations = 0; }

NearestPoint dist_to_set(Point x, const PointSet& set) {
  if (x.size() != set.dim()) {
    throw InvalidArgument("dist_to_set: point dimension does not match the set");
  }
  NearestPoint best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double d2 = squared_distance(x, set[i]);
    if (d2 < best.distance) {
      best.distance = d2;
      best.index = i;
    }
  }
  best.distance = std::sqrt(best.distance);
  return best;
}

Preset parse_preset(std::string_view name) {
  if (name == "uniform1d") return Preset::Uniform1d;
  if (name == "nonuniform1d") return Preset::NonUniform1d;
  throw InvalidArgument("unknown preset '" + std::string(name) + "'");
}

PointSet preset_observations(Preset preset) {
  static constexpr double kUniform[] = {0.02, 0.26, 0.5, 0.74, 0.98};
  static constexpr double kNonUniform[] = {0.02, 0.12, 0.22, 0.6, 0.98};
  switch (preset) {
    case Preset::Uniform1d:
      return PointSet::from_scalars(kUniform);
    case Preset::NonUniform1d:
      return PointSet::from_scalars(kNonUniform);
  }
  throw InvalidArgument("unknown preset");
}

PointSet preset_observations(std::string_view name) { return preset_observations(parse_preset(name)); }

PointSet generate_gaussian_cloud(std::size_t n, std::size_t dim, std::uint64_t seed) {
  if (n < 1 || dim < 1) throw InvalidArgument("generate_gaussian_cloud needs n >= 1 and d >= 1");
  Rng rng(seed);
  RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = rng.normal();
  }
  return PointSet(std::move(m));
}

PointSet equispaced(std::size_t n, double lo, double hi) {
  if (n < 1) throw InvalidArgument("equispaced needs n >= 1");
  RowMatrix m(static_cast<Eigen::Index>(n), 1);
  if (n == 1) {
    m(0, 0) = lo;
  } else {
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), 0) = lo + step * static_cast<double>(i);
    m(static_cast<Eigen::Index>(n - 1), 0) = hi;
  }
  return PointSet(std::move(m));
}

PointSet load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");

  std::vector<double> values;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  bool first_row = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty()) continue;
    const auto fields = split_commas(content);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t k = 0; k < fields.size() && numeric; ++k) numeric = parse_double(fields[k], row[k]);
    if (!numeric) {
      if (first_row) {
        first_row = false;
        continue;
      }
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    first_row = false;
    if (dim == 0) dim = row.size();
    if (row.size() != dim) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " fields, found " + std::to_string(row.size()));
    }
    values.insert(values.end(), row.begin(), row.end());
  }
  if (values.empty()) throw FormatError("'" + path.string() + "' contains no data rows");
  try {
    return PointSet::from_rows(values, dim);
  } catch (const InvalidArgument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

PointSet standardize(const PointSet& points) {
  const auto n = points.size();
  if (n < 2) throw DegenerateData("standardize needs at least two points");
  RowMatrix out = points.coords();
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    auto col = out.col(k);
    const double mean = col.mean();
    col.array() -= mean;
    const double var = col.squaredNorm() / static_cast<double>(n - 1);
    if (!(var > 0.0)) {
      throw DegenerateData("column " + std::to_string(k) + " has zero variance");
    }
    col /= std::sqrt(var);
  }
  return PointSet(std::move(out));
}

double bandwidth_percentile(const PointSet& points, double percent) {
  const auto n = points.size();
  if (n < 2) throw InvalidArgument("bandwidth_percentile needs at least two points");
  if (!(percent > 0.0 && percent < 100.0)) {
    throw InvalidArgument("percentile must lie strictly between 0 and 100");
  }
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(distance(points[i], points[j]));
  }
  const auto m = d.size();
  auto rank = static_cast<std::size_t>(std::ceil(percent / 100.0 * static_cast<double>(m)));
  rank = std::clamp<std::size_t>(rank, 1, m);
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(rank - 1), d.end());
  const double value = d[rank - 1];
  if (!(value > 0.0)) {
    if (*std::max_element(d.begin(), d.end()) == 0.0) {
      throw DegenerateData("all points are identical");
    }
    throw DegenerateData("percentile distance is zero (too many coincident points)");
  }
  return value;
}

std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + rng.index(n - i);
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

PointSet subsample(const PointSet& points, std::size_t m, std::uint64_t seed) {
  if (m < 1 || m > points.size()) {
    throw InvalidArgument("subsample size must satisfy 1 <= m <= n");
  }
  auto perm = random_permutation(points.size(), seed);
  perm.resize(m);
  return points.select(perm);
}

}  // namespace covfield
