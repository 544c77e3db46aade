#include "covfield/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "covfield/errors.hpp"
#include "covfield/kernel.hpp"

namespace covfield {

namespace {

double normalized(double dist, double sigma) { return dist / (std::numbers::sqrt2 * sigma); }

}  // namespace

BoundParams bound_params(const PosteriorModel& model, Point x, Point y) {
  const double sigma = model.config().sigma;
  return BoundParams{
      .rho = normalized(distance(x, y), sigma),
      .rho_hat = normalized(dist_to_set(x, model.observations()).distance, sigma),
      .r = model.size(),
      .c = 0.0,
  };
}

double upper_bound_small(const PosteriorModel& model, Point x, Point y) {
  const auto& cfg = model.config();
  const double sqrt_r = std::sqrt(static_cast<double>(model.size()));
  const double rho = normalized(distance(x, y), cfg.sigma);
  const double rho_x = normalized(dist_to_set(x, model.observations()).distance, cfg.sigma);
  const double rho_y = normalized(dist_to_set(y, model.observations()).distance, cfg.sigma);
  const double branch_x = std::exp(-rho_x * rho_x) * cross_weights(model, y).norm();
  const double branch_y = std::exp(-rho_y * rho_y) * cross_weights(model, x).norm();
  return cfg.beta * (std::exp(-rho * rho) + sqrt_r * std::min(branch_x, branch_y));
}

double lower_bound_small(const PosteriorModel& model, Point x, Point y) {
  const auto& cfg = model.config();
  const double sqrt_r = std::sqrt(static_cast<double>(model.size()));
  const double rho_x = normalized(dist_to_set(x, model.observations()).distance, cfg.sigma);
  const double rho_y = normalized(dist_to_set(y, model.observations()).distance, cfg.sigma);
  const double correction_x = std::exp(-rho_x * rho_x) * cross_weights(model, y).norm();
  const double correction_y = std::exp(-rho_y * rho_y) * cross_weights(model, x).norm();
  return kernel_eval(x, y, cfg) - cfg.beta * sqrt_r * std::min(correction_x, correction_y);
}

double variance_lower_bound(const PosteriorModel& model, Point x, double gamma2) {
  if (!(gamma2 >= 1.0)) throw InvalidArgument("gamma2 must be >= 1");
  const auto& cfg = model.config();
  const double rho_hat = normalized(dist_to_set(x, model.observations()).distance, cfg.sigma);
  const double sqrt_r = std::sqrt(static_cast<double>(model.size()));
  return cfg.beta * (1.0 - std::exp(-rho_hat * rho_hat) * sqrt_r * gamma2);
}

double upper_bound_large(const PosteriorModel& model, Point x, Point y) {
  const double slope = lipschitz_bound(model.config());
  const double sqrt_r = std::sqrt(static_cast<double>(model.size()));
  const double dx = dist_to_set(x, model.observations()).distance;
  const double dy = dist_to_set(y, model.observations()).distance;
  // A vanishing distance makes its branch zero regardless of the weights.
  const double branch_x = dx == 0.0 ? 0.0 : (1.0 + sqrt_r * cross_weights(model, y).norm()) * dx;
  const double branch_y = dy == 0.0 ? 0.0 : (1.0 + sqrt_r * cross_weights(model, x).norm()) * dy;
  return slope * std::min(branch_x, branch_y);
}

EtaCurve eta_curves(const PosteriorModel& model, Point y_star, const PointSet& grid, EtaKind which,
                    EtaRegion region) {
  if (grid.dim() != model.dim() || y_star.size() != model.dim()) {
    throw InvalidArgument("eta_curves: dimension mismatch");
  }
  const auto& cfg = model.config();
  const auto n = grid.size();
  EtaCurve curve;
  curve.values.resize(n);
  curve.exact.resize(n);
  curve.in_region.resize(n);

  const double sqrt_r = std::sqrt(static_cast<double>(model.size()));
  const double rho_hat = normalized(dist_to_set(y_star, model.observations()).distance, cfg.sigma);
  const double correction = cfg.beta * sqrt_r * std::exp(-rho_hat * rho_hat) * cross_weights(model, y_star).norm();

  for (std::size_t i = 0; i < n; ++i) {
    const Point x = grid[i];
    const double gap = distance(x, y_star);
    switch (region) {
      case EtaRegion::Far:
        curve.in_region[i] = gap > 3.0 * cfg.sigma;
        break;
      case EtaRegion::Near:
        curve.in_region[i] = gap < 3.0 * cfg.sigma;
        break;
      case EtaRegion::All:
        curve.in_region[i] = true;
        break;
    }
    double eta = 0.0;
    switch (which) {
      case EtaKind::Eta1:
        eta = kernel_eval(x, y_star, cfg) + correction;
        break;
      case EtaKind::Eta2:
        eta = kernel_eval(x, y_star, cfg) - correction;
        break;
      case EtaKind::Eta3:
        eta = dist_to_set(x, model.observations()).distance;
        break;
    }
    curve.values[i] = std::abs(eta);
    curve.exact[i] = std::abs(posterior_cov(model, x, y_star));
  }

  double eta_max = 0.0;
  double exact_max = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!curve.in_region[i]) continue;
    any = true;
    eta_max = std::max(eta_max, curve.values[i]);
    exact_max = std::max(exact_max, curve.exact[i]);
  }
  if (!any) throw InvalidArgument("eta_curves: the condition region contains no grid points");
  if (!(eta_max > 0.0)) throw DegenerateData("eta_curves: estimate vanishes on the whole region");

  curve.scale = exact_max / eta_max;
  for (auto& v : curve.values) v *= curve.scale;
  return curve;
}

}  // namespace covfield
