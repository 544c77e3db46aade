#pragma once

#include <vector>

#include "covfield/geometry.hpp"
#include "covfield/posterior.hpp"

namespace covfield {

/// Normalized distances that parameterize the small-bandwidth envelopes.
struct BoundParams {
  double rho = 0.0;      // |x - y| / (sqrt(2) sigma)
  double rho_hat = 0.0;  // dist(., S) / (sqrt(2) sigma)
  std::size_t r = 1;     // observation count
  double c = 0.0;        // slack in the near-diagonal lower bound
};

/// rho = |x - y| / (sqrt(2) sigma) and rho_hat = dist(x, S) / (sqrt(2) sigma).
BoundParams bound_params(const PosteriorModel& model, Point x, Point y);

// Every bound below carries the prior-variance factor beta, so beta = 1
// reproduces the unit-variance statements exactly.

/// beta e^{-rho^2} + beta sqrt(r) min(e^{-rho_x^2} |w(y)|, e^{-rho_y^2} |w(x)|).
double upper_bound_small(const PosteriorModel& model, Point x, Point y);

/// kappa(x, y) - beta sqrt(r) e^{-rho_hat^2} |w(.)|, best of the two branches.
/// Not clamped: a nonpositive value is a vacuous bound.
double lower_bound_small(const PosteriorModel& model, Point x, Point y);

/// beta (1 - e^{-rho_hat^2} sqrt(r) gamma2); positive only far from S.
double variance_lower_bound(const PosteriorModel& model, Point x, double gamma2);

/// min over branches of beta (1 + sqrt(r) |w(.)|) dist(., S) / (sigma sqrt(e)).
double upper_bound_large(const PosteriorModel& model, Point x, Point y);

enum class EtaKind { Eta1, Eta2, Eta3 };

/// Where on the grid the rescaling is calibrated.
enum class EtaRegion {
  Far,   // |x - y*| > 3 sigma
  Near,  // |x - y*| < 3 sigma
  All,
};

struct EtaCurve {
  std::vector<double> values;       // rescaled |eta| at each grid point
  std::vector<double> exact;        // |R(x, y*)| at each grid point
  std::vector<bool> in_region;
  double scale = 0.0;               // factor applied to |eta|
};

/// Evaluates one of the three pattern estimates along the grid and rescales it
/// so its maximum over the region equals the maximum of |R(., y*)| there.
EtaCurve eta_curves(const PosteriorModel& model, Point y_star, const PointSet& grid, EtaKind which,
                    EtaRegion region);

}  // namespace covfield
