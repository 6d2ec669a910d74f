#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "circspat/gaussian.hpp"
#include "circspat/pgsp.hpp"
#include "circspat/sites.hpp"
#include "circspat/wgsp.hpp"

namespace circspat {

struct KrigTarget {
  std::string id;
  Coord pos;
};

// Posterior-predictive summary of the direction at one unobserved site.
struct KrigResult {
  std::string target_id;
  Angle direction;
  double concentration = 0.0;  // in [0, 1]
  std::vector<Angle> draws;    // one predictive draw per posterior draw
};

// A target closer than this to an observed site is treated as coincident:
// the observed direction is returned with full concentration.
inline constexpr double kCoincidentKm = 1e-3;

// Conditional moments of the latent wrapped field at one target, for a
// single posterior draw: mean mu + rho0' R^{-1} (y - mu), variance
// sigma2 * (1 - rho0' R^{-1} rho0) clamped at zero.
struct WgspPredictive {
  double mean = 0.0;
  double var = 0.0;
};
WgspPredictive wgsp_predictive_moments(const Eigen::VectorXd& y, double mu,
                                       double sigma2,
                                       const CovarianceFactor& r_factor,
                                       const Eigen::VectorXd& rho0);

// Bivariate analogue for the projected field: mean mu + Mc' R^{-1} rho0,
// covariance (1 - rho0' R^{-1} rho0) * T.
struct PgspPredictive {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
};
PgspPredictive pgsp_predictive_moments(const Eigen::MatrixXd& mc,
                                       const Eigen::Vector2d& mu,
                                       const Eigen::Matrix2d& t,
                                       const CovarianceFactor& r_factor,
                                       const Eigen::VectorXd& rho0);

// Kriging under the wrapped model: for every retained posterior draw,
// condition the latent Gaussian field on y = x + 2*pi*K and average the
// implied predictive direction vectors, attenuated by exp(-var/2). The seed
// drives the per-draw predictive noise.
std::vector<KrigResult> wrap_krig(const WgspPosterior& post,
                                  const SiteTable& data,
                                  std::span<const KrigTarget> targets,
                                  std::uint64_t seed);

// Kriging under the projected model: sample the latent bivariate field at
// the target for every posterior draw and project; direction/concentration
// are the circular mean and resultant of those draws.
std::vector<KrigResult> proj_krig(const PgspPosterior& post,
                                  const SiteTable& data,
                                  std::span<const KrigTarget> targets,
                                  std::uint64_t seed);

}  // namespace circspat
