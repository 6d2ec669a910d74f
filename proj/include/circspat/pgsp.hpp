#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "circspat/gaussian.hpp"
#include "circspat/mcmc.hpp"
#include "circspat/sites.hpp"
#include "circspat/spatial.hpp"

namespace circspat {

// Projected Gaussian spatial process: each site carries a latent bivariate
// normal Y_i; the observed angle is its direction and the latent radius
// r_i = |Y_i| is augmented into the sampler. Stacking is site-major, so the
// joint covariance is R(phi) (x) T with the 2x2 scale matrix
// T = [[tau2, rho*tau], [rho*tau, 1]] (unit second variance fixes the
// rotational non-identifiability).
struct PgspParams {
  Eigen::Vector2d mu{0.0, 1.0};
  double tau2 = 1.0;
  double rho = 0.0;
  double phi = 0.1;

  Eigen::Matrix2d t_matrix() const;
  void validate() const;
};

struct PgspPriors {
  Eigen::Vector2d mu_mean{0.0, 1.0};
  Eigen::Matrix2d mu_cov = Eigen::Matrix2d::Identity() * 10.0;
  double tau2_shape = 7.0;  // inverse gamma
  double tau2_rate = 6.0;
  double phi_lo = 0.001;    // uniform
  double phi_hi = 0.9;
  // rho's uniform support is fixed at (-1, 1).

  void validate() const;
};

// Density of the angle of a bivariate normal N(mu, sigma) projected onto the
// circle (closed form; integrates to 1 over [0, 2*pi)).
double projected_normal_pdf(Angle theta, const Eigen::Vector2d& mu,
                            const Eigen::Matrix2d& sigma);

// Complete-data log likelihood of angles x with latent radii r (all > 0),
// including the polar-coordinates Jacobian sum(log r_i).
double pgsp_loglik(std::span<const Angle> x, const Eigen::VectorXd& r,
                   const PgspParams& params, const DistanceMatrix& dist);

// Site-major stacked latent vector (r_0 cos x_0, r_0 sin x_0, r_1 cos x_1, ...).
Eigen::VectorXd stack_embedding(std::span<const Angle> x,
                                const Eigen::VectorXd& r);

struct PgspUpdateMask {
  bool r = true;
  bool mu = true;
  bool tau2 = true;
  bool rho = true;
  bool phi = true;
};

// Sampler state for one chain. Parameter layout for snapshots/draws:
// mu1, mu2, tau2, rho, phi, r[0..n-1].
class PgspKernel {
 public:
  PgspKernel(std::span<const Angle> angles, const DistanceMatrix& dist,
             PgspPriors priors, ChainConfig cfg,
             PgspUpdateMask mask = PgspUpdateMask{});

  void sweep(int iter, Rng& rng);

  void update_r(int iter, Rng& rng);
  void update_mu(Rng& rng);
  void update_tau2(int iter, Rng& rng);
  void update_rho(int iter, Rng& rng);
  void update_phi(int iter, Rng& rng);

  // Moments of the full conditional for mu (bivariate normal).
  std::pair<Eigen::Vector2d, Eigen::Matrix2d> mu_conditional_moments() const;
  // Conditional law of latent Y_i given the other sites: N(mean, cov).
  std::pair<Eigen::Vector2d, Eigen::Matrix2d> latent_conditional(
      Eigen::Index site) const;

  Eigen::VectorXd snapshot() const;
  std::vector<std::string> param_names() const;
  std::vector<std::pair<std::string, double>> acceptance_rates() const;
  long underflow_rejects() const { return 0; }

  const Eigen::Vector2d& mu() const { return mu_; }
  double tau2() const { return tau2_; }
  double rho() const { return rho_; }
  double phi() const { return phi_; }
  const Eigen::VectorXd& r() const { return r_; }

  void set_state(const Eigen::Vector2d& mu, double tau2, double rho,
                 double phi, const Eigen::VectorXd& r);

 private:
  void refresh_phi_caches();
  void refresh_t_caches();
  void refresh_latent();       // rebuilds M, centered M and P = R^{-1} Mc
  double log_posterior() const;
  // -(1/2) (n log det T + tr(T^{-1} Mc' R^{-1} Mc)) for the given T pieces.
  double t_log_target(const Eigen::Matrix2d& t_inv, double log_det_t) const;

  const DistanceMatrix& dist_;
  PgspPriors priors_;
  ChainConfig cfg_;
  PgspUpdateMask mask_;
  Eigen::Index n_ = 0;

  Eigen::VectorXd cos_x_, sin_x_;
  Eigen::VectorXd r_;
  Eigen::Vector2d mu_;
  double tau2_ = 1.0;
  double rho_ = 0.0;
  double phi_ = 0.1;

  Eigen::MatrixXd m_;   // n x 2 latent matrix, row i = r_i * (cos x_i, sin x_i)
  Eigen::MatrixXd mc_;  // m_ - 1 mu'
  Eigen::MatrixXd p_;   // R^{-1} mc_

  Eigen::MatrixXd r_inv_;
  Eigen::VectorXd r_inv_one_;
  double one_r_inv_one_ = 0.0;
  double log_det_r_ = 0.0;
  Eigen::MatrixXd r_lower_;

  Eigen::Matrix2d t_, t_inv_;
  double log_det_t_ = 0.0;

  Eigen::Matrix2d mu_cov_inv_;

  BoundedTransform phi_transform_;
  BoundedTransform rho_transform_{-1.0, 1.0};
  std::vector<AdaptiveScale> r_scales_;
  AdaptiveScale tau2_scale_, rho_scale_, phi_scale_;
};

struct PgspPosterior {
  std::vector<ChainOutput> chains;
  Eigen::Index n_sites = 0;
  std::vector<std::pair<std::string, double>> psrf_by_param;
  bool converged = true;

  Eigen::Index total_draws() const;
};

// Metropolis-within-Gibbs fit of the projected model: log-scale random walks
// on each latent radius, a conjugate bivariate draw for mu, and adaptive
// random walks for tau2, rho and phi. Requires at least 5 sites.
PgspPosterior fit_pgsp(const SiteTable& data, const PgspPriors& priors,
                       const ChainConfig& cfg);

struct PgspSimulation {
  SiteTable table;
  Eigen::MatrixXd latent;  // n x 2 latent bivariate field
};

PgspSimulation simulate_pgsp(std::span<const Coord> coords,
                             const PgspParams& params, Rng& rng);

}  // namespace circspat
