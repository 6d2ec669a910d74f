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

// Wrapped Gaussian spatial process: observed angles X are a latent Gaussian
// field Y = X + 2*pi*K with mean mu*1 and covariance sigma2 * R(phi),
// R(phi) = exp(-phi * distances).
struct WgspParams {
  Angle mu;
  double sigma2 = 1.0;
  double phi = 0.1;
};

struct WgspPriors {
  double mu_mean = 0.0;     // normal prior on the latent (unwrapped) mean
  double mu_var = 2.0;
  double sigma2_shape = 7.0;  // inverse gamma
  double sigma2_rate = 0.5;
  double phi_lo = 0.001;      // uniform
  double phi_hi = 0.9;
  int k_max = 2;              // winding numbers live in {-k_max, ..., k_max}

  void validate() const;
};

// Log density of a wrapped normal WN(mu, sigma2) at x, truncating the
// winding sum at |k| <= k_max.
double wrapped_normal_logpdf(Angle x, Angle mu, double sigma2, int k_max);

// Complete-data log likelihood of angles x with winding vector k under the
// latent field N(mu*1, sigma2*R(phi)).
double wgsp_loglik(std::span<const Angle> x, const Eigen::VectorXi& k,
                   const WgspParams& params, const DistanceMatrix& dist);

// Which blocks a sweep updates; fixing a subset turns the kernel into a
// partial Gibbs sampler (used when conditioning on known covariance
// parameters).
struct WgspUpdateMask {
  bool k = true;
  bool mu = true;
  bool sigma2 = true;
  bool phi = true;
};

// One chain's worth of sampler state and cached matrix work. Parameter
// layout for snapshots/draws: mu, sigma2, phi, k[0..n-1].
class WgspKernel {
 public:
  WgspKernel(std::span<const Angle> angles, const DistanceMatrix& dist,
             WgspPriors priors, ChainConfig cfg,
             WgspUpdateMask mask = WgspUpdateMask{});

  void sweep(int iter, Rng& rng);

  // Individual conditional updates (public so each one can be verified
  // against an independent oracle).
  void update_k(Rng& rng);
  void update_mu(Rng& rng);
  void update_sigma2(Rng& rng);
  void update_phi(int iter, Rng& rng);

  // Moments of the full conditional for mu given everything else.
  std::pair<double, double> mu_conditional_moments() const;
  // (shape, rate) of the full conditional for sigma2.
  std::pair<double, double> sigma2_conditional() const;

  // Snapshot with mu wrapped into [0, 2*pi) and K shifted in lockstep so the
  // residuals (and hence any prediction built from the draw) are unchanged.
  Eigen::VectorXd snapshot() const;
  std::vector<std::string> param_names() const;
  std::vector<std::pair<std::string, double>> acceptance_rates() const;
  long underflow_rejects() const { return k_underflow_rejects_; }

  // Current state (mu on the unwrapped real line).
  double mu_unwrapped() const { return mu_; }
  double sigma2() const { return sigma2_; }
  double phi() const { return phi_; }
  const Eigen::VectorXi& k() const { return k_; }

  // Test/fixture hook: overwrite the state and refresh every cache.
  void set_state(double mu_unwrapped, double sigma2, double phi,
                 const Eigen::VectorXi& k);

 private:
  void refresh_phi_caches();
  double log_posterior_given_k() const;

  const DistanceMatrix& dist_;
  WgspPriors priors_;
  ChainConfig cfg_;
  WgspUpdateMask mask_;
  Eigen::Index n_ = 0;

  Eigen::VectorXd x_;   // observed angles, radians
  Eigen::VectorXd y_;   // latent field x + 2*pi*k
  Eigen::VectorXi k_;
  double mu_ = 0.0;     // unwrapped
  double sigma2_ = 1.0;
  double phi_ = 0.1;

  // Caches tied to the current phi.
  Eigen::MatrixXd r_inv_;
  Eigen::VectorXd r_inv_one_;
  double one_r_inv_one_ = 0.0;
  double log_det_r_ = 0.0;
  Eigen::MatrixXd r_lower_;  // Cholesky factor of R(phi)

  BoundedTransform phi_transform_;
  AdaptiveScale phi_scale_;
  long k_underflow_rejects_ = 0;
};

// Posterior sample from fit_wgsp: per-chain draws plus diagnostics.
struct WgspPosterior {
  std::vector<ChainOutput> chains;
  Eigen::Index n_sites = 0;
  std::vector<std::pair<std::string, double>> psrf_by_param;
  bool converged = true;  // all PSRF < 1.1 (vacuously true for one chain)

  Eigen::Index total_draws() const;
};

// Fits the wrapped model by Metropolis-within-Gibbs: exact conditional draws
// for K, mu, sigma2 and an adaptive random-walk step for phi. Requires at
// least 5 sites.
WgspPosterior fit_wgsp(const SiteTable& data, const WgspPriors& priors,
                       const ChainConfig& cfg);

struct WgspSimulation {
  SiteTable table;        // wrapped angles at the given coordinates
  Eigen::VectorXd latent; // the unwrapped Gaussian field
};

WgspSimulation simulate_wgsp(std::span<const Coord> coords,
                             const WgspParams& params, Rng& rng);

}  // namespace circspat
