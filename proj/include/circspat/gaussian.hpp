#pragma once

#include <Eigen/Dense>
#include <span>

#include "circspat/rng.hpp"

namespace circspat {

// Cholesky factor of a symmetric positive definite matrix, with the pieces
// every Gaussian computation needs (solves, quadratic forms, log
// determinant). Factoring retries once with a 1e-10 diagonal jitter; a second
// failure, or a condition-number estimate beyond ~1e9, raises
// FactorizationError rather than silently losing precision.
class CovarianceFactor {
 public:
  static CovarianceFactor cholesky(const Eigen::MatrixXd& spd);

  // Wraps an existing lower-triangular factor (diagonal >= 0 allowed, for
  // degenerate covariances produced by conditioning).
  static CovarianceFactor from_lower(Eigen::MatrixXd lower);

  Eigen::Index dim() const { return lower_.rows(); }
  const Eigen::MatrixXd& lower() const { return lower_; }
  double log_det() const { return log_det_; }  // of the factored matrix

  // A^{-1} * rhs via two triangular solves.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

  // Dense A^{-1}, symmetrized.
  Eigen::MatrixXd inverse() const;

  // v^T A^{-1} v  =  || L^{-1} v ||^2.
  double quad_form(const Eigen::VectorXd& v) const;

 private:
  CovarianceFactor(Eigen::MatrixXd lower, double log_det);

  Eigen::MatrixXd lower_;
  double log_det_ = 0.0;
};

struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Conditional distribution of the unobserved coordinates of N(mu, cov) given
// values at `observed_idx`. Indices must be valid, distinct, and leave at
// least one coordinate unobserved.
GaussianConditional gaussian_conditional(
    const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov,
    std::span<const Eigen::Index> observed_idx,
    const Eigen::VectorXd& observed_values);

// mean + L * z with z iid standard normal (drawn in index order).
Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean,
                           const CovarianceFactor& factor, Rng& rng);

double log_mvn_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                       const CovarianceFactor& factor);

}  // namespace circspat
