#include "circspat/gaussian.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "circspat/angle.hpp"
#include "circspat/errors.hpp"

namespace circspat {

namespace {

constexpr double kJitter = 1e-10;
// Reciprocal-condition floor: below this the solve would lose more than ~9
// digits, which is past what the library promises downstream.
constexpr double kRcondFloor = 1e-9;

}  // namespace

CovarianceFactor::CovarianceFactor(Eigen::MatrixXd lower, double log_det)
    : lower_(std::move(lower)), log_det_(log_det) {}

CovarianceFactor CovarianceFactor::cholesky(const Eigen::MatrixXd& spd) {
  const Eigen::Index n = spd.rows();
  if (n == 0 || spd.cols() != n) {
    throw InvalidArgument("cholesky: matrix must be square and non-empty");
  }
  if (!spd.allFinite()) {
    throw InvalidArgument("cholesky: matrix has non-finite entries");
  }

  Eigen::LLT<Eigen::MatrixXd> llt(spd);
  if (llt.info() != Eigen::Success) {
    // One shot of diagonal jitter for matrices that are SPD in exact
    // arithmetic but lost definiteness to rounding.
    Eigen::MatrixXd bumped = spd;
    bumped.diagonal().array() += kJitter;
    llt.compute(bumped);
    if (llt.info() != Eigen::Success) {
      throw FactorizationError(
          "cholesky: matrix is not positive definite (jitter retry failed)");
    }
  }
  if (llt.rcond() < kRcondFloor) {
    throw FactorizationError(
        "cholesky: matrix condition number is beyond 1e9; results would not "
        "be trustworthy");
  }

  Eigen::MatrixXd lower = llt.matrixL();
  const double log_det = 2.0 * lower.diagonal().array().log().sum();
  return CovarianceFactor(std::move(lower), log_det);
}

CovarianceFactor CovarianceFactor::from_lower(Eigen::MatrixXd lower) {
  const Eigen::Index n = lower.rows();
  if (n == 0 || lower.cols() != n) {
    throw InvalidArgument("from_lower: factor must be square and non-empty");
  }
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = lower(i, i);
    if (!(d >= 0.0)) {
      throw InvalidArgument("from_lower: factor diagonal must be >= 0");
    }
    log_det += d > 0.0 ? 2.0 * std::log(d)
                       : -std::numeric_limits<double>::infinity();
  }
  return CovarianceFactor(std::move(lower), log_det);
}

Eigen::VectorXd CovarianceFactor::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd y = lower_.triangularView<Eigen::Lower>().solve(rhs);
  return lower_.triangularView<Eigen::Lower>().transpose().solve(y);
}

Eigen::MatrixXd CovarianceFactor::solve(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd y = lower_.triangularView<Eigen::Lower>().solve(rhs);
  return lower_.triangularView<Eigen::Lower>().transpose().solve(y);
}

Eigen::MatrixXd CovarianceFactor::inverse() const {
  const Eigen::MatrixXd inv =
      solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(dim(), dim())));
  return (inv + inv.transpose()) / 2.0;
}

double CovarianceFactor::quad_form(const Eigen::VectorXd& v) const {
  return lower_.triangularView<Eigen::Lower>().solve(v).squaredNorm();
}

GaussianConditional gaussian_conditional(
    const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov,
    std::span<const Eigen::Index> observed_idx,
    const Eigen::VectorXd& observed_values) {
  const Eigen::Index n = mu.size();
  if (cov.rows() != n || cov.cols() != n) {
    throw InvalidArgument("gaussian_conditional: mean/covariance shape mismatch");
  }
  if (observed_idx.empty()) {
    throw InvalidArgument("gaussian_conditional: nothing observed");
  }
  if (static_cast<Eigen::Index>(observed_idx.size()) !=
      observed_values.size()) {
    throw InvalidArgument(
        "gaussian_conditional: index/value length mismatch");
  }

  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const Eigen::Index idx : observed_idx) {
    if (idx < 0 || idx >= n) {
      throw InvalidArgument("gaussian_conditional: index out of range");
    }
    if (seen[static_cast<std::size_t>(idx)]++) {
      throw InvalidArgument("gaussian_conditional: duplicate observed index");
    }
  }

  std::vector<Eigen::Index> obs(observed_idx.begin(), observed_idx.end());
  std::vector<Eigen::Index> unobs;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) unobs.push_back(i);
  }
  if (unobs.empty()) {
    throw InvalidArgument("gaussian_conditional: everything is observed");
  }

  const Eigen::MatrixXd cov_oo = cov(obs, obs);
  const Eigen::MatrixXd cov_ou = cov(obs, unobs);
  const Eigen::MatrixXd cov_uu = cov(unobs, unobs);
  const Eigen::VectorXd mu_o = mu(obs);
  const Eigen::VectorXd mu_u = mu(unobs);

  const CovarianceFactor factor = CovarianceFactor::cholesky(cov_oo);
  const Eigen::MatrixXd w = factor.solve(cov_ou);  // Sigma_oo^{-1} Sigma_ou

  GaussianConditional out;
  out.mean = mu_u + w.transpose() * (observed_values - mu_o);
  out.cov = cov_uu - cov_ou.transpose() * w;
  out.cov = ((out.cov + out.cov.transpose()) / 2.0).eval();  // symmetrize
  return out;
}

Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean,
                           const CovarianceFactor& factor, Rng& rng) {
  if (mean.size() != factor.dim()) {
    throw InvalidArgument("mvn_sample: mean/factor dimension mismatch");
  }
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + factor.lower() * z;
}

double log_mvn_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                       const CovarianceFactor& factor) {
  if (x.size() != mean.size() || x.size() != factor.dim()) {
    throw InvalidArgument("log_mvn_density: dimension mismatch");
  }
  const double n = static_cast<double>(x.size());
  return -0.5 * (n * std::log(kTwoPi) + factor.log_det() +
                 factor.quad_form(x - mean));
}

}  // namespace circspat
