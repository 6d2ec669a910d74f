#include <cmath>
#include <vector>

#include "doctest.h"

#include "circspat/errors.hpp"
#include "circspat/gaussian.hpp"
#include "circspat/rng.hpp"
#include "support/oracles.hpp"

using namespace circspat;

namespace {

// Random SPD matrix A A' + n I, seeded for reproducibility.
Eigen::MatrixXd random_spd(Eigen::Index n, Rng& rng) {
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  }
  return a * a.transpose() +
         static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("cholesky factor reproduces a known 2x2") {
  Eigen::MatrixXd m(2, 2);
  m << 4.0, 2.0, 2.0, 3.0;
  const CovarianceFactor f = CovarianceFactor::cholesky(m);
  // det = 8, inverse = [[3,-2],[-2,4]]/8.
  CHECK(f.log_det() == doctest::Approx(std::log(8.0)));
  Eigen::VectorXd rhs(2);
  rhs << 1.0, 0.0;
  const Eigen::VectorXd x = f.solve(rhs);
  CHECK(x(0) == doctest::Approx(3.0 / 8.0));
  CHECK(x(1) == doctest::Approx(-2.0 / 8.0));
  CHECK(f.quad_form(Eigen::Vector2d(1.0, 1.0)) ==
        doctest::Approx((3.0 - 2.0 - 2.0 + 4.0) / 8.0));
  const Eigen::MatrixXd inv = f.inverse();
  CHECK((inv * m - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
  CHECK(inv(0, 1) == doctest::Approx(inv(1, 0)));
}

TEST_CASE("cholesky factor rejects hopeless matrices") {
  Eigen::MatrixXd singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;  // rank 1; jitter cannot rescue rcond
  CHECK_THROWS_AS(CovarianceFactor::cholesky(singular), FactorizationError);

  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(CovarianceFactor::cholesky(indefinite),
                  FactorizationError);
}

TEST_CASE("cholesky handles a near-singular matrix above the rcond floor") {
  Eigen::MatrixXd m(2, 2);
  const double c = 1.0 - 2e-7;
  m << 1.0, c, c, 1.0;
  const CovarianceFactor f = CovarianceFactor::cholesky(m);
  CHECK(f.dim() == 2);
  CHECK(std::isfinite(f.log_det()));
}

TEST_CASE("solve agrees with a dense inverse on random SPD input") {
  Rng rng(71);
  const Eigen::MatrixXd m = random_spd(7, rng);
  const CovarianceFactor f = CovarianceFactor::cholesky(m);
  Eigen::VectorXd b(7);
  for (int i = 0; i < 7; ++i) b(i) = rng.normal();
  const Eigen::MatrixXd dense_inv = Eigen::FullPivLU<Eigen::MatrixXd>(m).inverse();
  CHECK((f.solve(b) - dense_inv * b).norm() < 1e-10);
  CHECK(f.log_det() ==
        doctest::Approx(std::log(m.determinant())).epsilon(1e-10));
  CHECK(f.quad_form(b) == doctest::Approx(b.dot(dense_inv * b)));
}

TEST_CASE("gaussian conditional matches the partitioned-formula oracle") {
  Rng rng(1234);
  const Eigen::Index n = 6;
  const Eigen::MatrixXd cov = random_spd(n, rng);
  Eigen::VectorXd mu(n);
  for (Eigen::Index i = 0; i < n; ++i) mu(i) = rng.normal();

  const std::vector<Eigen::Index> obs_idx{1, 4, 5};
  const Eigen::Vector3d obs_vals(0.3, -1.2, 2.0);
  const GaussianConditional got =
      gaussian_conditional(mu, cov, obs_idx, obs_vals);

  const oracle::DenseConditional want =
      oracle::dense_conditional(mu, cov, {1, 4, 5}, obs_vals);
  CHECK((got.mean - want.mean).norm() < 1e-10);
  CHECK((got.cov - want.cov).norm() < 1e-10);
}

TEST_CASE("mvn sampling hits the requested moments") {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.6, 0.6, 2.0;
  const Eigen::Vector2d mean(3.0, -1.0);
  const CovarianceFactor f = CovarianceFactor::cholesky(cov);
  Rng rng(5);
  const int n = 20000;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  double sum_xy = 0.0;
  Eigen::Vector2d sum_sq = Eigen::Vector2d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = mvn_sample(mean, f, rng);
    sum += x;
    sum_sq += (x.array() * x.array()).matrix();
    sum_xy += x(0) * x(1);
  }
  const Eigen::Vector2d m = sum / n;
  CHECK(m(0) == doctest::Approx(3.0).epsilon(0.02));
  CHECK(m(1) == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(sum_sq(0) / n - m(0) * m(0) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(sum_xy / n - m(0) * m(1) == doctest::Approx(0.6).epsilon(0.1));
}

TEST_CASE("log mvn density matches the dense oracle") {
  Rng rng(9);
  const Eigen::MatrixXd cov = random_spd(4, rng);
  Eigen::VectorXd mu(4), x(4);
  for (int i = 0; i < 4; ++i) {
    mu(i) = rng.normal();
    x(i) = rng.normal();
  }
  const CovarianceFactor f = CovarianceFactor::cholesky(cov);
  CHECK(log_mvn_density(x, mu, f) ==
        doctest::Approx(oracle::mvn_logpdf_dense(x, mu, cov)).epsilon(1e-12));
}

TEST_CASE("from_lower accepts a degenerate factor") {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(2, 2);
  l(0, 0) = 1.0;  // second component has zero variance
  const CovarianceFactor f = CovarianceFactor::from_lower(l);
  CHECK(f.log_det() == -std::numeric_limits<double>::infinity());
  Eigen::MatrixXd bad = l;
  bad(1, 1) = -1.0;  // contract violation, not a numeric failure
  CHECK_THROWS_AS(CovarianceFactor::from_lower(bad), InvalidArgument);
}
