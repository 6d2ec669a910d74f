#include <cmath>
#include <vector>

#include "doctest.h"

#include "circspat/kriging.hpp"
#include "circspat/rng.hpp"
#include "support/oracles.hpp"

using namespace circspat;

namespace {

// Three observed sites plus one target, with every pairwise distance
// distinct so nothing cancels by accident.
const std::vector<Coord> kObs{{0, 0}, {20, 0}, {0, 35}};
const Coord kTarget{12.0, 9.0};

Eigen::MatrixXd joint_corr(const std::vector<Coord>& coords, double phi) {
  return corr_matrix(distance_matrix(coords), phi);
}

SiteTable obs_table(std::initializer_list<double> angles) {
  std::vector<Site> sites;
  int i = 0;
  for (double a : angles) {
    sites.push_back(Site{"s" + std::to_string(i), kObs[static_cast<std::size_t>(i)], wrap(a)});
    ++i;
  }
  return SiteTable(sites);
}

// One-draw wrapped posterior with the given parameter values.
WgspPosterior one_draw_wgsp(double mu, double sigma2, double phi,
                            std::initializer_list<int> winding) {
  WgspPosterior post;
  ChainOutput chain;
  chain.param_names = {"mu", "sigma2", "phi"};
  Eigen::VectorXd row(3 + winding.size());
  row << mu, sigma2, phi;
  int i = 3;
  for (int k : winding) {
    chain.param_names.push_back("k[" + std::to_string(i - 3) + "]");
    row(i++) = k;
  }
  chain.draws = row.transpose();
  post.chains.push_back(chain);
  post.n_sites = static_cast<Eigen::Index>(winding.size());
  return post;
}

}  // namespace

TEST_CASE("wgsp predictive moments match the dense conditional oracle") {
  const double mu = 0.4, sigma2 = 0.8, phi = 0.07;
  const Eigen::VectorXd y =
      (Eigen::VectorXd(3) << 0.3, 5.9 - kTwoPi, 1.4).finished();

  std::vector<Coord> all{kTarget, kObs[0], kObs[1], kObs[2]};
  const Eigen::MatrixXd joint = sigma2 * joint_corr(all, phi);
  const oracle::DenseConditional want = oracle::dense_conditional(
      Eigen::VectorXd::Constant(4, mu), joint, {1, 2, 3}, y);

  const Eigen::MatrixXd r = joint_corr(kObs, phi);
  const CovarianceFactor f = CovarianceFactor::cholesky(r);
  Eigen::VectorXd rho0(3);
  for (int i = 0; i < 3; ++i) {
    const double dx = kTarget.x_km - kObs[static_cast<std::size_t>(i)].x_km;
    const double dy = kTarget.y_km - kObs[static_cast<std::size_t>(i)].y_km;
    rho0(i) = std::exp(-phi * std::hypot(dx, dy));
  }
  const WgspPredictive got =
      wgsp_predictive_moments(y, mu, sigma2, f, rho0);
  CHECK(got.mean == doctest::Approx(want.mean(0)).epsilon(1e-10));
  CHECK(got.var == doctest::Approx(want.cov(0, 0)).epsilon(1e-10));
}

TEST_CASE("pgsp predictive moments match the dense conditional oracle") {
  const Eigen::Vector2d mu(0.7, 0.9);
  PgspParams params;
  params.mu = mu;
  params.tau2 = 1.4;
  params.rho = -0.3;
  params.phi = 0.06;
  const Eigen::Matrix2d t = params.t_matrix();

  Eigen::MatrixXd m(3, 2);  // latent bivariate field at the observed sites
  m << 0.9, 0.2, -0.4, 1.1, 0.3, -0.8;

  // Dense route: 8x8 site-major joint with the target first.
  std::vector<Coord> all{kTarget, kObs[0], kObs[1], kObs[2]};
  const Eigen::MatrixXd r_all = joint_corr(all, params.phi);
  Eigen::MatrixXd joint(8, 8);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          joint(2 * i + a, 2 * j + b) = r_all(i, j) * t(a, b);
        }
      }
    }
  }
  Eigen::VectorXd mean(8), values(6);
  for (int i = 0; i < 4; ++i) {
    mean(2 * i) = mu(0);
    mean(2 * i + 1) = mu(1);
  }
  for (int i = 0; i < 3; ++i) {
    values(2 * i) = m(i, 0);
    values(2 * i + 1) = m(i, 1);
  }
  const oracle::DenseConditional want = oracle::dense_conditional(
      mean, joint, {2, 3, 4, 5, 6, 7}, values);

  const Eigen::MatrixXd r = joint_corr(kObs, params.phi);
  const CovarianceFactor f = CovarianceFactor::cholesky(r);
  Eigen::VectorXd rho0(3);
  for (int i = 0; i < 3; ++i) {
    const double dx = kTarget.x_km - kObs[static_cast<std::size_t>(i)].x_km;
    const double dy = kTarget.y_km - kObs[static_cast<std::size_t>(i)].y_km;
    rho0(i) = std::exp(-params.phi * std::hypot(dx, dy));
  }
  const Eigen::MatrixXd mc = m.rowwise() - mu.transpose();
  const PgspPredictive got = pgsp_predictive_moments(mc, mu, t, f, rho0);
  CHECK((got.mean - want.mean).norm() < 1e-10);
  CHECK((got.cov - want.cov).norm() < 1e-10);
}

TEST_CASE("wrap_krig with one frozen draw reduces to the conditional") {
  const SiteTable data = obs_table({0.3, 5.9, 1.4});
  const double mu = 0.4, sigma2 = 0.8, phi = 0.07;
  const WgspPosterior post = one_draw_wgsp(mu, sigma2, phi, {0, -1, 0});

  const std::vector<KrigTarget> targets{{"t", kTarget}};
  const auto results = wrap_krig(post, data, targets, 99);
  REQUIRE(results.size() == 1);
  REQUIRE(results[0].draws.size() == 1);

  // Independent dense computation of the same conditional.
  Eigen::VectorXd y(3);
  y << 0.3, 5.9 - kTwoPi, 1.4;
  std::vector<Coord> all{kTarget, kObs[0], kObs[1], kObs[2]};
  const Eigen::MatrixXd joint = sigma2 * joint_corr(all, phi);
  const oracle::DenseConditional cond = oracle::dense_conditional(
      Eigen::VectorXd::Constant(4, mu), joint, {1, 2, 3}, y);

  // With a single draw the direction is the wrapped conditional mean and
  // the concentration is the attenuation exp(-var / 2).
  CHECK(results[0].direction.radians() ==
        doctest::Approx(wrap(cond.mean(0)).radians()).epsilon(1e-10));
  CHECK(results[0].concentration ==
        doctest::Approx(std::exp(-0.5 * cond.cov(0, 0))).epsilon(1e-10));
}

TEST_CASE("kriging a coincident target returns the observation") {
  const SiteTable data = obs_table({0.3, 5.9, 1.4});
  const WgspPosterior post = one_draw_wgsp(0.4, 0.8, 0.07, {0, -1, 0});
  const std::vector<KrigTarget> targets{
      {"here", Coord{20.0 + 1e-7, 0.0}}};  // within the coincidence radius
  const auto results = wrap_krig(post, data, targets, 1);
  REQUIRE(results.size() == 1);
  CHECK(results[0].direction.radians() == doctest::Approx(5.9));
  CHECK(results[0].concentration == 1.0);
  for (const Angle d : results[0].draws) {
    CHECK(d.radians() == doctest::Approx(5.9));
  }
}

TEST_CASE("kriging is deterministic in the seed") {
  const SiteTable data = obs_table({0.3, 5.9, 1.4});
  WgspPosterior post = one_draw_wgsp(0.4, 0.8, 0.07, {0, -1, 0});
  // A second draw with different covariance parameters exercises the
  // factor cache refresh.
  ChainOutput& chain = post.chains[0];
  Eigen::MatrixXd draws(3, chain.draws.cols());
  draws.row(0) = chain.draws.row(0);
  draws.row(1) = chain.draws.row(0);
  draws.row(2) = chain.draws.row(0);
  draws(1, 2) = 0.2;   // new phi -> new factor
  draws(2, 0) = 2.0;   // same phi as row 1 -> cache hit
  chain.draws = draws;

  const std::vector<KrigTarget> targets{{"t1", kTarget}, {"t2", {90, 90}}};
  const auto a = wrap_krig(post, data, targets, 424242);
  const auto b = wrap_krig(post, data, targets, 424242);
  const auto c = wrap_krig(post, data, targets, 424243);
  REQUIRE(a.size() == 2);
  REQUIRE(a[0].draws.size() == 3);
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(a[t].direction == b[t].direction);
    CHECK(a[t].concentration == b[t].concentration);
    for (std::size_t i = 0; i < a[t].draws.size(); ++i) {
      CHECK(a[t].draws[i] == b[t].draws[i]);
    }
  }
  CHECK(a[0].draws[0].radians() != c[0].draws[0].radians());

  // A far-away target has almost no signal: concentration must reflect the
  // prior variance, not explode.
  CHECK(a[1].concentration >= 0.0);
  CHECK(a[1].concentration <= 1.0);
}

TEST_CASE("proj_krig single-draw behaviour and determinism") {
  const SiteTable data = obs_table({0.4, 2.9, 5.3});
  PgspPosterior post;
  ChainOutput chain;
  chain.param_names = {"mu1", "mu2", "tau2", "rho", "phi",
                       "r[0]", "r[1]", "r[2]"};
  Eigen::VectorXd row(8);
  row << 0.7, 0.9, 1.4, -0.3, 0.06, 0.9, 1.7, 0.6;
  chain.draws = row.transpose();
  post.chains.push_back(chain);
  post.n_sites = 3;

  const std::vector<KrigTarget> targets{{"t", kTarget}};
  const auto a = proj_krig(post, data, targets, 7);
  const auto b = proj_krig(post, data, targets, 7);
  REQUIRE(a.size() == 1);
  REQUIRE(a[0].draws.size() == 1);
  // One predictive draw: the direction is that draw and the resultant is 1.
  CHECK(a[0].concentration == doctest::Approx(1.0));
  CHECK(a[0].direction == b[0].direction);

  const auto c = proj_krig(post, data, targets, 8);
  CHECK(a[0].direction.radians() != c[0].direction.radians());
}
