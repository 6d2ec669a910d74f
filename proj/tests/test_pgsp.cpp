#include <cmath>
#include <vector>

#include "doctest.h"

#include "circspat/errors.hpp"
#include "circspat/pgsp.hpp"
#include "circspat/rng.hpp"
#include "support/oracles.hpp"

using namespace circspat;

namespace {

const std::vector<Coord> kTri{{0, 0}, {25, 0}, {0, 40}};

std::vector<Angle> wrap_all(std::initializer_list<double> xs) {
  std::vector<Angle> out;
  for (double x : xs) out.push_back(wrap(x));
  return out;
}

ChainConfig tiny_chain() {
  ChainConfig cfg;
  cfg.n_iter = 200;
  cfg.burnin = 100;
  cfg.thin = 1;
  cfg.n_chains = 1;
  cfg.adapt_start = 10;
  cfg.adapt_end = 100;
  return cfg;
}

// Site-major 2n x 2n covariance R (x) T, built with plain loops.
Eigen::MatrixXd kron_cov(const Eigen::MatrixXd& r, const Eigen::Matrix2d& t) {
  const Eigen::Index n = r.rows();
  Eigen::MatrixXd cov(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          cov(2 * i + a, 2 * j + b) = r(i, j) * t(a, b);
        }
      }
    }
  }
  return cov;
}

// f(theta) as a radial integral of the bivariate normal, trapezoid rule.
double projected_pdf_quadrature(double theta, const Eigen::Vector2d& mu,
                                const Eigen::Matrix2d& sigma) {
  const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
  return oracle::trapezoid(
      [&](double r) { return r * oracle::bvn_pdf(r * u, mu, sigma); }, 0.0,
      40.0, 20000);
}

}  // namespace

TEST_CASE("pgsp parameter validation") {
  PgspParams p;
  CHECK_NOTHROW(p.validate());
  p.tau2 = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = PgspParams{};
  p.rho = 1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);

  const Eigen::Matrix2d t = PgspParams{}.t_matrix();
  CHECK(t(0, 0) == 1.0);  // tau2
  CHECK(t(1, 1) == 1.0);
  CHECK(t(0, 1) == 0.0);  // rho * tau

  PgspPriors priors;
  priors.mu_cov << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(priors.validate(), InvalidArgument);
}

TEST_CASE("projected normal pdf matches radial quadrature") {
  Eigen::Vector2d mu(1.1, -0.4);
  Eigen::Matrix2d sigma;
  sigma << 1.3, 0.4, 0.4, 0.8;
  for (double theta : {0.0, 0.7, 2.2, 4.0, 5.9}) {
    CHECK(projected_normal_pdf(wrap(theta), mu, sigma) ==
          doctest::Approx(projected_pdf_quadrature(theta, mu, sigma))
              .epsilon(1e-7));
  }
}

TEST_CASE("projected normal pdf integrates to one and handles zero mean") {
  // mu = 0 collapses to the uniform density 1 / (2 pi).
  CHECK(projected_normal_pdf(wrap(1.0), Eigen::Vector2d::Zero(),
                             Eigen::Matrix2d::Identity()) ==
        doctest::Approx(1.0 / kTwoPi).epsilon(1e-12));

  Eigen::Vector2d mu(0.8, 1.5);
  Eigen::Matrix2d sigma;
  sigma << 2.0, -0.5, -0.5, 1.2;
  const double mass = oracle::trapezoid(
      [&](double th) { return projected_normal_pdf(wrap(th), mu, sigma); },
      0.0, kTwoPi, 4096);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("complete-data log likelihood equals the dense kronecker oracle") {
  const DistanceMatrix dist = distance_matrix(kTri);
  const auto x = wrap_all({0.4, 2.9, 5.3});
  Eigen::VectorXd r(3);
  r << 0.9, 1.7, 0.6;
  PgspParams params;
  params.mu = Eigen::Vector2d(0.7, 0.9);
  params.tau2 = 1.4;
  params.rho = -0.3;
  params.phi = 0.06;

  Eigen::VectorXd vec(6), mean(6);
  for (int i = 0; i < 3; ++i) {
    vec(2 * i) = r(i) * std::cos(x[static_cast<std::size_t>(i)].radians());
    vec(2 * i + 1) =
        r(i) * std::sin(x[static_cast<std::size_t>(i)].radians());
    mean(2 * i) = params.mu(0);
    mean(2 * i + 1) = params.mu(1);
  }
  const Eigen::MatrixXd cov =
      kron_cov(corr_matrix(dist, params.phi), params.t_matrix());
  double want = oracle::mvn_logpdf_dense(vec, mean, cov);
  for (int i = 0; i < 3; ++i) want += std::log(r(i));  // polar jacobian

  CHECK(pgsp_loglik(x, r, params, dist) ==
        doctest::Approx(want).epsilon(1e-11));
}

TEST_CASE("latent site conditional matches the partitioned oracle") {
  const DistanceMatrix dist = distance_matrix(kTri);
  const auto x = wrap_all({0.4, 2.9, 5.3});
  PgspKernel kernel(x, dist, PgspPriors{}, tiny_chain());

  Eigen::VectorXd r(3);
  r << 0.9, 1.7, 0.6;
  const Eigen::Vector2d mu(0.7, 0.9);
  const double tau2 = 1.4, rho = -0.3, phi = 0.06;
  kernel.set_state(mu, tau2, rho, phi, r);

  PgspParams params;
  params.mu = mu;
  params.tau2 = tau2;
  params.rho = rho;
  params.phi = phi;
  const Eigen::MatrixXd cov =
      kron_cov(corr_matrix(dist, phi), params.t_matrix());
  Eigen::VectorXd vec(6), mean(6);
  for (int i = 0; i < 3; ++i) {
    vec(2 * i) = r(i) * std::cos(x[static_cast<std::size_t>(i)].radians());
    vec(2 * i + 1) =
        r(i) * std::sin(x[static_cast<std::size_t>(i)].radians());
    mean(2 * i) = mu(0);
    mean(2 * i + 1) = mu(1);
  }

  for (Eigen::Index site = 0; site < 3; ++site) {
    std::vector<int> observed;
    Eigen::VectorXd values(4);
    int v = 0;
    for (int j = 0; j < 6; ++j) {
      if (j / 2 != site) {
        observed.push_back(j);
        values(v++) = vec(j);
      }
    }
    const oracle::DenseConditional want =
        oracle::dense_conditional(mean, cov, observed, values);
    const auto [got_mean, got_cov] = kernel.latent_conditional(site);
    CHECK((got_mean - want.mean).norm() < 1e-10);
    CHECK((got_cov - want.cov).norm() < 1e-10);
  }
}

TEST_CASE("mu full conditional matches the dense conjugate oracle") {
  const DistanceMatrix dist = distance_matrix(kTri);
  const auto x = wrap_all({0.4, 2.9, 5.3});
  PgspPriors priors;
  priors.mu_mean = Eigen::Vector2d(0.2, 0.5);
  priors.mu_cov << 4.0, 1.0, 1.0, 3.0;
  PgspKernel kernel(x, dist, priors, tiny_chain());

  Eigen::VectorXd r(3);
  r << 0.9, 1.7, 0.6;
  const Eigen::Vector2d mu(0.7, 0.9);
  const double tau2 = 1.4, rho = -0.3, phi = 0.06;
  kernel.set_state(mu, tau2, rho, phi, r);

  // Dense route: regression of vec(Y) on the design (1 (x) I2).
  PgspParams params;
  params.tau2 = tau2;
  params.rho = rho;
  const Eigen::MatrixXd cov =
      kron_cov(corr_matrix(dist, phi), params.t_matrix());
  const Eigen::MatrixXd cov_inv =
      Eigen::FullPivLU<Eigen::MatrixXd>(cov).inverse();
  Eigen::MatrixXd design(6, 2);
  design << 1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1;
  Eigen::VectorXd vec(6);
  for (int i = 0; i < 3; ++i) {
    vec(2 * i) = r(i) * std::cos(x[static_cast<std::size_t>(i)].radians());
    vec(2 * i + 1) =
        r(i) * std::sin(x[static_cast<std::size_t>(i)].radians());
  }
  const Eigen::Matrix2d prior_prec =
      Eigen::FullPivLU<Eigen::MatrixXd>(priors.mu_cov).inverse();
  const Eigen::Matrix2d prec =
      prior_prec + design.transpose() * cov_inv * design;
  const Eigen::Vector2d lin =
      prior_prec * priors.mu_mean + design.transpose() * cov_inv * vec;
  const Eigen::Matrix2d want_cov =
      Eigen::FullPivLU<Eigen::MatrixXd>(prec).inverse();
  const Eigen::Vector2d want_mean = want_cov * lin;

  const auto [got_mean, got_cov] = kernel.mu_conditional_moments();
  CHECK((got_mean - want_mean).norm() < 1e-10);
  CHECK((got_cov - want_cov).norm() < 1e-10);
}

TEST_CASE("radius sampler reproduces the quadrature mean for one site") {
  const std::vector<Coord> one{{0, 0}};
  const DistanceMatrix dist = distance_matrix(one);
  const auto x = wrap_all({std::numbers::pi / 4});
  PgspUpdateMask mask;
  mask.mu = mask.tau2 = mask.rho = mask.phi = false;
  ChainConfig cfg = tiny_chain();
  cfg.adapt_end = 5000;
  cfg.burnin = 5000;
  cfg.n_iter = 100000;
  PgspKernel kernel(x, dist, PgspPriors{}, cfg, mask);
  const Eigen::Vector2d mu(1.0, 1.0);
  kernel.set_state(mu, 1.0, 0.0, 0.1, Eigen::VectorXd::Ones(1));

  // Target density of r: proportional to r * N2(r u; mu, I).
  const Eigen::Matrix2d eye = Eigen::Matrix2d::Identity();
  const Eigen::Vector2d u(std::cos(x[0].radians()), std::sin(x[0].radians()));
  const double num = oracle::trapezoid(
      [&](double r) { return r * r * oracle::bvn_pdf(r * u, mu, eye); }, 0.0,
      30.0, 20000);
  const double den = oracle::trapezoid(
      [&](double r) { return r * oracle::bvn_pdf(r * u, mu, eye); }, 0.0,
      30.0, 20000);

  Rng rng(23);
  double sum = 0.0;
  int kept = 0;
  for (int iter = 1; iter <= cfg.n_iter; ++iter) {
    kernel.update_r(iter, rng);
    if (iter > cfg.burnin) {
      sum += kernel.r()(0);
      ++kept;
    }
  }
  CHECK(sum / kept == doctest::Approx(num / den).epsilon(0.02));
}

TEST_CASE("sweeps keep every parameter inside its support") {
  const DistanceMatrix dist = distance_matrix(kTri);
  const auto x = wrap_all({0.4, 2.9, 5.3});
  PgspPriors priors;
  PgspKernel kernel(x, dist, priors, tiny_chain());
  Rng rng(5);
  for (int iter = 1; iter <= 300; ++iter) {
    kernel.sweep(iter, rng);
    CHECK(kernel.tau2() > 0.0);
    CHECK(std::fabs(kernel.rho()) < 1.0);
    CHECK(kernel.phi() > priors.phi_lo);
    CHECK(kernel.phi() < priors.phi_hi);
    for (int i = 0; i < 3; ++i) CHECK(kernel.r()(i) > 0.0);
  }

  const Eigen::VectorXd snap = kernel.snapshot();
  const auto names = kernel.param_names();
  REQUIRE(names.size() == 5 + 3);
  CHECK(names[0] == "mu1");
  CHECK(names[4] == "phi");
  CHECK(names[5] == "r[0]");
  CHECK(snap.size() == 8);
}

TEST_CASE("simulate_pgsp is reproducible and projects its own field") {
  PgspParams params;
  params.mu = Eigen::Vector2d(1.0, 1.0);
  params.tau2 = 1.0;
  params.rho = 0.3;
  params.phi = 0.05;
  Rng rng1(11), rng2(11);
  const PgspSimulation a = simulate_pgsp(kTri, params, rng1);
  const PgspSimulation b = simulate_pgsp(kTri, params, rng2);
  REQUIRE(a.table.size() == 3);
  CHECK(a.latent == b.latent);
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(a.table[static_cast<std::size_t>(i)].direction.radians() ==
          doctest::Approx(
              atan2_pos(a.latent(i, 1), a.latent(i, 0)).radians()));
  }
}

TEST_CASE("a short projected fit returns the advertised shapes") {
  Rng rng(2);
  std::vector<Coord> coords;
  for (int i = 0; i < 10; ++i) {
    coords.push_back({rng.uniform() * 150.0, rng.uniform() * 150.0});
  }
  PgspParams params;
  params.mu = Eigen::Vector2d(1.0, 1.0);
  params.phi = 0.05;
  const PgspSimulation sim = simulate_pgsp(coords, params, rng);

  ChainConfig cfg;
  cfg.n_iter = 600;
  cfg.burnin = 200;
  cfg.thin = 2;
  cfg.n_chains = 2;
  cfg.adapt_start = 20;
  cfg.adapt_end = 200;
  cfg.seed = 3;

  const PgspPosterior post = fit_pgsp(sim.table, PgspPriors{}, cfg);
  REQUIRE(post.chains.size() == 2);
  CHECK(post.n_sites == 10);
  CHECK(post.chains[0].draws.cols() == 5 + 10);
  REQUIRE(post.psrf_by_param.size() == 5);
  CHECK(post.psrf_by_param[0].first == "mu1");
  // tau2, rho, phi and every per-site radius get an acceptance entry.
  CHECK(post.chains[0].acceptance_rates.size() == 3 + 10);
}
