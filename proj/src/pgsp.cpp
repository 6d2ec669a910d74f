#include "circspat/pgsp.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "circspat/circular.hpp"
#include "circspat/errors.hpp"

namespace circspat {

namespace {

double log_inv_gamma_pdf(double v, double shape, double rate) {
  if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) -
         (shape + 1.0) * std::log(v) - rate / v;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

struct TPieces {
  Eigen::Matrix2d t;
  Eigen::Matrix2d t_inv;
  double log_det = 0.0;
};

TPieces t_pieces(double tau2, double rho) {
  const double tau = std::sqrt(tau2);
  TPieces p;
  p.t << tau2, rho * tau, rho * tau, 1.0;
  const double det = tau2 * (1.0 - rho * rho);
  p.t_inv << 1.0, -rho * tau, -rho * tau, tau2;
  p.t_inv /= det;
  p.log_det = std::log(det);
  return p;
}

double log_bvn_density(const Eigen::Vector2d& v, const Eigen::Vector2d& mean,
                       const Eigen::Matrix2d& prec, double log_det_cov) {
  const Eigen::Vector2d d = v - mean;
  return -0.5 * (2.0 * std::log(kTwoPi) + log_det_cov + d.dot(prec * d));
}

}  // namespace

Eigen::Matrix2d PgspParams::t_matrix() const {
  validate();
  return t_pieces(tau2, rho).t;
}

void PgspParams::validate() const {
  if (!mu.allFinite()) {
    throw InvalidArgument("pgsp params: mu must be finite");
  }
  if (!(tau2 > 0.0)) throw InvalidArgument("pgsp params: tau2 must be > 0");
  if (!(std::fabs(rho) < 1.0)) {
    throw InvalidArgument("pgsp params: rho must be in (-1, 1)");
  }
  if (!(phi > 0.0)) throw InvalidArgument("pgsp params: phi must be > 0");
}

void PgspPriors::validate() const {
  if (!mu_mean.allFinite()) {
    throw InvalidArgument("pgsp priors: mu_mean must be finite");
  }
  const Eigen::Matrix2d sym = (mu_cov + mu_cov.transpose()) / 2.0;
  if ((mu_cov - sym).norm() > 1e-12 * std::max(1.0, mu_cov.norm()) ||
      !(mu_cov(0, 0) > 0.0) || !(mu_cov.determinant() > 0.0)) {
    throw InvalidArgument("pgsp priors: mu_cov must be symmetric positive "
                          "definite");
  }
  if (!(tau2_shape > 0.0) || !(tau2_rate > 0.0)) {
    throw InvalidArgument("pgsp priors: tau2 shape/rate must be > 0");
  }
  if (!(phi_lo > 0.0) || !(phi_lo < phi_hi)) {
    throw InvalidArgument("pgsp priors: need 0 < phi_lo < phi_hi");
  }
}

double projected_normal_pdf(Angle theta, const Eigen::Vector2d& mu,
                            const Eigen::Matrix2d& sigma) {
  if (!mu.allFinite() || !sigma.allFinite()) {
    throw InvalidArgument("projected_normal_pdf: non-finite inputs");
  }
  if (std::fabs(sigma(0, 1) - sigma(1, 0)) >
      1e-10 * std::max(1.0, sigma.norm())) {
    throw InvalidArgument("projected_normal_pdf: sigma must be symmetric");
  }
  const double det = sigma.determinant();
  if (!(sigma(0, 0) > 0.0) || !(det > 0.0)) {
    throw InvalidArgument(
        "projected_normal_pdf: sigma must be positive definite");
  }

  Eigen::Matrix2d sinv;
  sinv << sigma(1, 1), -sigma(0, 1), -sigma(1, 0), sigma(0, 0);
  sinv /= det;

  const Eigen::Vector2d u(std::cos(theta.radians()),
                          std::sin(theta.radians()));
  const double a = u.dot(sinv * u);
  const double b = u.dot(sinv * mu);
  const double d = mu.dot(sinv * mu);

  // Radial integral of the bivariate normal along direction u; the exponent
  // (b^2 - a*d) / (2a) is <= 0 by Cauchy-Schwarz, so nothing overflows.
  const double base = 1.0 / (kTwoPi * std::sqrt(det));
  const double term1 = std::exp(-0.5 * d) / a;
  const double term2 = b / std::pow(a, 1.5) * std::sqrt(kTwoPi) *
                       normal_cdf(b / std::sqrt(a)) *
                       std::exp((b * b - a * d) / (2.0 * a));
  return base * (term1 + term2);
}

Eigen::VectorXd stack_embedding(std::span<const Angle> x,
                                const Eigen::VectorXd& r) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (r.size() != n) {
    throw InvalidArgument("stack_embedding: angle/radius size mismatch");
  }
  Eigen::VectorXd out(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double th = x[static_cast<std::size_t>(i)].radians();
    out(2 * i) = r(i) * std::cos(th);
    out(2 * i + 1) = r(i) * std::sin(th);
  }
  return out;
}

double pgsp_loglik(std::span<const Angle> x, const Eigen::VectorXd& r,
                   const PgspParams& params, const DistanceMatrix& dist) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n == 0) throw EmptyInput("pgsp_loglik: no observations");
  if (r.size() != n || dist.d.rows() != n) {
    throw InvalidArgument("pgsp_loglik: size mismatch");
  }
  if (!(r.minCoeff() > 0.0)) {
    throw InvalidArgument("pgsp_loglik: radii must be > 0");
  }
  params.validate();

  Eigen::MatrixXd mc(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double th = x[static_cast<std::size_t>(i)].radians();
    mc(i, 0) = r(i) * std::cos(th) - params.mu(0);
    mc(i, 1) = r(i) * std::sin(th) - params.mu(1);
  }
  const CovarianceFactor factor =
      CovarianceFactor::cholesky(corr_matrix(dist, params.phi));
  const TPieces t = t_pieces(params.tau2, params.rho);
  const Eigen::Matrix2d s2 = mc.transpose() * factor.solve(mc);
  const double quad = (t.t_inv * s2).trace();
  return -0.5 * (2.0 * static_cast<double>(n) * std::log(kTwoPi) +
                 2.0 * factor.log_det() + static_cast<double>(n) * t.log_det +
                 quad) +
         r.array().log().sum();
}

PgspKernel::PgspKernel(std::span<const Angle> angles,
                       const DistanceMatrix& dist, PgspPriors priors,
                       ChainConfig cfg, PgspUpdateMask mask)
    : dist_(dist), priors_(priors), cfg_(cfg), mask_(mask) {
  priors_.validate();
  n_ = static_cast<Eigen::Index>(angles.size());
  if (n_ == 0) throw EmptyInput("pgsp kernel: no observations");
  if (dist_.d.rows() != n_) {
    throw InvalidArgument("pgsp kernel: angle/distance size mismatch");
  }

  cos_x_.resize(n_);
  sin_x_.resize(n_);
  for (Eigen::Index i = 0; i < n_; ++i) {
    const double th = angles[static_cast<std::size_t>(i)].radians();
    cos_x_(i) = std::cos(th);
    sin_x_(i) = std::sin(th);
  }

  r_ = Eigen::VectorXd::Ones(n_);
  try {
    const Angle mean = circ_mean(angles);
    mu_ = Eigen::Vector2d(std::cos(mean.radians()), std::sin(mean.radians()));
  } catch (const UndefinedDirection&) {
    mu_ = Eigen::Vector2d(0.0, 1.0);
  }
  tau2_ = 1.0;
  rho_ = 0.0;
  phi_ = 0.5 * (priors_.phi_lo + priors_.phi_hi);
  phi_transform_ = BoundedTransform{priors_.phi_lo, priors_.phi_hi};

  mu_cov_inv_ = priors_.mu_cov.inverse();
  r_scales_.assign(static_cast<std::size_t>(n_), AdaptiveScale{});

  refresh_t_caches();
  refresh_phi_caches();
  refresh_latent();

  if (!std::isfinite(log_posterior())) {
    throw InitializationError(
        "pgsp kernel: initial log posterior is not finite (check the data "
        "and prior support)");
  }
}

void PgspKernel::refresh_phi_caches() {
  const CovarianceFactor factor =
      CovarianceFactor::cholesky(corr_matrix(dist_, phi_));
  r_lower_ = factor.lower();
  log_det_r_ = factor.log_det();
  r_inv_ = factor.inverse();
  r_inv_one_ = r_inv_.rowwise().sum();
  one_r_inv_one_ = r_inv_one_.sum();
  if (mc_.rows() == n_) p_ = r_inv_ * mc_;
}

void PgspKernel::refresh_t_caches() {
  const TPieces t = t_pieces(tau2_, rho_);
  t_ = t.t;
  t_inv_ = t.t_inv;
  log_det_t_ = t.log_det;
}

void PgspKernel::refresh_latent() {
  m_.resize(n_, 2);
  for (Eigen::Index i = 0; i < n_; ++i) {
    m_(i, 0) = r_(i) * cos_x_(i);
    m_(i, 1) = r_(i) * sin_x_(i);
  }
  mc_ = m_.rowwise() - mu_.transpose();
  p_ = r_inv_ * mc_;
}

double PgspKernel::t_log_target(const Eigen::Matrix2d& t_inv,
                                double log_det_t) const {
  const Eigen::Matrix2d s2 = mc_.transpose() * p_;
  return -0.5 * (static_cast<double>(n_) * log_det_t +
                 (t_inv * s2).trace());
}

double PgspKernel::log_posterior() const {
  const double loglik =
      t_log_target(t_inv_, log_det_t_) -
      0.5 * (2.0 * static_cast<double>(n_) * std::log(kTwoPi) +
             2.0 * log_det_r_) +
      r_.array().log().sum();
  const Eigen::Vector2d dm = mu_ - priors_.mu_mean;
  return loglik - 0.5 * dm.dot(mu_cov_inv_ * dm) +
         log_inv_gamma_pdf(tau2_, priors_.tau2_shape, priors_.tau2_rate);
}

std::pair<Eigen::Vector2d, Eigen::Matrix2d> PgspKernel::latent_conditional(
    Eigen::Index site) const {
  const double qii = r_inv_(site, site);
  const Eigen::Vector2d rest =
      p_.row(site).transpose() - qii * mc_.row(site).transpose();
  const Eigen::Vector2d mean = mu_ - rest / qii;
  return {mean, t_ / qii};
}

void PgspKernel::update_r(int iter, Rng& rng) {
  for (Eigen::Index i = 0; i < n_; ++i) {
    const double qii = r_inv_(i, i);
    const auto [cond_mean, cond_cov] = latent_conditional(i);
    (void)cond_cov;
    const Eigen::Matrix2d cond_prec = qii * t_inv_;
    const double log_det_cond = log_det_t_ - 2.0 * std::log(qii);
    const Eigen::Vector2d u(cos_x_(i), sin_x_(i));

    const double z_cur = std::log(r_(i));
    // Log target in z = log r: bivariate normal at r*u, plus r from the
    // polar Jacobian and r from the log transform => + 2z.
    auto log_target = [&](double z) {
      const Eigen::Vector2d v = std::exp(z) * u;
      return log_bvn_density(v, cond_mean, cond_prec, log_det_cond) + 2.0 * z;
    };
    const double lp_cur = log_target(z_cur);

    AdaptiveScale& scale = r_scales_[static_cast<std::size_t>(i)];
    const MetropolisResult res =
        rw_metropolis_step(z_cur, lp_cur, log_target, scale, rng);
    if (res.accepted) {
      const double r_new = std::exp(res.value);
      const Eigen::Vector2d delta = (r_new - r_(i)) * u;
      r_(i) = r_new;
      m_.row(i) += delta.transpose();
      mc_.row(i) += delta.transpose();
      p_ += r_inv_.col(i) * delta.transpose();  // rank-one refresh
    }
    adapt_scale(scale, iter, cfg_);
  }
}

std::pair<Eigen::Vector2d, Eigen::Matrix2d> PgspKernel::mu_conditional_moments()
    const {
  const Eigen::Matrix2d prec = mu_cov_inv_ + one_r_inv_one_ * t_inv_;
  const Eigen::Vector2d h = m_.transpose() * r_inv_one_;
  const Eigen::Vector2d b = mu_cov_inv_ * priors_.mu_mean + t_inv_ * h;
  const Eigen::Matrix2d cov = prec.inverse();
  return {cov * b, (cov + cov.transpose()) / 2.0};
}

void PgspKernel::update_mu(Rng& rng) {
  const auto [mean, cov] = mu_conditional_moments();
  const Eigen::LLT<Eigen::Matrix2d> llt(cov);
  Eigen::Vector2d z(rng.normal(), rng.normal());
  const Eigen::Vector2d mu_new = mean + llt.matrixL() * z;
  const Eigen::Vector2d delta = mu_new - mu_;
  mu_ = mu_new;
  mc_.rowwise() -= delta.transpose();
  p_ -= r_inv_one_ * delta.transpose();
}

void PgspKernel::update_tau2(int iter, Rng& rng) {
  const double z_cur = std::log(tau2_);
  auto log_target = [&](double z) {
    const double tau2_c = std::exp(z);
    if (!std::isfinite(tau2_c) || tau2_c <= 0.0) {
      return -std::numeric_limits<double>::infinity();
    }
    const TPieces t = t_pieces(tau2_c, rho_);
    return t_log_target(t.t_inv, t.log_det) +
           log_inv_gamma_pdf(tau2_c, priors_.tau2_shape, priors_.tau2_rate) +
           z;  // Jacobian of the log transform
  };
  const double lp_cur = log_target(z_cur);
  const MetropolisResult res =
      rw_metropolis_step(z_cur, lp_cur, log_target, tau2_scale_, rng);
  if (res.accepted) {
    tau2_ = std::exp(res.value);
    refresh_t_caches();
  }
  adapt_scale(tau2_scale_, iter, cfg_);
}

void PgspKernel::update_rho(int iter, Rng& rng) {
  const double z_cur = rho_transform_.to_unconstrained(rho_);
  auto log_target = [&](double z) {
    const double rho_c = rho_transform_.to_value(z);
    const TPieces t = t_pieces(tau2_, rho_c);
    return t_log_target(t.t_inv, t.log_det) + rho_transform_.log_jacobian(z);
  };
  const double lp_cur = log_target(z_cur);
  const MetropolisResult res =
      rw_metropolis_step(z_cur, lp_cur, log_target, rho_scale_, rng);
  if (res.accepted) {
    rho_ = rho_transform_.to_value(res.value);
    refresh_t_caches();
  }
  adapt_scale(rho_scale_, iter, cfg_);
}

void PgspKernel::update_phi(int iter, Rng& rng) {
  const double z_cur = phi_transform_.to_unconstrained(phi_);
  const Eigen::Matrix2d s2_cur = mc_.transpose() * p_;
  const double lp_cur = -0.5 * (2.0 * log_det_r_ + (t_inv_ * s2_cur).trace()) +
                        phi_transform_.log_jacobian(z_cur);

  std::optional<CovarianceFactor> prop_factor;
  auto log_target = [&](double z) {
    const double phi_prop = phi_transform_.to_value(z);
    try {
      prop_factor = CovarianceFactor::cholesky(corr_matrix(dist_, phi_prop));
    } catch (const FactorizationError&) {
      prop_factor.reset();
      return -std::numeric_limits<double>::infinity();
    }
    const Eigen::Matrix2d s2 = mc_.transpose() * prop_factor->solve(mc_);
    return -0.5 * (2.0 * prop_factor->log_det() + (t_inv_ * s2).trace()) +
           phi_transform_.log_jacobian(z);
  };

  const MetropolisResult res =
      rw_metropolis_step(z_cur, lp_cur, log_target, phi_scale_, rng);
  if (res.accepted) {
    phi_ = phi_transform_.to_value(res.value);
    r_lower_ = prop_factor->lower();
    log_det_r_ = prop_factor->log_det();
    r_inv_ = prop_factor->inverse();
    r_inv_one_ = r_inv_.rowwise().sum();
    one_r_inv_one_ = r_inv_one_.sum();
    p_ = r_inv_ * mc_;
  }
  adapt_scale(phi_scale_, iter, cfg_);
}

void PgspKernel::sweep(int iter, Rng& rng) {
  if (mask_.r) update_r(iter, rng);
  if (mask_.mu) update_mu(rng);
  if (mask_.tau2) update_tau2(iter, rng);
  if (mask_.rho) update_rho(iter, rng);
  if (mask_.phi) update_phi(iter, rng);
  if (iter == cfg_.adapt_end) {
    for (AdaptiveScale& s : r_scales_) s.mark();
    tau2_scale_.mark();
    rho_scale_.mark();
    phi_scale_.mark();
  }
}

Eigen::VectorXd PgspKernel::snapshot() const {
  Eigen::VectorXd out(5 + n_);
  out(0) = mu_(0);
  out(1) = mu_(1);
  out(2) = tau2_;
  out(3) = rho_;
  out(4) = phi_;
  out.segment(5, n_) = r_;
  return out;
}

std::vector<std::string> PgspKernel::param_names() const {
  std::vector<std::string> names = {"mu1", "mu2", "tau2", "rho", "phi"};
  names.reserve(static_cast<std::size_t>(5 + n_));
  for (Eigen::Index i = 0; i < n_; ++i) {
    names.push_back("r[" + std::to_string(i) + "]");
  }
  return names;
}

std::vector<std::pair<std::string, double>> PgspKernel::acceptance_rates()
    const {
  auto rate = [](const AdaptiveScale& s) {
    return s.total_proposed > s.marked_proposed ? s.post_mark_rate()
                                                : s.lifetime_rate();
  };
  std::vector<std::pair<std::string, double>> out = {
      {"tau2", rate(tau2_scale_)},
      {"rho", rate(rho_scale_)},
      {"phi", rate(phi_scale_)}};
  for (Eigen::Index i = 0; i < n_; ++i) {
    out.emplace_back("r[" + std::to_string(i) + "]",
                     rate(r_scales_[static_cast<std::size_t>(i)]));
  }
  return out;
}

void PgspKernel::set_state(const Eigen::Vector2d& mu, double tau2, double rho,
                           double phi, const Eigen::VectorXd& r) {
  if (!(tau2 > 0.0)) throw InvalidArgument("pgsp set_state: tau2 must be > 0");
  if (!(std::fabs(rho) < 1.0)) {
    throw InvalidArgument("pgsp set_state: rho must be in (-1, 1)");
  }
  if (!(phi > priors_.phi_lo) || !(phi < priors_.phi_hi)) {
    throw InvalidArgument("pgsp set_state: phi outside the prior support");
  }
  if (r.size() != n_ || !(r.minCoeff() > 0.0)) {
    throw InvalidArgument("pgsp set_state: radii must be positive, one per "
                          "site");
  }
  mu_ = mu;
  tau2_ = tau2;
  rho_ = rho;
  phi_ = phi;
  r_ = r;
  refresh_t_caches();
  refresh_phi_caches();
  refresh_latent();
}

Eigen::Index PgspPosterior::total_draws() const {
  Eigen::Index total = 0;
  for (const ChainOutput& c : chains) total += c.draws.rows();
  return total;
}

namespace {

std::vector<Eigen::VectorXd> column_traces(
    const std::vector<ChainOutput>& chains, Eigen::Index col) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(chains.size());
  for (const ChainOutput& c : chains) out.push_back(c.draws.col(col));
  return out;
}

}  // namespace

PgspPosterior fit_pgsp(const SiteTable& data, const PgspPriors& priors,
                       const ChainConfig& cfg) {
  if (data.size() < 5) {
    throw InvalidArgument("fit_pgsp: need at least 5 sites");
  }
  priors.validate();
  cfg.validate();

  const std::vector<Angle> angles = data.directions();
  const std::vector<Coord> coords = data.coords();
  const DistanceMatrix dist = distance_matrix(coords);

  auto factory = [&](int /*chain*/) {
    return PgspKernel(angles, dist, priors, cfg);
  };

  PgspPosterior post;
  post.chains = run_chains(cfg, factory);
  post.n_sites = static_cast<Eigen::Index>(data.size());

  if (cfg.n_chains >= 2) {
    const char* names[] = {"mu1", "mu2", "tau2", "rho", "phi"};
    for (Eigen::Index c = 0; c < 5; ++c) {
      post.psrf_by_param.emplace_back(names[c],
                                      psrf(column_traces(post.chains, c)));
    }
    for (const auto& [name, value] : post.psrf_by_param) {
      (void)name;
      if (!(value < kPsrfThreshold)) post.converged = false;
    }
  }
  return post;
}

PgspSimulation simulate_pgsp(std::span<const Coord> coords,
                             const PgspParams& params, Rng& rng) {
  if (coords.empty()) throw EmptyInput("simulate_pgsp: no coordinates");
  params.validate();

  const DistanceMatrix dist = distance_matrix(coords);
  const CovarianceFactor r_factor =
      CovarianceFactor::cholesky(corr_matrix(dist, params.phi));
  const Eigen::LLT<Eigen::Matrix2d> t_llt(params.t_matrix());
  const Eigen::Matrix2d t_lower = t_llt.matrixL();

  const auto n = static_cast<Eigen::Index>(coords.size());
  Eigen::MatrixXd z(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    z(i, 0) = rng.normal();
    z(i, 1) = rng.normal();
  }

  PgspSimulation sim;
  sim.latent = (r_factor.lower() * z * t_lower.transpose()).rowwise() +
               params.mu.transpose();

  std::vector<Site> sites;
  sites.reserve(static_cast<std::size_t>(n));
  char id[32];
  for (Eigen::Index i = 0; i < n; ++i) {
    std::snprintf(id, sizeof(id), "site_%03lld", static_cast<long long>(i));
    sites.push_back(Site{id, coords[static_cast<std::size_t>(i)],
                         atan2_pos(sim.latent(i, 1), sim.latent(i, 0))});
  }
  sim.table = SiteTable(std::move(sites));
  return sim;
}

}  // namespace circspat
