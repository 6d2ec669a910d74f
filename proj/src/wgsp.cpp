#include "circspat/wgsp.hpp"

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

}  // namespace

void WgspPriors::validate() const {
  if (!(mu_var > 0.0)) {
    throw InvalidArgument("wgsp priors: mu_var must be > 0");
  }
  if (!(sigma2_shape > 0.0) || !(sigma2_rate > 0.0)) {
    throw InvalidArgument("wgsp priors: sigma2 shape/rate must be > 0");
  }
  if (!(phi_lo > 0.0) || !(phi_lo < phi_hi)) {
    throw InvalidArgument("wgsp priors: need 0 < phi_lo < phi_hi");
  }
  if (k_max < 1) {
    throw InvalidArgument("wgsp priors: k_max must be >= 1");
  }
}

double wrapped_normal_logpdf(Angle x, Angle mu, double sigma2, int k_max) {
  if (!(sigma2 > 0.0)) {
    throw InvalidArgument("wrapped_normal_logpdf: sigma2 must be > 0");
  }
  if (k_max < 1) {
    throw InvalidArgument("wrapped_normal_logpdf: k_max must be >= 1");
  }
  const double d = x.radians() - mu.radians();
  // log-sum-exp over the winding terms.
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(2 * k_max + 1));
  for (int k = -k_max; k <= k_max; ++k) {
    const double dev = d + kTwoPi * k;
    const double t = -0.5 * dev * dev / sigma2;
    terms.push_back(t);
    if (t > max_term) max_term = t;
  }
  double acc = 0.0;
  for (const double t : terms) acc += std::exp(t - max_term);
  return -0.5 * std::log(kTwoPi * sigma2) + max_term + std::log(acc);
}

double wgsp_loglik(std::span<const Angle> x, const Eigen::VectorXi& k,
                   const WgspParams& params, const DistanceMatrix& dist) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n == 0) throw EmptyInput("wgsp_loglik: no observations");
  if (k.size() != n || dist.d.rows() != n) {
    throw InvalidArgument("wgsp_loglik: size mismatch");
  }
  if (!(params.sigma2 > 0.0)) {
    throw InvalidArgument("wgsp_loglik: sigma2 must be > 0");
  }
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = x[static_cast<std::size_t>(i)].radians() + kTwoPi * k(i);
  }
  const CovarianceFactor factor =
      CovarianceFactor::cholesky(corr_matrix(dist, params.phi));
  const Eigen::VectorXd resid =
      (y.array() - params.mu.radians()).matrix();
  return -0.5 * (static_cast<double>(n) * std::log(kTwoPi * params.sigma2) +
                 factor.log_det() + factor.quad_form(resid) / params.sigma2);
}

WgspKernel::WgspKernel(std::span<const Angle> angles,
                       const DistanceMatrix& dist, WgspPriors priors,
                       ChainConfig cfg, WgspUpdateMask mask)
    : dist_(dist), priors_(priors), cfg_(cfg), mask_(mask) {
  priors_.validate();
  n_ = static_cast<Eigen::Index>(angles.size());
  if (n_ == 0) throw EmptyInput("wgsp kernel: no observations");
  if (dist_.d.rows() != n_) {
    throw InvalidArgument("wgsp kernel: angle/distance size mismatch");
  }

  x_.resize(n_);
  for (Eigen::Index i = 0; i < n_; ++i) {
    x_(i) = angles[static_cast<std::size_t>(i)].radians();
  }
  k_ = Eigen::VectorXi::Zero(n_);
  y_ = x_;

  // Starting point: circular mean (0 if undefined), prior-mean sigma2,
  // mid-support phi.
  try {
    mu_ = circ_mean(angles).radians();
  } catch (const UndefinedDirection&) {
    mu_ = 0.0;
  }
  sigma2_ = priors_.sigma2_shape > 1.0
                ? priors_.sigma2_rate / (priors_.sigma2_shape - 1.0)
                : 1.0;
  phi_ = 0.5 * (priors_.phi_lo + priors_.phi_hi);
  phi_transform_ = BoundedTransform{priors_.phi_lo, priors_.phi_hi};

  refresh_phi_caches();

  const double lp = log_posterior_given_k();
  if (!std::isfinite(lp)) {
    throw InitializationError(
        "wgsp kernel: initial log posterior is not finite (check the data "
        "and prior support)");
  }
}

void WgspKernel::refresh_phi_caches() {
  const CovarianceFactor factor =
      CovarianceFactor::cholesky(corr_matrix(dist_, phi_));
  r_lower_ = factor.lower();
  log_det_r_ = factor.log_det();
  r_inv_ = factor.inverse();
  r_inv_one_ = r_inv_.rowwise().sum();
  one_r_inv_one_ = r_inv_one_.sum();
}

double WgspKernel::log_posterior_given_k() const {
  const Eigen::VectorXd resid = (y_.array() - mu_).matrix();
  const double quad = resid.dot(r_inv_ * resid);
  const double loglik =
      -0.5 * (static_cast<double>(n_) * std::log(kTwoPi * sigma2_) +
              log_det_r_ + quad / sigma2_);
  const double lp_mu = -0.5 * (mu_ - priors_.mu_mean) *
                       (mu_ - priors_.mu_mean) / priors_.mu_var;
  const double lp_s2 =
      log_inv_gamma_pdf(sigma2_, priors_.sigma2_shape, priors_.sigma2_rate);
  return loglik + lp_mu + lp_s2;  // phi prior is flat on its support
}

void WgspKernel::update_k(Rng& rng) {
  Eigen::VectorXd resid = (y_.array() - mu_).matrix();
  Eigen::VectorXd s = r_inv_ * resid;
  const int span = 2 * priors_.k_max + 1;
  std::vector<double> logw(static_cast<std::size_t>(span));
  std::vector<double> w(static_cast<std::size_t>(span));

  for (Eigen::Index i = 0; i < n_; ++i) {
    const double qii = r_inv_(i, i);
    const double cond_var = sigma2_ / qii;
    // Mean of y_i given the rest: mu - sum_{j != i} Q_ij resid_j / Q_ii.
    const double cond_mean = mu_ - (s(i) - qii * resid(i)) / qii;

    double max_lw = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < span; ++c) {
      const int cand = c - priors_.k_max;
      const double dev = x_(i) + kTwoPi * cand - cond_mean;
      logw[static_cast<std::size_t>(c)] = -0.5 * dev * dev / cond_var;
      max_lw = std::max(max_lw, logw[static_cast<std::size_t>(c)]);
    }
    if (!std::isfinite(max_lw)) {
      // Every candidate underflowed; keep the current winding and record it.
      ++k_underflow_rejects_;
      continue;
    }
    double total = 0.0;
    for (int c = 0; c < span; ++c) {
      w[static_cast<std::size_t>(c)] =
          std::exp(logw[static_cast<std::size_t>(c)] - max_lw);
      total += w[static_cast<std::size_t>(c)];
    }
    const double u = rng.uniform() * total;
    double cum = 0.0;
    int pick = span - 1;
    for (int c = 0; c < span; ++c) {
      cum += w[static_cast<std::size_t>(c)];
      if (u < cum) {
        pick = c;
        break;
      }
    }
    const int k_new = pick - priors_.k_max;
    if (k_new != k_(i)) {
      const double delta = kTwoPi * (k_new - k_(i));
      k_(i) = k_new;
      y_(i) += delta;
      resid(i) += delta;
      s += r_inv_.col(i) * delta;  // rank-one refresh of Q * resid
    }
  }
}

std::pair<double, double> WgspKernel::mu_conditional_moments() const {
  const double prec = 1.0 / priors_.mu_var + one_r_inv_one_ / sigma2_;
  const double b =
      priors_.mu_mean / priors_.mu_var + r_inv_one_.dot(y_) / sigma2_;
  return {b / prec, 1.0 / prec};
}

void WgspKernel::update_mu(Rng& rng) {
  const auto [mean, var] = mu_conditional_moments();
  mu_ = mean + std::sqrt(var) * rng.normal();
}

std::pair<double, double> WgspKernel::sigma2_conditional() const {
  const Eigen::VectorXd resid = (y_.array() - mu_).matrix();
  const double quad = resid.dot(r_inv_ * resid);
  return {priors_.sigma2_shape + static_cast<double>(n_) / 2.0,
          priors_.sigma2_rate + 0.5 * quad};
}

void WgspKernel::update_sigma2(Rng& rng) {
  const auto [shape, rate] = sigma2_conditional();
  // sigma2 ~ IG(shape, rate)  <=>  1/sigma2 ~ Gamma(shape, scale 1/rate).
  sigma2_ = 1.0 / rng.gamma_draw(shape, 1.0 / rate);
}

void WgspKernel::update_phi(int iter, Rng& rng) {
  const Eigen::VectorXd resid = (y_.array() - mu_).matrix();
  const double z_cur = phi_transform_.to_unconstrained(phi_);
  const double quad_cur = resid.dot(r_inv_ * resid);
  const double lp_cur = -0.5 * (log_det_r_ + quad_cur / sigma2_) +
                        phi_transform_.log_jacobian(z_cur);

  std::optional<CovarianceFactor> prop_factor;
  auto log_target = [&](double z) {
    const double phi_prop = phi_transform_.to_value(z);
    try {
      prop_factor =
          CovarianceFactor::cholesky(corr_matrix(dist_, phi_prop));
    } catch (const FactorizationError&) {
      prop_factor.reset();
      return -std::numeric_limits<double>::infinity();
    }
    return -0.5 * (prop_factor->log_det() +
                   prop_factor->quad_form(resid) / sigma2_) +
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
  }
  adapt_scale(phi_scale_, iter, cfg_);
}

void WgspKernel::sweep(int iter, Rng& rng) {
  if (mask_.k) update_k(rng);
  if (mask_.mu) update_mu(rng);
  if (mask_.sigma2) update_sigma2(rng);
  if (mask_.phi) update_phi(iter, rng);
  if (iter == cfg_.adapt_end) phi_scale_.mark();
}

Eigen::VectorXd WgspKernel::snapshot() const {
  // Report mu wrapped and shift K by the same number of turns; the residual
  // y - mu*1, and therefore any prediction from the draw, is unchanged.
  double j = std::floor(mu_ / kTwoPi);
  double mu_w = mu_ - kTwoPi * j;
  if (mu_w >= kTwoPi) {  // rounding guard
    mu_w -= kTwoPi;
    j += 1.0;
  }
  Eigen::VectorXd out(3 + n_);
  out(0) = mu_w;
  out(1) = sigma2_;
  out(2) = phi_;
  for (Eigen::Index i = 0; i < n_; ++i) {
    out(3 + i) = static_cast<double>(k_(i)) - j;
  }
  return out;
}

std::vector<std::string> WgspKernel::param_names() const {
  std::vector<std::string> names = {"mu", "sigma2", "phi"};
  names.reserve(static_cast<std::size_t>(3 + n_));
  for (Eigen::Index i = 0; i < n_; ++i) {
    names.push_back("k[" + std::to_string(i) + "]");
  }
  return names;
}

std::vector<std::pair<std::string, double>> WgspKernel::acceptance_rates()
    const {
  const double rate = phi_scale_.total_proposed > phi_scale_.marked_proposed
                          ? phi_scale_.post_mark_rate()
                          : phi_scale_.lifetime_rate();
  return {{"phi", rate}};
}

void WgspKernel::set_state(double mu_unwrapped, double sigma2, double phi,
                           const Eigen::VectorXi& k) {
  if (!(sigma2 > 0.0)) {
    throw InvalidArgument("wgsp set_state: sigma2 must be > 0");
  }
  if (!(phi > priors_.phi_lo) || !(phi < priors_.phi_hi)) {
    throw InvalidArgument("wgsp set_state: phi outside the prior support");
  }
  if (k.size() != n_) {
    throw InvalidArgument("wgsp set_state: winding vector size mismatch");
  }
  mu_ = mu_unwrapped;
  sigma2_ = sigma2;
  phi_ = phi;
  k_ = k;
  for (Eigen::Index i = 0; i < n_; ++i) {
    y_(i) = x_(i) + kTwoPi * k_(i);
  }
  refresh_phi_caches();
}

Eigen::Index WgspPosterior::total_draws() const {
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

WgspPosterior fit_wgsp(const SiteTable& data, const WgspPriors& priors,
                       const ChainConfig& cfg) {
  if (data.size() < 5) {
    throw InvalidArgument("fit_wgsp: need at least 5 sites");
  }
  priors.validate();
  cfg.validate();

  const std::vector<Angle> angles = data.directions();
  const std::vector<Coord> coords = data.coords();
  const DistanceMatrix dist = distance_matrix(coords);

  auto factory = [&](int /*chain*/) {
    return WgspKernel(angles, dist, priors, cfg);
  };

  WgspPosterior post;
  post.chains = run_chains(cfg, factory);
  post.n_sites = static_cast<Eigen::Index>(data.size());

  if (cfg.n_chains >= 2) {
    // mu is an angle: monitor its (cos, sin) embedding instead of the raw
    // wrapped value, which can straddle the cut line.
    auto mu_traces = column_traces(post.chains, 0);
    std::vector<Eigen::VectorXd> cos_traces, sin_traces;
    for (const Eigen::VectorXd& t : mu_traces) {
      cos_traces.push_back(t.array().cos());
      sin_traces.push_back(t.array().sin());
    }
    post.psrf_by_param.emplace_back("mu_cos", psrf(cos_traces));
    post.psrf_by_param.emplace_back("mu_sin", psrf(sin_traces));
    post.psrf_by_param.emplace_back("sigma2",
                                    psrf(column_traces(post.chains, 1)));
    post.psrf_by_param.emplace_back("phi",
                                    psrf(column_traces(post.chains, 2)));
    for (const auto& [name, value] : post.psrf_by_param) {
      (void)name;
      if (!(value < kPsrfThreshold)) post.converged = false;
    }
  }
  return post;
}

WgspSimulation simulate_wgsp(std::span<const Coord> coords,
                             const WgspParams& params, Rng& rng) {
  if (coords.empty()) throw EmptyInput("simulate_wgsp: no coordinates");
  if (!(params.sigma2 > 0.0)) {
    throw InvalidArgument("simulate_wgsp: sigma2 must be > 0");
  }

  const DistanceMatrix dist = distance_matrix(coords);
  const CovarianceFactor factor =
      CovarianceFactor::cholesky(corr_matrix(dist, params.phi));

  const auto n = static_cast<Eigen::Index>(coords.size());
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();

  WgspSimulation sim;
  sim.latent = (params.mu.radians() +
                (std::sqrt(params.sigma2) * (factor.lower() * z)).array())
                   .matrix();

  std::vector<Site> sites;
  sites.reserve(static_cast<std::size_t>(n));
  char id[32];
  for (Eigen::Index i = 0; i < n; ++i) {
    std::snprintf(id, sizeof(id), "site_%03lld", static_cast<long long>(i));
    sites.push_back(Site{id, coords[static_cast<std::size_t>(i)],
                         wrap(sim.latent(i))});
  }
  sim.table = SiteTable(std::move(sites));
  return sim;
}

}  // namespace circspat
