#include "circspat/kriging.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "circspat/circular.hpp"
#include "circspat/errors.hpp"
#include "circspat/spatial.hpp"

namespace circspat {

namespace {

struct TargetGeometry {
  Eigen::VectorXd dist;           // distances to every observed site (km)
  Eigen::Index coincident = -1;   // index of an observed site within range
};

std::vector<TargetGeometry> target_geometry(
    const std::vector<Coord>& data_coords,
    std::span<const KrigTarget> targets) {
  std::vector<TargetGeometry> out;
  out.reserve(targets.size());
  for (const KrigTarget& t : targets) {
    if (!std::isfinite(t.pos.x_km) || !std::isfinite(t.pos.y_km)) {
      throw InvalidArgument("kriging: non-finite target coordinate for '" +
                            t.id + "'");
    }
    TargetGeometry g;
    g.dist.resize(static_cast<Eigen::Index>(data_coords.size()));
    for (std::size_t i = 0; i < data_coords.size(); ++i) {
      const double d = std::hypot(t.pos.x_km - data_coords[i].x_km,
                                  t.pos.y_km - data_coords[i].y_km);
      g.dist(static_cast<Eigen::Index>(i)) = d;
      if (d < kCoincidentKm && g.coincident < 0) {
        g.coincident = static_cast<Eigen::Index>(i);
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

// Re-factoring R(phi) dominates the per-draw cost; consecutive retained
// draws often share phi (rejected proposals), so cache the last factor.
class PhiFactorCache {
 public:
  explicit PhiFactorCache(const DistanceMatrix& dist) : dist_(dist) {}

  const CovarianceFactor& at(double phi) {
    if (!factor_ || phi != phi_) {
      factor_ = CovarianceFactor::cholesky(corr_matrix(dist_, phi));
      phi_ = phi;
    }
    return *factor_;
  }

 private:
  const DistanceMatrix& dist_;
  double phi_ = std::numeric_limits<double>::quiet_NaN();
  std::optional<CovarianceFactor> factor_;
};

Eigen::Index total_retained(const std::vector<ChainOutput>& chains) {
  Eigen::Index total = 0;
  for (const ChainOutput& c : chains) total += c.draws.rows();
  return total;
}

void check_inputs(Eigen::Index n_sites, std::size_t data_size,
                  std::span<const KrigTarget> targets, Eigen::Index n_draws) {
  if (static_cast<Eigen::Index>(data_size) != n_sites) {
    throw InvalidArgument(
        "kriging: observed data does not match the posterior's site count");
  }
  if (targets.empty()) throw EmptyInput("kriging: no targets");
  if (n_draws < 1) throw InvalidArgument("kriging: posterior has no draws");
}

}  // namespace

WgspPredictive wgsp_predictive_moments(const Eigen::VectorXd& y, double mu,
                                       double sigma2,
                                       const CovarianceFactor& r_factor,
                                       const Eigen::VectorXd& rho0) {
  if (y.size() != r_factor.dim() || rho0.size() != r_factor.dim()) {
    throw InvalidArgument("wgsp_predictive_moments: size mismatch");
  }
  const Eigen::VectorXd w = r_factor.solve(rho0);
  WgspPredictive out;
  out.mean = mu + w.dot((y.array() - mu).matrix());
  out.var = std::max(0.0, sigma2 * (1.0 - rho0.dot(w)));
  return out;
}

PgspPredictive pgsp_predictive_moments(const Eigen::MatrixXd& mc,
                                       const Eigen::Vector2d& mu,
                                       const Eigen::Matrix2d& t,
                                       const CovarianceFactor& r_factor,
                                       const Eigen::VectorXd& rho0) {
  if (mc.rows() != r_factor.dim() || rho0.size() != r_factor.dim() ||
      mc.cols() != 2) {
    throw InvalidArgument("pgsp_predictive_moments: size mismatch");
  }
  const Eigen::VectorXd w = r_factor.solve(rho0);
  PgspPredictive out;
  out.mean = mu + mc.transpose() * w;
  out.cov = std::max(0.0, 1.0 - rho0.dot(w)) * t;
  return out;
}

std::vector<KrigResult> wrap_krig(const WgspPosterior& post,
                                  const SiteTable& data,
                                  std::span<const KrigTarget> targets,
                                  std::uint64_t seed) {
  const Eigen::Index n_draws = total_retained(post.chains);
  check_inputs(post.n_sites, data.size(), targets, n_draws);

  const std::vector<Coord> coords = data.coords();
  const DistanceMatrix dist = distance_matrix(coords);
  const std::vector<TargetGeometry> geom = target_geometry(coords, targets);
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto m = static_cast<Eigen::Index>(targets.size());

  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = data[i].direction.radians();

  Eigen::VectorXd g_cos = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd g_sin = Eigen::VectorXd::Zero(m);
  std::vector<KrigResult> results(static_cast<std::size_t>(m));
  for (Eigen::Index t = 0; t < m; ++t) {
    results[static_cast<std::size_t>(t)].target_id =
        targets[static_cast<std::size_t>(t)].id;
    results[static_cast<std::size_t>(t)].draws.reserve(
        static_cast<std::size_t>(n_draws));
  }

  PhiFactorCache factors(dist);
  Rng rng(seed);
  Eigen::VectorXd y(n);

  for (const ChainOutput& chain : post.chains) {
    for (Eigen::Index row = 0; row < chain.draws.rows(); ++row) {
      const double mu = chain.draws(row, 0);
      const double sigma2 = chain.draws(row, 1);
      const double phi = chain.draws(row, 2);
      for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = x(i) + kTwoPi * chain.draws(row, 3 + i);
      }
      const CovarianceFactor& factor = factors.at(phi);

      for (Eigen::Index t = 0; t < m; ++t) {
        const TargetGeometry& g = geom[static_cast<std::size_t>(t)];
        KrigResult& res = results[static_cast<std::size_t>(t)];
        if (g.coincident >= 0) {
          res.draws.push_back(data[static_cast<std::size_t>(g.coincident)]
                                  .direction);
          continue;
        }
        const Eigen::VectorXd rho0 = (-phi * g.dist.array()).exp().matrix();
        const WgspPredictive pred =
            wgsp_predictive_moments(y, mu, sigma2, factor, rho0);
        const double att = std::exp(-pred.var / 2.0);
        g_cos(t) += att * std::cos(pred.mean);
        g_sin(t) += att * std::sin(pred.mean);
        res.draws.push_back(
            wrap(pred.mean + std::sqrt(pred.var) * rng.normal()));
      }
    }
  }

  for (Eigen::Index t = 0; t < m; ++t) {
    KrigResult& res = results[static_cast<std::size_t>(t)];
    const TargetGeometry& g = geom[static_cast<std::size_t>(t)];
    if (g.coincident >= 0) {
      res.direction =
          data[static_cast<std::size_t>(g.coincident)].direction;
      res.concentration = 1.0;
      continue;
    }
    res.direction = atan2_pos(g_sin(t), g_cos(t));
    res.concentration = std::hypot(g_cos(t), g_sin(t)) /
                        static_cast<double>(n_draws);
  }
  return results;
}

std::vector<KrigResult> proj_krig(const PgspPosterior& post,
                                  const SiteTable& data,
                                  std::span<const KrigTarget> targets,
                                  std::uint64_t seed) {
  const Eigen::Index n_draws = total_retained(post.chains);
  check_inputs(post.n_sites, data.size(), targets, n_draws);

  const std::vector<Coord> coords = data.coords();
  const DistanceMatrix dist = distance_matrix(coords);
  const std::vector<TargetGeometry> geom = target_geometry(coords, targets);
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto m = static_cast<Eigen::Index>(targets.size());

  Eigen::VectorXd cos_x(n), sin_x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cos_x(i) = std::cos(data[i].direction.radians());
    sin_x(i) = std::sin(data[i].direction.radians());
  }

  std::vector<KrigResult> results(static_cast<std::size_t>(m));
  for (Eigen::Index t = 0; t < m; ++t) {
    results[static_cast<std::size_t>(t)].target_id =
        targets[static_cast<std::size_t>(t)].id;
    results[static_cast<std::size_t>(t)].draws.reserve(
        static_cast<std::size_t>(n_draws));
  }

  PhiFactorCache factors(dist);
  Rng rng(seed);
  Eigen::MatrixXd mc(n, 2);

  for (const ChainOutput& chain : post.chains) {
    for (Eigen::Index row = 0; row < chain.draws.rows(); ++row) {
      const Eigen::Vector2d mu(chain.draws(row, 0), chain.draws(row, 1));
      const double tau2 = chain.draws(row, 2);
      const double rho = chain.draws(row, 3);
      const double phi = chain.draws(row, 4);
      const double tau = std::sqrt(tau2);
      Eigen::Matrix2d t_mat;
      t_mat << tau2, rho * tau, rho * tau, 1.0;
      const Eigen::LLT<Eigen::Matrix2d> t_llt(t_mat);
      const Eigen::Matrix2d t_lower = t_llt.matrixL();

      for (Eigen::Index i = 0; i < n; ++i) {
        const double r = chain.draws(row, 5 + i);
        mc(i, 0) = r * cos_x(i) - mu(0);
        mc(i, 1) = r * sin_x(i) - mu(1);
      }
      const CovarianceFactor& factor = factors.at(phi);

      for (Eigen::Index t = 0; t < m; ++t) {
        const TargetGeometry& g = geom[static_cast<std::size_t>(t)];
        KrigResult& res = results[static_cast<std::size_t>(t)];
        if (g.coincident >= 0) {
          res.draws.push_back(data[static_cast<std::size_t>(g.coincident)]
                                  .direction);
          continue;
        }
        const Eigen::VectorXd rho0 = (-phi * g.dist.array()).exp().matrix();
        const Eigen::VectorXd w = factor.solve(rho0);
        const Eigen::Vector2d mean = mu + mc.transpose() * w;
        const double scale = std::sqrt(std::max(0.0, 1.0 - rho0.dot(w)));
        const Eigen::Vector2d z(rng.normal(), rng.normal());
        const Eigen::Vector2d y0 = mean + scale * (t_lower * z);
        res.draws.push_back(atan2_pos(y0(1), y0(0)));
      }
    }
  }

  for (Eigen::Index t = 0; t < m; ++t) {
    KrigResult& res = results[static_cast<std::size_t>(t)];
    const TargetGeometry& g = geom[static_cast<std::size_t>(t)];
    if (g.coincident >= 0) {
      res.direction =
          data[static_cast<std::size_t>(g.coincident)].direction;
      res.concentration = 1.0;
      continue;
    }
    res.direction = circ_mean(res.draws);
    res.concentration = circ_resultant(res.draws);
  }
  return results;
}

}  // namespace circspat
