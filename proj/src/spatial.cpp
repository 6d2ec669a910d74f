#include "circspat/spatial.hpp"

#include <cmath>
#include <string>

#include "circspat/errors.hpp"

namespace circspat {

DistanceMatrix distance_matrix(std::span<const Coord> coords) {
  if (coords.empty()) {
    throw EmptyInput("distance_matrix: no coordinates");
  }
  const auto n = static_cast<Eigen::Index>(coords.size());
  for (const Coord& c : coords) {
    if (!std::isfinite(c.x_km) || !std::isfinite(c.y_km)) {
      throw InvalidArgument("distance_matrix: non-finite coordinate");
    }
  }
  DistanceMatrix out;
  out.d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = std::hypot(coords[i].x_km - coords[j].x_km,
                                     coords[i].y_km - coords[j].y_km);
      out.d(i, j) = dist;
      out.d(j, i) = dist;
      if (dist > out.max_dist) out.max_dist = dist;
    }
  }
  return out;
}

double exp_corr(double dist_km, double phi) {
  if (!(phi > 0.0) || !std::isfinite(phi)) {
    throw InvalidArgument("exp_corr: decay rate must be positive and finite");
  }
  if (!(dist_km >= 0.0) || !std::isfinite(dist_km)) {
    throw InvalidArgument("exp_corr: distance must be non-negative");
  }
  return std::exp(-phi * dist_km);
}

Eigen::MatrixXd corr_matrix(const DistanceMatrix& dist, double phi) {
  if (!(phi > 0.0) || !std::isfinite(phi)) {
    throw InvalidArgument("corr_matrix: decay rate must be positive");
  }
  const Eigen::Index n = dist.d.rows();
  if (n == 0 || dist.d.cols() != n) {
    throw InvalidArgument("corr_matrix: distance matrix must be square");
  }
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (dist.d(i, j) <= 0.0) {
        throw FactorizationError(
            "corr_matrix: sites " + std::to_string(i) + " and " +
            std::to_string(j) +
            " share a coordinate; the correlation matrix would be singular");
      }
      const double c = std::exp(-phi * dist.d(i, j));
      r(i, j) = c;
      r(j, i) = c;
    }
  }
  return r;
}

}  // namespace circspat
