#pragma once

#include <Eigen/Dense>
#include <span>

#include "circspat/sites.hpp"

namespace circspat {

// Pairwise Euclidean distances (km) between planar site coordinates.
struct DistanceMatrix {
  Eigen::MatrixXd d;        // symmetric, zero diagonal
  double max_dist = 0.0;
};

DistanceMatrix distance_matrix(std::span<const Coord> coords);

// Exponential correlation exp(-phi * dist); phi > 0 is the decay rate.
double exp_corr(double dist_km, double phi);

// Elementwise exp_corr over a distance matrix. Distinct sites at identical
// coordinates would make this matrix singular, so exact duplicates raise
// FactorizationError naming the offending pair.
Eigen::MatrixXd corr_matrix(const DistanceMatrix& dist, double phi);

}  // namespace circspat
