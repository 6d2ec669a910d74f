#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "circspat/angle.hpp"
#include "circspat/kriging.hpp"

namespace circspat {

// Deterministic train/validation partition of row indices 0..n-1; both
// halves keep ascending order so downstream output is stable.
struct HoldoutSplit {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> valid_rows;
};

HoldoutSplit holdout_split(std::size_t n, std::size_t n_valid,
                           std::uint64_t seed);

// Average prediction error: mean circular distance between matched
// predicted/true directions.
double ape(std::span<const Angle> predicted, std::span<const Angle> truth,
           AngularDistance kind = AngularDistance::kCosine);

// Beyond this many draws the arc-length CRPS switches to a seeded subsample
// for its pairwise term (the cosine kernel has an exact O(B) form at any B).
inline constexpr std::size_t kCrpsExactCap = 20000;

// Kernel-score CRPS of an ensemble against one true direction:
// mean_b d(x_b, truth) - (1/2) mean_{b,b'} d(x_b, x_b').
double crps_circ(std::span<const Angle> draws, Angle truth,
                 AngularDistance kind = AngularDistance::kCosine,
                 std::uint64_t subsample_seed = 0);

struct SiteScore {
  std::string site_id;
  Angle truth;
  Angle predicted;
  double concentration = 0.0;
  double circ_error = 0.0;
  double crps = 0.0;
};

struct EvalReport {
  std::vector<SiteScore> sites;
  double ape = 0.0;
  double crps = 0.0;  // mean of the per-site CRPS values
  std::size_t n_train = 0;
  std::size_t n_valid = 0;
  std::uint64_t split_seed = 0;
  AngularDistance distance = AngularDistance::kCosine;
};

// Scores kriging output against held-out truth (matched by position in the
// two sequences).
EvalReport make_eval_report(std::span<const KrigResult> predictions,
                            std::span<const Angle> truth,
                            AngularDistance kind, std::uint64_t split_seed,
                            std::size_t n_train);

}  // namespace circspat
