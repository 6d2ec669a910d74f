#include "circspat/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "circspat/errors.hpp"
#include "circspat/rng.hpp"

namespace circspat {

HoldoutSplit holdout_split(std::size_t n, std::size_t n_valid,
                           std::uint64_t seed) {
  if (n_valid < 1 || n_valid >= n) {
    throw InvalidArgument("holdout_split: need 1 <= n_valid < n");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);

  // Partial Fisher-Yates: the first n_valid slots become the validation set.
  Rng rng(seed);
  for (std::size_t i = 0; i < n_valid; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }

  HoldoutSplit split;
  split.valid_rows.assign(idx.begin(),
                          idx.begin() + static_cast<std::ptrdiff_t>(n_valid));
  split.train_rows.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_valid),
                          idx.end());
  std::sort(split.valid_rows.begin(), split.valid_rows.end());
  std::sort(split.train_rows.begin(), split.train_rows.end());
  return split;
}

double ape(std::span<const Angle> predicted, std::span<const Angle> truth,
           AngularDistance kind) {
  if (predicted.empty()) throw EmptyInput("ape: no predictions");
  if (predicted.size() != truth.size()) {
    throw InvalidArgument("ape: prediction/truth length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    acc += circ_dist(predicted[i], truth[i], kind);
  }
  return acc / static_cast<double>(predicted.size());
}

namespace {

// Pairwise mean of d over an ensemble, O(B^2); used for the arc-length
// kernel and as the reference path for the cosine identity.
double pairwise_mean(std::span<const Angle> draws, AngularDistance kind) {
  const std::size_t b = draws.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      acc += circ_dist(draws[i], draws[j], kind);
    }
  }
  return acc / (static_cast<double>(b) * static_cast<double>(b));
}

}  // namespace

double crps_circ(std::span<const Angle> draws, Angle truth,
                 AngularDistance kind, std::uint64_t subsample_seed) {
  if (draws.empty()) throw EmptyInput("crps_circ: empty ensemble");
  const std::size_t b = draws.size();

  if (kind == AngularDistance::kCosine) {
    // d(a, b) = 1 - cos(a)cos(b) - sin(a)sin(b), so both means reduce to
    // the resultant sums: exact at any ensemble size.
    double sc = 0.0, ss = 0.0;
    for (const Angle a : draws) {
      sc += std::cos(a.radians());
      ss += std::sin(a.radians());
    }
    const double bd = static_cast<double>(b);
    const double term1 = 1.0 - (std::cos(truth.radians()) * sc +
                                std::sin(truth.radians()) * ss) /
                                   bd;
    const double term2 = 1.0 - (sc * sc + ss * ss) / (bd * bd);
    return term1 - 0.5 * term2;
  }

  // Arc-length kernel: no closed form. Score term is O(B); the pairwise term
  // is exact up to the cap and a seeded without-replacement subsample above.
  double term1 = 0.0;
  for (const Angle a : draws) {
    term1 += circ_dist(a, truth, kind);
  }
  term1 /= static_cast<double>(b);

  double term2 = 0.0;
  if (b <= kCrpsExactCap) {
    term2 = pairwise_mean(draws, kind);
  } else {
    std::vector<std::size_t> idx(b);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(subsample_seed);
    for (std::size_t i = 0; i < kCrpsExactCap; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(b - i));
      std::swap(idx[i], idx[j]);
    }
    std::vector<Angle> sub;
    sub.reserve(kCrpsExactCap);
    for (std::size_t i = 0; i < kCrpsExactCap; ++i) {
      sub.push_back(draws[idx[i]]);
    }
    term2 = pairwise_mean(sub, kind);
  }
  return term1 - 0.5 * term2;
}

EvalReport make_eval_report(std::span<const KrigResult> predictions,
                            std::span<const Angle> truth,
                            AngularDistance kind, std::uint64_t split_seed,
                            std::size_t n_train) {
  if (predictions.empty()) throw EmptyInput("eval report: no predictions");
  if (predictions.size() != truth.size()) {
    throw InvalidArgument("eval report: prediction/truth length mismatch");
  }

  EvalReport report;
  report.distance = kind;
  report.split_seed = split_seed;
  report.n_train = n_train;
  report.n_valid = predictions.size();

  double ape_acc = 0.0, crps_acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const KrigResult& p = predictions[i];
    SiteScore s;
    s.site_id = p.target_id;
    s.truth = truth[i];
    s.predicted = p.direction;
    s.concentration = p.concentration;
    s.circ_error = circ_dist(p.direction, truth[i], kind);
    s.crps = crps_circ(p.draws, truth[i], kind, split_seed);
    ape_acc += s.circ_error;
    crps_acc += s.crps;
    report.sites.push_back(std::move(s));
  }
  report.ape = ape_acc / static_cast<double>(predictions.size());
  report.crps = crps_acc / static_cast<double>(predictions.size());
  return report;
}

}  // namespace circspat
