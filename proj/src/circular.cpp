#include "circspat/circular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "circspat/errors.hpp"

namespace circspat {

namespace {

// Resultant length below this counts as "no direction": the sample is
// balanced (e.g. antipodal pairs) and the mean is meaningless.
constexpr double kZeroResultant = 1e-12;

struct MeanVector {
  double c = 0.0;
  double s = 0.0;
  double length = 0.0;
};

MeanVector mean_vector(std::span<const Angle> angles) {
  if (angles.empty()) {
    throw EmptyInput("circular summary: empty sample");
  }
  double sc = 0.0, ss = 0.0;
  for (const Angle a : angles) {
    sc += std::cos(a.radians());
    ss += std::sin(a.radians());
  }
  MeanVector mv;
  mv.c = sc / static_cast<double>(angles.size());
  mv.s = ss / static_cast<double>(angles.size());
  mv.length = std::hypot(mv.c, mv.s);
  return mv;
}

}  // namespace

double circ_resultant(std::span<const Angle> angles) {
  return mean_vector(angles).length;
}

Angle circ_mean(std::span<const Angle> angles) {
  const MeanVector mv = mean_vector(angles);
  if (mv.length < kZeroResultant) {
    throw UndefinedDirection("circ_mean: zero resultant length");
  }
  return atan2_pos(mv.s, mv.c);
}

Angle circ_median(std::span<const Angle> angles) {
  if (angles.empty()) {
    throw EmptyInput("circ_median: empty sample");
  }
  // Candidates sorted ascending so that a strictly-better comparison keeps
  // the smallest angle on ties.
  std::vector<Angle> cands(angles.begin(), angles.end());
  std::sort(cands.begin(), cands.end(), [](Angle a, Angle b) {
    return a.radians() < b.radians();
  });

  Angle best = cands.front();
  // Finite sentinel: an infinite start would make the tolerance term NaN.
  double best_sum = std::numeric_limits<double>::max();
  for (const Angle c : cands) {
    double sum = 0.0;
    for (const Angle a : angles) {
      sum += circ_dist(c, a, AngularDistance::kArcLength);
    }
    // Tolerant comparison: arithmetically tied candidates must not flip the
    // smallest-angle tie-break because of fp noise.
    if (sum < best_sum - 1e-12 * std::max(1.0, best_sum)) {
      best_sum = sum;
      best = c;
    }
  }
  return best;
}

double circ_std_dev_from_variance(double variance) {
  if (!(variance >= 0.0) || variance >= 1.0) {
    throw InvalidArgument("circ_std_dev_from_variance: need 0 <= v < 1");
  }
  return std::sqrt(-2.0 * std::log1p(-variance));
}

CircularSummary summarize(std::span<const Angle> angles) {
  CircularSummary out;
  out.n = angles.size();
  out.mean_direction = circ_mean(angles);  // also rejects empty / balanced
  out.median_direction = circ_median(angles);
  out.resultant_length = circ_resultant(angles);
  out.variance = 1.0 - out.resultant_length;
  out.std_dev = std::sqrt(-2.0 * std::log(out.resultant_length));
  return out;
}

std::vector<RoseBin> rose_histogram(std::span<const Angle> angles,
                                    std::size_t nbins) {
  if (nbins == 0) {
    throw InvalidArgument("rose_histogram: need at least one bin");
  }
  const double width = kTwoPi / static_cast<double>(nbins);
  std::vector<RoseBin> bins(nbins);
  for (std::size_t b = 0; b < nbins; ++b) {
    bins[b].start = wrap(width * static_cast<double>(b));
  }
  for (const Angle a : angles) {
    auto idx = static_cast<std::size_t>(a.radians() / width);
    if (idx >= nbins) idx = nbins - 1;  // guard against rounding at 2*pi
    ++bins[idx].count;
  }
  return bins;
}

}  // namespace circspat
