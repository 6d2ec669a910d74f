#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "circspat/angle.hpp"

namespace circspat {

// Mean resultant length in [0, 1]: || (mean cos, mean sin) ||.
double circ_resultant(std::span<const Angle> angles);

// Direction of the summed unit vectors. Throws EmptyInput on an empty span
// and UndefinedDirection when the resultant length is (numerically) zero.
Angle circ_mean(std::span<const Angle> angles);

// Observed angle minimizing the mean arc-length distance to the sample;
// ties broken toward the smallest angle value.
Angle circ_median(std::span<const Angle> angles);

// sqrt(-2 log(1 - variance)), the circular standard deviation implied by the
// circular variance (variance = 1 - resultant length).
double circ_std_dev_from_variance(double variance);

struct CircularSummary {
  std::size_t n = 0;
  Angle mean_direction;
  Angle median_direction;
  double resultant_length = 0.0;
  double variance = 0.0;  // 1 - resultant_length
  double std_dev = 0.0;   // sqrt(-2 log(resultant_length))
};

CircularSummary summarize(std::span<const Angle> angles);

struct RoseBin {
  Angle start;  // bin covers [start, start + 2*pi/nbins)
  std::size_t count = 0;
};

// Counts per equal-width sector, first bin anchored at angle 0.
std::vector<RoseBin> rose_histogram(std::span<const Angle> angles,
                                    std::size_t nbins);

}  // namespace circspat
