#pragma once

#include <cstdint>
#include <random>

namespace circspat {

// Seeded random source. Every stochastic routine in the library takes one of
// these explicitly, so a run is reproducible from its seed alone. The draw
// sequence is deterministic for a given standard-library build (mt19937_64 is
// specified bit-for-bit; the distributions are specified per libstdc++).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double normal() { return normal_(eng_); }   // standard normal
  double uniform() { return uniform_(eng_); }  // [0, 1)

  double gamma_draw(double shape, double scale) {
    std::gamma_distribution<double> g(shape, scale);
    return g(eng_);
  }

  // Uniform integer in [0, bound); rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = eng_();
    } while (v >= limit);
    return v % bound;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace circspat
