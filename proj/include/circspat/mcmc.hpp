#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "circspat/angle.hpp"
#include "circspat/errors.hpp"
#include "circspat/rng.hpp"

namespace circspat {

// Schedule shared by every sampler: chain length, burn-in, thinning and the
// window in which proposal scales adapt. Adaptation must finish inside the
// burn-in so retained draws come from a fixed kernel.
struct ChainConfig {
  int n_iter = 100000;
  int burnin = 30000;
  int thin = 10;
  int n_chains = 2;
  double target_accept = 0.234;
  int adapt_start = 100;
  int adapt_end = 10000;
  std::uint64_t seed = 0;

  void validate() const;
  int retained_per_chain() const { return (n_iter - burnin) / thin; }
};

// Batch size for proposal-scale adaptation.
inline constexpr int kAdaptBatch = 50;

// Log proposal scale plus acceptance bookkeeping for one scalar parameter.
// `accepted`/`proposed` cover the current adaptation batch; the totals cover
// the whole run; `mark()` snapshots the totals so post-adaptation rates can
// be reported separately.
struct AdaptiveScale {
  double log_sd = 0.0;
  long accepted = 0;
  long proposed = 0;
  long total_accepted = 0;
  long total_proposed = 0;
  long marked_accepted = 0;
  long marked_proposed = 0;
  long nan_rejects = 0;

  double sd() const { return std::exp(log_sd); }

  void record(bool accept) {
    ++proposed;
    ++total_proposed;
    if (accept) {
      ++accepted;
      ++total_accepted;
    }
  }

  void mark() {
    marked_accepted = total_accepted;
    marked_proposed = total_proposed;
  }

  double lifetime_rate() const {
    return total_proposed > 0
               ? static_cast<double>(total_accepted) / total_proposed
               : 0.0;
  }

  // Acceptance rate since mark() (i.e. after adaptation froze).
  double post_mark_rate() const {
    const long p = total_proposed - marked_proposed;
    return p > 0 ? static_cast<double>(total_accepted - marked_accepted) / p
                 : 0.0;
  }
};

// Robbins-Monro-style batch update: every kAdaptBatch iterations inside
// [adapt_start, adapt_end), nudge log_sd toward the target acceptance rate
// by min(0.05, 1/sqrt(iter)) and reset the batch counters.
void adapt_scale(AdaptiveScale& scale, int iter, const ChainConfig& cfg);

struct MetropolisResult {
  double value = 0.0;
  double log_target = 0.0;
  bool accepted = false;
};

// One random-walk Metropolis step on an unconstrained scalar. `current_lp`
// is the log target at `current` (callers cache it; recomputing a spatial
// likelihood is the expensive part). Non-finite proposal log targets count
// as rejections and are tallied in scale.nan_rejects.
template <typename LogTarget>
MetropolisResult rw_metropolis_step(double current, double current_lp,
                                    LogTarget&& log_target,
                                    AdaptiveScale& scale, Rng& rng) {
  const double prop = current + scale.sd() * rng.normal();
  const double prop_lp = log_target(prop);
  bool accept = false;
  if (std::isfinite(prop_lp)) {
    const double log_ratio = prop_lp - current_lp;
    accept = log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio;
  } else {
    ++scale.nan_rejects;
  }
  scale.record(accept);
  if (accept) return {prop, prop_lp, true};
  return {current, current_lp, false};
}

// Map between a bounded parameter and the unconstrained line via a scaled
// logistic. Proposals walk in z-space; log_jacobian(z) is the log of
// d(value)/dz for the change of variables.
struct BoundedTransform {
  double lo = 0.0;
  double hi = 1.0;

  double to_unconstrained(double value) const {
    const double u = (value - lo) / (hi - lo);
    return std::log(u / (1.0 - u));
  }
  double to_value(double z) const {
    const double s = 1.0 / (1.0 + std::exp(-z));
    return lo + (hi - lo) * s;
  }
  double log_jacobian(double z) const {
    // log((hi-lo) * s * (1-s)) computed in a form stable for large |z|.
    const double a = -std::fabs(z);
    return std::log(hi - lo) + a - 2.0 * std::log1p(std::exp(a));
  }
};

// One posterior sample path: retained draws (rows) by parameters (columns).
struct ChainOutput {
  std::vector<std::string> param_names;
  Eigen::MatrixXd draws;
  std::vector<std::pair<std::string, double>> acceptance_rates;
  std::uint64_t seed = 0;
  long k_underflow_rejects = 0;  // wrapped model: winding draws kept as-is
};

// Runs cfg.n_chains independent chains, each on its own thread (capped by
// CIRCSPAT_THREADS, default hardware concurrency). `factory(chain_index)`
// builds a sampler exposing:
//   void sweep(int iter, Rng& rng);
//   Eigen::VectorXd snapshot() const;
//   std::vector<std::string> param_names() const;
//   std::vector<std::pair<std::string, double>> acceptance_rates() const;
//   long underflow_rejects() const;
// Chain c uses Rng(cfg.seed + c); outputs are returned in chain order, so
// results are independent of thread scheduling.
namespace detail {
int max_chain_threads();
}  // namespace detail

template <typename KernelFactory>
std::vector<ChainOutput> run_chains(const ChainConfig& cfg,
                                    KernelFactory&& factory);

// Potential scale reduction factor over >= 2 chains of equal length (>= 10).
// Identical chains give exactly 1; zero within-chain variance with differing
// means gives +infinity.
double psrf(const std::vector<Eigen::VectorXd>& chains);

// Convergence gate shared by the fit commands: every monitored PSRF must sit
// below this.
inline constexpr double kPsrfThreshold = 1.1;

// Circular mean direction and resultant length of a parameter trace, for
// monitoring angular parameters where linear summaries would be wrong.
struct CircularTraceSummary {
  Angle mean_direction;
  double resultant_length = 0.0;
};
CircularTraceSummary circular_trace_summary(std::span<const Angle> trace);

}  // namespace circspat

#include "circspat/mcmc_impl.hpp"
