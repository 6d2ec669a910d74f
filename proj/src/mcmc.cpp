#include "circspat/mcmc.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <thread>

#include "circspat/circular.hpp"

namespace circspat {

void ChainConfig::validate() const {
  if (n_iter <= 0) throw InvalidArgument("chain config: n_iter must be > 0");
  if (burnin < 0 || burnin >= n_iter) {
    throw InvalidArgument("chain config: need 0 <= burnin < n_iter");
  }
  if (thin < 1) throw InvalidArgument("chain config: thin must be >= 1");
  if (n_chains < 1) {
    throw InvalidArgument("chain config: n_chains must be >= 1");
  }
  if (!(target_accept > 0.0) || !(target_accept < 1.0)) {
    throw InvalidArgument("chain config: target_accept must be in (0, 1)");
  }
  if (adapt_start < 0 || adapt_start >= adapt_end) {
    throw InvalidArgument("chain config: need 0 <= adapt_start < adapt_end");
  }
  if (adapt_end > burnin) {
    throw InvalidArgument(
        "chain config: adaptation must finish within the burn-in");
  }
  if (retained_per_chain() < 1) {
    throw InvalidArgument(
        "chain config: no draws retained (check n_iter/burnin/thin)");
  }
}

void adapt_scale(AdaptiveScale& scale, int iter, const ChainConfig& cfg) {
  if (iter < cfg.adapt_start || iter >= cfg.adapt_end) return;
  if (iter == 0 || iter % kAdaptBatch != 0) return;
  if (scale.proposed == 0) return;
  const double rate =
      static_cast<double>(scale.accepted) / static_cast<double>(scale.proposed);
  const double step = std::min(0.05, 1.0 / std::sqrt(static_cast<double>(iter)));
  scale.log_sd += rate > cfg.target_accept ? step : -step;
  scale.accepted = 0;
  scale.proposed = 0;
}

namespace detail {

int max_chain_threads() {
  if (const char* env = std::getenv("CIRCSPAT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace detail

double psrf(const std::vector<Eigen::VectorXd>& chains) {
  const auto m = static_cast<Eigen::Index>(chains.size());
  if (m < 2) throw InvalidArgument("psrf: need at least two chains");
  const Eigen::Index n = chains.front().size();
  if (n < 10) throw InvalidArgument("psrf: need at least 10 draws per chain");
  for (const Eigen::VectorXd& c : chains) {
    if (c.size() != n) throw InvalidArgument("psrf: unequal chain lengths");
  }

  Eigen::VectorXd means(m), vars(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    means(j) = chains[static_cast<std::size_t>(j)].mean();
    vars(j) = (chains[static_cast<std::size_t>(j)].array() - means(j))
                  .square()
                  .sum() /
              static_cast<double>(n - 1);
  }
  const double w = vars.mean();
  const double grand = means.mean();
  const double b = static_cast<double>(n) *
                   (means.array() - grand).square().sum() /
                   static_cast<double>(m - 1);

  if (w <= 0.0) {
    // Degenerate traces: identical constants across chains are perfectly
    // converged; differing constants can never mix.
    const bool all_equal = (means.array() == means(0)).all();
    return all_equal ? 1.0 : std::numeric_limits<double>::infinity();
  }
  const double nd = static_cast<double>(n);
  const double var_plus = (nd - 1.0) / nd * w + b / nd;
  return std::max(1.0, std::sqrt(var_plus / w));
}

CircularTraceSummary circular_trace_summary(std::span<const Angle> trace) {
  CircularTraceSummary out;
  out.mean_direction = circ_mean(trace);
  out.resultant_length = circ_resultant(trace);
  return out;
}

}  // namespace circspat
