#pragma once

// Template implementation detail for mcmc.hpp; include that header instead.

#include <exception>
#include <thread>

namespace circspat {

template <typename KernelFactory>
std::vector<ChainOutput> run_chains(const ChainConfig& cfg,
                                    KernelFactory&& factory) {
  cfg.validate();

  const int retained = cfg.retained_per_chain();
  std::vector<ChainOutput> outputs(static_cast<std::size_t>(cfg.n_chains));
  std::vector<std::exception_ptr> failures(
      static_cast<std::size_t>(cfg.n_chains));

  auto run_one = [&](int chain) {
    try {
      Rng rng(cfg.seed + static_cast<std::uint64_t>(chain));
      auto kernel = factory(chain);

      ChainOutput& out = outputs[static_cast<std::size_t>(chain)];
      out.param_names = kernel.param_names();
      out.seed = cfg.seed + static_cast<std::uint64_t>(chain);
      out.draws.resize(retained,
                       static_cast<Eigen::Index>(out.param_names.size()));

      int row = 0;
      for (int iter = 1; iter <= cfg.n_iter; ++iter) {
        kernel.sweep(iter, rng);
        if (iter > cfg.burnin && (iter - cfg.burnin) % cfg.thin == 0 &&
            row < retained) {
          out.draws.row(row++) = kernel.snapshot().transpose();
        }
      }
      out.acceptance_rates = kernel.acceptance_rates();
      out.k_underflow_rejects = kernel.underflow_rejects();
    } catch (...) {
      failures[static_cast<std::size_t>(chain)] = std::current_exception();
    }
  };

  const int max_threads = detail::max_chain_threads();
  if (cfg.n_chains == 1 || max_threads <= 1) {
    for (int c = 0; c < cfg.n_chains; ++c) run_one(c);
  } else {
    // Chains are independent; run them in waves of at most max_threads.
    for (int base = 0; base < cfg.n_chains; base += max_threads) {
      std::vector<std::thread> pool;
      for (int c = base; c < std::min(cfg.n_chains, base + max_threads); ++c) {
        pool.emplace_back(run_one, c);
      }
      for (std::thread& t : pool) t.join();
    }
  }

  for (const std::exception_ptr& e : failures) {
    if (e) std::rethrow_exception(e);
  }
  return outputs;
}

}  // namespace circspat
