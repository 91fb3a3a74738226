// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bdc/cluster_state.hpp"
#include "bdc/core.hpp"
#include "bdc/likelihood.hpp"
#include "bdc/random.hpp"

namespace bdc {

// How P(E_n | r, p) enters the (r, p) full conditionals.
//
// Conditional: rho | r, p ~ ESC_n(nu) with its own normalizer, so the r
// target carries 1 / P(E_n | r, p) and the conjugate Beta draw for p is an
// independence proposal corrected by the P(E_n) ratio.
//
// Joint: (nu, sizes) are conditioned on E_n together. P(E_n | r, p) drops
// out of both conditionals and the p draw is an exact Gibbs step.
enum class PriorConditioning { Conditional, Joint };

struct SamplerConfig {
  MCMCOptions options;
  bool prior_only = false;
  std::optional<double> fix_r;
  std::optional<double> fix_p;
  PriorConditioning conditioning = PriorConditioning::Conditional;
  double r_step = 0.2;
  bool debug_checks = false;
};

struct AcceptanceCounters {
  std::int64_t split_proposed = 0;
  std::int64_t split_accepted = 0;
  std::int64_t merge_proposed = 0;
  std::int64_t merge_accepted = 0;
  std::int64_t r_proposed = 0;
  std::int64_t r_accepted = 0;
  std::int64_t p_proposed = 0;
  std::int64_t p_accepted = 0;

  static double rate(std::int64_t accepted, std::int64_t proposed) {
    return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  }
};

struct ChainRecord {
  int iter = 0;
  Partition partition;
  double r = 0.0;
  double p = 0.0;
  double logpost = 0.0;

  int num_clusters() const { return partition.num_clusters(); }
};

struct SampleChain {
  int n = 0;
  std::vector<ChainRecord> records;
  MCMCOptions options;
  std::uint64_t seed = 0;
  AcceptanceCounters acceptance;
  double r_step = 0.0;

  std::vector<Partition> partitions() const;
};

enum class SplitMergeKind { Split, Merge };

struct SplitMergeOutcome {
  SplitMergeKind kind = SplitMergeKind::Split;
  // log of the Metropolis-Hastings ratio (before min with 0).
  double log_ratio = 0.0;
  // log probability of the split proposal (sampled split, or the observed
  // split for a merge) under the final restricted Gibbs scan.
  double log_proposal = 0.0;
  bool accepted = false;
};

// Posterior sampler over partitions and (r, p) with the lambda/theta rates
// integrated out. Holds the working partition with incremental statistics
// and caches of the log marginal likelihood and log P(E_n | r, p).
class Sampler {
 public:
  Sampler(const DissimilarityMatrix& d, const ModelParams& params, const ESCParams& esc,
          const SamplerConfig& config, const Partition& init);

  // One Gibbs reallocation of every item, in a fresh random order.
  void gibbs_sweep(Rng& rng);
  // Split-merge move with a uniformly random anchor pair (needs n >= 2).
  SplitMergeOutcome split_merge_step(Rng& rng);
  SplitMergeOutcome split_merge_step(int anchor_i, int anchor_j, Rng& rng);
  bool update_r(Rng& rng);
  bool update_p(Rng& rng);
  // gibbs_sweep, split_merge_step, update_r, update_p.
  void iterate(Rng& rng);

  // Adapts the log-scale r step toward 20-40% acceptance while on.
  void set_adapting(bool on) { adapting_ = on; }
  double r_step() const { return r_step_; }
  void set_r_step(double step) { r_step_ = step; }

  double r() const { return r_; }
  double p() const { return p_; }
  double log_likelihood() const { return loglik_; }
  double log_prob_en() const { return log_en_; }
  double log_partition_prior() const;
  double log_posterior() const;

  const ClusterState& state() const { return state_; }
  Partition partition() const { return state_.to_partition(); }
  const AcceptanceCounters& acceptance() const { return counters_; }
  const SamplerConfig& config() const { return config_; }

  // Recomputes statistics, likelihood and P(E_n) from scratch and throws
  // NumericError if any cache differs by more than rel_tol.
  void verify_caches(double rel_tol = 1e-8) const;

 private:
  double r_log_target(double r) const;
  // Log marginals of the current blocks for the sweep: the cohesion of
  // cluster k on the diagonal, repulsion of pair (k, t) off it.
  void refresh_block_values(int k);
  void rebuild_block_values(int min_stride);
  double restricted_scan(std::span<const int> items, int a, int b, Rng& rng,
                         const std::vector<int>* forced);

  const DissimilarityMatrix* d_;
  ModelParams params_;
  ESCParams esc_;
  SamplerConfig config_;
  LikelihoodEvaluator lik_;
  ClusterState state_;
  double r_;
  double p_;
  double loglik_ = 0.0;
  double log_en_ = 0.0;
  double r_step_;
  bool adapting_ = false;
  std::int64_t window_proposed_ = 0;
  std::int64_t window_accepted_ = 0;
  AcceptanceCounters counters_;

  std::vector<int> order_;
  std::vector<Block> sums_;
  std::vector<double> logw_;
  std::vector<double> deltas_;
  std::vector<int> candidates_;
  std::vector<double> block_values_;
  int block_stride_ = 0;
  std::vector<double> size_logw_;
};

// Runs one chain seeded with config.options.seed. Records a draw after every
// thin-th post-burn-in iteration: (iterations - burnin) / thin records.
SampleChain run_sampler(const DissimilarityMatrix& d, const ModelParams& params,
                        const ESCParams& esc, const SamplerConfig& config, const Partition& init);

// Runs config.options.chains independent chains on separate threads. With a
// single chain the seed is used as is; otherwise chain c uses
// derive_seed(seed, c).
std::vector<SampleChain> run_chains(const DissimilarityMatrix& d, const ModelParams& params,
                                    const ESCParams& esc, const SamplerConfig& config,
                                    const Partition& init);

}  // namespace bdc
