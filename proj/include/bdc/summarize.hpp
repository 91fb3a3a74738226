// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <span>
#include <vector>

#include "bdc/core.hpp"
#include "bdc/mcmc.hpp"

namespace bdc {

// s(i, j) = fraction of draws with z_i = z_j.
struct Coclustering {
  int n = 0;
  std::vector<double> values;

  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
};

Coclustering coclustering_matrix(std::span<const Partition> draws);

enum class Loss { Binder, VI };

// Expected Binder loss (normalized by C(n, 2)) of `estimate` against the
// draws summarized by s.
double expected_binder_loss(const Partition& estimate, const Coclustering& s);
// Average VI (nats) of `estimate` against the draws.
double expected_vi_loss(const Partition& estimate, std::span<const Partition> draws);

struct PointEstimate {
  Partition partition;
  double expected_loss = 0.0;
  // Best expected loss among the sampled candidates before refinement.
  double best_sampled_loss = 0.0;
  int candidates = 0;
  int refinement_sweeps = 0;
};

// Scores the distinct sampled partitions and refines the best one with
// single-item moves until no move lowers the expected loss (at most
// max_sweeps). VI uses at most max_draws evenly spaced draws.
PointEstimate point_estimate(std::span<const Partition> draws, Loss loss, int max_draws = 2000,
                             int max_sweeps = 50);

// probs[K] = fraction of draws with K clusters; index 0 is unused.
std::vector<double> k_posterior(std::span<const Partition> draws);

// Effective sample size with Geyer's initial monotone positive sequence.
// A constant trace gives 0 with a warning; fewer than 10 values throw.
double ess(std::span<const double> trace);

struct PosteriorSummary {
  Coclustering coclustering;
  std::vector<double> k_histogram;
  Loss loss = Loss::VI;
  PointEstimate estimate;
  double ess_k = 0.0;
  double ess_logpost = 0.0;
  int draws = 0;
};

PosteriorSummary summarize_chain(const SampleChain& chain, Loss loss, int max_draws = 2000);

}  // namespace bdc
