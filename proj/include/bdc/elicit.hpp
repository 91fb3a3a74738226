// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bdc/core.hpp"
#include "bdc/random.hpp"
#include "bdc/synth.hpp"

namespace bdc {

// curve[t] is the objective at K = t + 1. Picks the K with the largest
// second difference of the min-max normalized curve, smaller K on ties.
int elbow_k(std::span<const double> curve);

struct GammaFit {
  double shape = 0.0;
  double rate = 0.0;
  double loglik = 0.0;
  int iterations = 0;
};

struct BetaFit {
  double u = 0.0;
  double v = 0.0;
  double loglik = 0.0;
  int iterations = 0;
};

GammaFit gamma_mle(std::span<const double> samples);
BetaFit beta_mle(std::span<const double> samples);

struct LikelihoodFit {
  ModelParams params;
  GammaFit within;
  GammaFit between;
  std::int64_t n_within = 0;
  std::int64_t n_between = 0;
  bool delta2_clamped = false;
};

// Gamma fits to the within-cluster (A) and cross-cluster (B) distances of
// the initial labels: alpha = delta1 |A|, beta = sum A, zeta = delta2 |B|,
// gamma = sum B. delta2 <= 1 is raised to 1 + 1e-6 with a warning.
LikelihoodFit fit_likelihood_hyperparams(const DissimilarityMatrix& d, const Partition& labels);

struct PriorFitOptions {
  int warmup = 500;
  int draws = 2000;
};

struct PriorFit {
  ESCParams esc;
  GammaFit r_fit;
  BetaFit p_fit;
  std::vector<double> r_draws;
  std::vector<double> p_draws;
};

// r/p updates at fixed labels under Gamma(1, 1) and Beta(1, 1) priors, then
// Gamma and Beta maximum likelihood on the retained draws.
PriorFit fit_prior_params(const DissimilarityMatrix& d, const Partition& labels, Rng& rng,
                          const PriorFitOptions& options = {});

struct ElicitOptions {
  int k_max = 30;
  std::uint64_t seed = 1;
  PriorFitOptions prior;
};

struct ElicitationReport {
  int k_elbow = 0;
  std::string method;  // "kmeans" or "kmedoids"
  std::vector<double> curve;
  Partition initial_labels;
  LikelihoodFit likelihood;
  PriorFit prior;
};

// Elbow on the k-means WSS curve when raw data are given, else on the
// k-medoids objective curve; K ranges over 1..min(k_max, n - 1).
ElicitationReport elicit(const DissimilarityMatrix& d, const DataMatrix* data,
                         const ElicitOptions& options);

}  // namespace bdc
