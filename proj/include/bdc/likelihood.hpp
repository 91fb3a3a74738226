// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bdc/cluster_state.hpp"
#include "bdc/core.hpp"
#include "bdc/random.hpp"

namespace bdc {

// log of  prod_{pairs} Gamma(d; shape, rate) * Gamma(rate; a, b)  integrated
// over the rate:
//   (shape-1) L - m lgamma(shape) + a log b + lgamma(a + shape m) - lgamma(a)
//     - (a + shape m) log(b + S)
// Exactly 0 for an empty block.
double gamma_block_logmarginal(std::int64_t m, double sum, double log_sum, double shape, double a,
                               double b);

double cohesion_logmarginal(std::int64_t m, double sum, double log_sum, const ModelParams& params);
// Zero when params.repulsion is off.
double repulsion_logmarginal(std::int64_t m, double sum, double log_sum, const ModelParams& params);

double log_marginal_likelihood(const SuffStats& stats, const ModelParams& params);
double log_marginal_likelihood(const DissimilarityMatrix& d, const Partition& rho,
                               const ModelParams& params);

// Hot-path evaluator. lgamma(a + shape * m) is tabulated for integer pair
// counts so block evaluations cost one log. A disabled evaluator scores
// every partition as 0 (prior-only runs).
class LikelihoodEvaluator {
 public:
  LikelihoodEvaluator(const ModelParams& params, int n, bool enabled = true);

  bool enabled() const { return enabled_; }
  bool repulsion() const { return enabled_ && params_.repulsion; }
  const ModelParams& params() const { return params_; }

  double cohesion(const Block& b) const;
  double repulsion(const Block& b) const;
  // cohesion(b) and repulsion(b) with log(beta + b.sum), resp.
  // log(gamma + b.sum), supplied by the caller.
  double cohesion_from_log(const Block& b, double log_rate_sum) const;
  double repulsion_from_log(const Block& b, double log_rate_sum) const;
  double total(const ClusterState& state) const;

 private:
  struct Family {
    double shape = 1.0;
    double a = 1.0;
    double b = 1.0;
    double lgamma_shape = 0.0;
    double log_b = 0.0;
    double prior_const = 0.0;  // a log b - lgamma(a)
    std::vector<double> table;

    void init(double shape_, double a_, double b_, std::int64_t max_m);
    double operator()(const Block& blk) const;
    double from_log(const Block& blk, double log_rate_sum) const;
  };

  ModelParams params_;
  bool enabled_;
  Family within_;
  Family between_;
};

// Change in log marginal likelihood from placing detached item i into each
// cluster of `state` (entries 0..K-1) or into a new singleton (entry K).
// `sums` is the per-cluster output of state.row_sums(i).
std::vector<double> allocation_log_deltas(const ClusterState& state, const LikelihoodEvaluator& lik,
                                          std::span<const Block> sums);
// Deltas restricted to the listed candidate clusters (K means new cluster).
void allocation_log_deltas(const ClusterState& state, const LikelihoodEvaluator& lik,
                           std::span<const Block> sums, std::span<const int> candidates,
                           std::span<double> out);
// Same, reading lik.repulsion(state.pair(c, t)) from old_pairs[c * stride + t]
// and lik.cohesion(state.within(c)) from old_pairs[c * stride + c].
void allocation_log_deltas(const ClusterState& state, const LikelihoodEvaluator& lik,
                           std::span<const Block> sums, std::span<const int> candidates,
                           std::span<double> out, std::span<const double> old_pairs, int stride);

struct ClusterRates {
  std::vector<double> lambda;  // per cluster
  std::vector<double> theta;   // K x K row-major, symmetric, diagonal 0
  int num_clusters = 0;
};

// Conjugate posterior draws lambda_k ~ Gamma(alpha + delta1 m_k, beta + S_k),
// theta_kt ~ Gamma(zeta + delta2 m_kt, gamma + S_kt).
ClusterRates sample_cluster_rates(const DissimilarityMatrix& d, const Partition& rho,
                                  const ModelParams& params, Rng& rng);

}  // namespace bdc
