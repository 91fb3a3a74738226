// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <span>
#include <vector>

#include "bdc/core.hpp"
#include "bdc/random.hpp"

namespace bdc {

// Cluster-size law nu = NegBin(r, p) + 1:
//   nu(m) = Gamma(m-1+r) / (Gamma(r) (m-1)!) p^(m-1) (1-p)^r,  m >= 1.
double nu_logpmf(int m, double r, double p);
// nu(m+1) / nu(m) = p (m-1+r) / m.
double nu_ratio(int m, double r, double p);

// log NegBin(shape, p) pmf at k.
double negbin_logpmf(int k, double shape, double p);

// Probability that partial sums of iid nu-draws hit n exactly:
//   P(E_n | r, p) = sum_{K=1..n} NegBin(rK, p)(n - K).
double log_prob_En(int n, double r, double p);
double prob_En(int n, double r, double p);

// log[K! / n! * prod_j n_j! nu(n_j)], i.e. the EPPF without the P(E_n)
// normalizer. Depends only on the cluster sizes.
double eppf_log_unnormalized(std::span<const int> sizes, double r, double p);
// log P(rho | r, p) including the P(E_n | r, p) normalizer.
double eppf_conditional_log(const Partition& rho, double r, double p);
double eppf_conditional_log(std::span<const int> sizes, double r, double p);

struct KDistribution {
  int n = 0;
  std::vector<double> probs;  // probs[K-1] = Pr(K)
  bool exact = true;

  double operator()(int k) const { return probs[static_cast<std::size_t>(k - 1)]; }
};

// log of the unnormalized terms NegBin(rK, p)(n-K), K = 1..n; they sum to
// P(E_n | r, p).
std::vector<double> k_conditional_log_numerators(int n, double r, double p);
KDistribution k_conditional_pmf(int n, double r, double p);

// Confluent hypergeometric function of the second kind,
//   U(a, b, z) = 1/Gamma(a) int_0^inf exp(-z t) t^(a-1) (1+t)^(b-a-1) dt,
// for a > 0, z > 0. Throws ValidationError outside that domain.
double log_tricomi_u(double a, double b, double z);
double tricomi_u(double a, double b, double z);

// Marginal of K under r ~ Gamma(eta, sigma), p ~ Beta(u, v): the exact
// closed form when u = v = 1, otherwise the Tricomi-U approximation,
// renormalized over K = 1..n (exact = false).
KDistribution k_marginal_pmf(int n, const ESCParams& esc);

// Unnormalized log prior weights for reinserting an item: existing cluster j
// (size n_j without the item) gets (n_j + 1) nu(n_j + 1) / nu(n_j), a new
// cluster gets (K + 1) nu(1). Output has sizes.size() + 1 entries.
std::vector<double> allocation_prior_logweights(std::span<const int> sizes, double r, double p);

// Draw from ESC_n(nu): iid sizes until the running total reaches n, retry
// unless it lands exactly on n, then assign labels by a uniform permutation.
Partition sample_partition_prior(int n, double r, double p, Rng& rng);

// One NegBin(r, p) + 1 draw (Gamma-Poisson mixture).
int sample_nu(double r, double p, Rng& rng);

}  // namespace bdc
