// Apache License, Version 2.0, refer to LICENSE.txt

#include "bdc/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bdc/kernels.hpp"

namespace bdc {

namespace {

// Tables beyond this many entries fall back to std::lgamma.
constexpr std::int64_t kMaxTable = std::int64_t{1} << 22;

}  // namespace

double gamma_block_logmarginal(std::int64_t m, double sum, double log_sum, double shape, double a,
                               double b) {
  if (m == 0) return 0.0;
  const double md = static_cast<double>(m);
  const double post_shape = a + shape * md;
  return (shape - 1.0) * log_sum - md * std::lgamma(shape) + a * std::log(b) +
         std::lgamma(post_shape) - std::lgamma(a) - post_shape * std::log(b + sum);
}

double cohesion_logmarginal(std::int64_t m, double sum, double log_sum, const ModelParams& params) {
  return gamma_block_logmarginal(m, sum, log_sum, params.delta1, params.alpha, params.beta);
}

double repulsion_logmarginal(std::int64_t m, double sum, double log_sum, const ModelParams& params) {
  if (!params.repulsion) return 0.0;
  return gamma_block_logmarginal(m, sum, log_sum, params.delta2, params.zeta, params.gamma);
}

double log_marginal_likelihood(const SuffStats& stats, const ModelParams& params) {
  double total = 0.0;
  for (int k = 0; k < stats.num_clusters; ++k) {
    const Block& w = stats.within[k];
    total += cohesion_logmarginal(w.m, w.sum, w.log_sum, params);
    if (!params.repulsion) continue;
    for (int t = k + 1; t < stats.num_clusters; ++t) {
      const Block& x = stats.pair(k, t);
      total += repulsion_logmarginal(x.m, x.sum, x.log_sum, params);
    }
  }
  return total;
}

double log_marginal_likelihood(const DissimilarityMatrix& d, const Partition& rho,
                               const ModelParams& params) {
  return log_marginal_likelihood(suffstats_build(d, rho), params);
}

void LikelihoodEvaluator::Family::init(double shape_, double a_, double b_, std::int64_t max_m) {
  shape = shape_;
  a = a_;
  b = b_;
  lgamma_shape = std::lgamma(shape);
  log_b = std::log(b);
  prior_const = a * log_b - std::lgamma(a);
  const std::int64_t size = std::min(max_m + 1, kMaxTable);
  table.resize(static_cast<std::size_t>(size));
  for (std::int64_t m = 0; m < size; ++m) {
    table[static_cast<std::size_t>(m)] = std::lgamma(a + shape * static_cast<double>(m));
  }
}

double LikelihoodEvaluator::Family::operator()(const Block& blk) const {
  if (blk.m == 0) return 0.0;
  return from_log(blk, std::log(b + blk.sum));
}

double LikelihoodEvaluator::Family::from_log(const Block& blk, double log_rate_sum) const {
  if (blk.m == 0) return 0.0;
  const double md = static_cast<double>(blk.m);
  const double post_shape = a + shape * md;
  const double lg = blk.m < static_cast<std::int64_t>(table.size())
                        ? table[static_cast<std::size_t>(blk.m)]
                        : std::lgamma(post_shape);
  return (shape - 1.0) * blk.log_sum - md * lgamma_shape + prior_const + lg - post_shape * log_rate_sum;
}

LikelihoodEvaluator::LikelihoodEvaluator(const ModelParams& params, int n, bool enabled)
    : params_(params), enabled_(enabled) {
  params_.validate();
  const std::int64_t nn = n;
  within_.init(params.delta1, params.alpha, params.beta, nn * (nn - 1) / 2);
  between_.init(params.delta2, params.zeta, params.gamma, params.repulsion ? (nn * nn) / 4 : 0);
}

double LikelihoodEvaluator::cohesion(const Block& b) const { return enabled_ ? within_(b) : 0.0; }

double LikelihoodEvaluator::repulsion(const Block& b) const {
  return repulsion() ? between_(b) : 0.0;
}

double LikelihoodEvaluator::cohesion_from_log(const Block& b, double log_rate_sum) const {
  return enabled_ ? within_.from_log(b, log_rate_sum) : 0.0;
}

double LikelihoodEvaluator::repulsion_from_log(const Block& b, double log_rate_sum) const {
  return repulsion() ? between_.from_log(b, log_rate_sum) : 0.0;
}

double LikelihoodEvaluator::total(const ClusterState& state) const {
  if (!enabled_) return 0.0;
  double out = 0.0;
  const int k_count = state.num_clusters();
  for (int k = 0; k < k_count; ++k) {
    out += within_(state.within(k));
    if (!repulsion()) continue;
    for (int t = k + 1; t < k_count; ++t) out += between_(state.pair(k, t));
  }
  return out;
}

void allocation_log_deltas(const ClusterState& state, const LikelihoodEvaluator& lik,
                           std::span<const Block> sums, std::span<const int> candidates,
                           std::span<double> out) {
  const int k_count = state.num_clusters();
  if (!lik.enabled()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const bool rep = lik.repulsion();
  for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
    const int c = candidates[idx];
    double delta = 0.0;
    if (c == k_count) {
      if (rep) {
        for (int t = 0; t < k_count; ++t) delta += lik.repulsion(sums[t]);
      }
    } else {
      Block w = state.within(c);
      const double before = lik.cohesion(w);
      w += sums[c];
      delta = lik.cohesion(w) - before;
      if (rep) {
        for (int t = 0; t < k_count; ++t) {
          if (t == c) continue;
          Block x = state.pair(c, t);
          const double old_value = lik.repulsion(x);
          x += sums[t];
          delta += lik.repulsion(x) - old_value;
        }
      }
    }
    out[idx] = delta;
  }
}

void allocation_log_deltas(const ClusterState& state, const LikelihoodEvaluator& lik,
                           std::span<const Block> sums, std::span<const int> candidates,
                           std::span<double> out, std::span<const double> old_pairs, int stride) {
  if (!lik.enabled()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  // Every log(rate + sum) the candidates need goes through one batched call.
  thread_local std::vector<double> args;
  thread_local std::vector<double> logs;
  const int k_count = state.num_clusters();
  const bool rep = lik.repulsion();
  const double within_rate = lik.params().beta;
  const double between_rate = lik.params().gamma;
  args.clear();
  for (int c : candidates) {
    if (c < k_count) args.push_back(within_rate + (state.within(c).sum + sums[c].sum));
    if (!rep) continue;
    for (int t = 0; t < k_count; ++t) {
      if (t == c) continue;
      const double pair_sum = c == k_count ? 0.0 : state.pair(c, t).sum;
      args.push_back(between_rate + (pair_sum + sums[t].sum));
    }
  }
  logs.resize(args.size());
  kernels::log_batch(args, logs);

  std::size_t pos = 0;
  for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
    const int c = candidates[idx];
    double delta = 0.0;
    if (c == k_count) {
      if (rep) {
        for (int t = 0; t < k_count; ++t) delta += lik.repulsion_from_log(sums[t], logs[pos++]);
      }
    } else {
      const double* old_row = old_pairs.data() + static_cast<std::size_t>(c) * stride;
      Block w = state.within(c);
      w += sums[c];
      delta = lik.cohesion_from_log(w, logs[pos++]) - old_row[c];
      if (rep) {
        for (int t = 0; t < k_count; ++t) {
          if (t == c) continue;
          Block x = state.pair(c, t);
          x += sums[t];
          delta += lik.repulsion_from_log(x, logs[pos++]) - old_row[t];
        }
      }
    }
    out[idx] = delta;
  }
}

std::vector<double> allocation_log_deltas(const ClusterState& state, const LikelihoodEvaluator& lik,
                                          std::span<const Block> sums) {
  const int k_count = state.num_clusters();
  std::vector<int> candidates(k_count + 1);
  for (int k = 0; k <= k_count; ++k) candidates[k] = k;
  std::vector<double> out(k_count + 1);
  allocation_log_deltas(state, lik, sums, candidates, out);
  return out;
}

ClusterRates sample_cluster_rates(const DissimilarityMatrix& d, const Partition& rho,
                                  const ModelParams& params, Rng& rng) {
  const SuffStats s = suffstats_build(d, rho);
  ClusterRates out;
  const int k_count = s.num_clusters;
  out.num_clusters = k_count;
  out.lambda.resize(k_count);
  out.theta.assign(static_cast<std::size_t>(k_count) * k_count, 0.0);
  for (int k = 0; k < k_count; ++k) {
    const Block& w = s.within[k];
    out.lambda[k] = rng.gamma(params.alpha + params.delta1 * static_cast<double>(w.m),
                              params.beta + w.sum);
  }
  for (int k = 0; k < k_count; ++k) {
    for (int t = k + 1; t < k_count; ++t) {
      const Block& x = s.pair(k, t);
      const double draw = rng.gamma(params.zeta + params.delta2 * static_cast<double>(x.m),
                                    params.gamma + x.sum);
      out.theta[static_cast<std::size_t>(k) * k_count + t] = draw;
      out.theta[static_cast<std::size_t>(t) * k_count + k] = draw;
    }
  }
  return out;
}

}  // namespace bdc
