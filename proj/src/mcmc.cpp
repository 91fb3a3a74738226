// Apache License, Version 2.0, refer to LICENSE.txt

#include "bdc/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include "bdc/prior_esc.hpp"

namespace bdc {

namespace {

constexpr int kAdaptWindow = 50;

int sample_categorical(std::span<const double> logw, Rng& rng) {
  thread_local std::vector<double> weights;
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : logw) hi = std::max(hi, x);
  weights.resize(logw.size());
  double total = 0.0;
  for (std::size_t c = 0; c < logw.size(); ++c) {
    weights[c] = std::exp(logw[c] - hi);
    total += weights[c];
  }
  double target = rng.uniform() * total;
  const int last = static_cast<int>(logw.size()) - 1;
  for (int c = 0; c < last; ++c) {
    target -= weights[c];
    if (target < 0.0) return c;
  }
  return last;
}

double gamma_logpdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double beta_logpdf(double x, double a, double b) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log1p(-x);
}

bool close_enough(double a, double b, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

std::vector<Partition> SampleChain::partitions() const {
  std::vector<Partition> out;
  out.reserve(records.size());
  for (const auto& rec : records) out.push_back(rec.partition);
  return out;
}

Sampler::Sampler(const DissimilarityMatrix& d, const ModelParams& params, const ESCParams& esc,
                 const SamplerConfig& config, const Partition& init)
    : d_(&d),
      params_(params),
      esc_(esc),
      config_(config),
      lik_(params, config.prior_only ? 0 : d.size(), !config.prior_only),
      state_(d, init),
      r_(config.fix_r.value_or(esc.r)),
      p_(config.fix_p.value_or(esc.p)),
      r_step_(config.r_step) {
  esc_.r = r_;
  esc_.p = p_;
  esc_.validate();
  loglik_ = lik_.total(state_);
  log_en_ = log_prob_En(d.size(), r_, p_);
}

double Sampler::log_partition_prior() const {
  const std::vector<int> sizes = state_.sizes();
  const double unnormalized = eppf_log_unnormalized(sizes, r_, p_);
  return config_.conditioning == PriorConditioning::Conditional ? unnormalized - log_en_
                                                                 : unnormalized;
}

double Sampler::log_posterior() const {
  double out = loglik_ + log_partition_prior();
  if (!config_.fix_r) out += gamma_logpdf(r_, esc_.eta, esc_.sigma);
  if (!config_.fix_p) out += beta_logpdf(p_, esc_.u, esc_.v);
  return out;
}

void Sampler::refresh_block_values(int k) {
  const int k_count = state_.num_clusters();
  const std::size_t row = static_cast<std::size_t>(k) * block_stride_;
  block_values_[row + k] = lik_.cohesion(state_.within(k));
  if (!lik_.repulsion()) return;
  for (int t = 0; t < k_count; ++t) {
    if (t == k) continue;
    const double v = lik_.repulsion(state_.pair(k, t));
    block_values_[row + t] = v;
    block_values_[static_cast<std::size_t>(t) * block_stride_ + k] = v;
  }
}

void Sampler::rebuild_block_values(int min_stride) {
  if (block_stride_ < min_stride) {
    block_stride_ = std::max(min_stride, 2 * block_stride_);
    block_values_.assign(static_cast<std::size_t>(block_stride_) * block_stride_, 0.0);
  }
  for (int k = 0; k < state_.num_clusters(); ++k) refresh_block_values(k);
}

void Sampler::gibbs_sweep(Rng& rng) {
  const int n = state_.num_items();
  order_.resize(n);
  for (int i = 0; i < n; ++i) order_[i] = i;
  rng.shuffle(std::span<int>(order_));

  rebuild_block_values(state_.num_clusters() + 1);
  const double log_p = std::log(p_);
  const double log_new = r_ * std::log1p(-p_);
  // Prior weight of joining a cluster of size m:
  // (m + 1) nu(m + 1) / nu(m) = (m + 1) p (m - 1 + r) / m.
  size_logw_.resize(n + 1);
  for (int m = 1; m <= n; ++m) size_logw_[m] = std::log((m + 1.0) * (m - 1.0 + r_) / m) + log_p;
  for (int i : order_) {
    state_.row_sums(i, sums_);
    const int from = state_.label(i);
    const int before = state_.num_clusters();
    state_.detach(i, sums_);
    const int k_count = state_.num_clusters();
    const int original = k_count < before ? k_count : from;
    // A removed cluster's id is taken over by the last one.
    if (from < k_count) refresh_block_values(from);

    candidates_.resize(k_count + 1);
    for (int c = 0; c <= k_count; ++c) candidates_[c] = c;
    deltas_.resize(k_count + 1);
    allocation_log_deltas(state_, lik_, sums_, candidates_, deltas_, block_values_, block_stride_);

    logw_.resize(k_count + 1);
    for (int c = 0; c < k_count; ++c) logw_[c] = size_logw_[state_.cluster_size(c)] + deltas_[c];
    logw_[k_count] = std::log(k_count + 1.0) + log_new + deltas_[k_count];

    const int chosen = sample_categorical(logw_, rng);
    loglik_ += deltas_[chosen] - deltas_[original];
    state_.attach(i, chosen, sums_);
    if (state_.num_clusters() > block_stride_) rebuild_block_values(state_.num_clusters());
    else refresh_block_values(chosen);
  }
}

double Sampler::restricted_scan(std::span<const int> items, int a, int b, Rng& rng,
                                const std::vector<int>* forced) {
  const int targets[2] = {a, b};
  double deltas[2];
  double log_q = 0.0;
  const double log_p = std::log(p_);
  for (std::size_t idx = 0; idx < items.size(); ++idx) {
    const int k = items[idx];
    state_.row_sums(k, sums_);
    // Anchors keep both clusters nonempty, so ids are stable here.
    state_.detach(k, sums_);
    allocation_log_deltas(state_, lik_, sums_, targets, deltas);
    double lw[2];
    for (int s = 0; s < 2; ++s) {
      const double m = state_.cluster_size(targets[s]);
      lw[s] = std::log((m + 1.0) * (m - 1.0 + r_) / m) + log_p + deltas[s];
    }
    // log Pr(a) and log Pr(b) without overflow.
    const double hi = std::max(lw[0], lw[1]);
    const double log_norm = hi + std::log(std::exp(lw[0] - hi) + std::exp(lw[1] - hi));
    int choice;
    if (forced != nullptr) {
      choice = (*forced)[idx] == a ? 0 : 1;
    } else {
      choice = rng.uniform() < std::exp(lw[0] - log_norm) ? 0 : 1;
    }
    log_q += lw[choice] - log_norm;
    state_.attach(k, targets[choice], sums_);
  }
  return log_q;
}

SplitMergeOutcome Sampler::split_merge_step(Rng& rng) {
  const int n = state_.num_items();
  const int i = rng.uniform_int(n);
  int j = rng.uniform_int(n - 1);
  if (j >= i) ++j;
  return split_merge_step(i, j, rng);
}

SplitMergeOutcome Sampler::split_merge_step(int anchor_i, int anchor_j, Rng& rng) {
  SplitMergeOutcome out;
  const ClusterState saved = state_;
  const double old_loglik = loglik_;
  const double old_prior = log_partition_prior();
  const int ci = state_.label(anchor_i);
  const int cj = state_.label(anchor_j);
  const int scans = config_.options.split_merge_scans;

  std::vector<int> others;
  auto collect = [&](int cluster) {
    for (int k : state_.members(cluster)) {
      if (k != anchor_i && k != anchor_j) others.push_back(k);
    }
  };
  collect(ci);
  if (cj != ci) collect(cj);
  std::sort(others.begin(), others.end());

  if (ci == cj) {
    out.kind = SplitMergeKind::Split;
    ++counters_.split_proposed;
    const int a = ci;
    const int b = state_.num_clusters();
    state_.move(anchor_j, b);
    for (int k : others) {
      if (rng.uniform() < 0.5) state_.move(k, b);
    }
    for (int s = 0; s < scans; ++s) restricted_scan(others, a, b, rng, nullptr);
    out.log_proposal = restricted_scan(others, a, b, rng, nullptr);
    loglik_ = lik_.total(state_);
    out.log_ratio = loglik_ + log_partition_prior() - old_loglik - old_prior - out.log_proposal;
  } else {
    out.kind = SplitMergeKind::Merge;
    ++counters_.merge_proposed;
    std::vector<int> original(others.size());
    for (std::size_t idx = 0; idx < others.size(); ++idx) original[idx] = state_.label(others[idx]);
    for (int k : others) state_.move(k, rng.uniform() < 0.5 ? ci : cj);
    for (int s = 0; s < scans; ++s) restricted_scan(others, ci, cj, rng, nullptr);
    out.log_proposal = restricted_scan(others, ci, cj, rng, &original);
    const std::span<const int> moving = state_.members(state_.label(anchor_j));
    const std::vector<int> absorbed(moving.begin(), moving.end());
    for (int k : absorbed) state_.move(k, state_.label(anchor_i));
    loglik_ = lik_.total(state_);
    out.log_ratio = loglik_ + log_partition_prior() - old_loglik - old_prior + out.log_proposal;
  }

  out.accepted = std::log(rng.uniform()) < out.log_ratio;
  if (out.accepted) {
    if (out.kind == SplitMergeKind::Split) ++counters_.split_accepted;
    else ++counters_.merge_accepted;
  } else {
    state_ = saved;
    loglik_ = old_loglik;
  }
  return out;
}

double Sampler::r_log_target(double r) const {
  double out = (esc_.eta - 1.0) * std::log(r) - esc_.sigma * r;
  for (int k = 0; k < state_.num_clusters(); ++k) out += nu_logpmf(state_.cluster_size(k), r, p_);
  if (config_.conditioning == PriorConditioning::Conditional) {
    out -= log_prob_En(state_.num_items(), r, p_);
  }
  return out;
}

bool Sampler::update_r(Rng& rng) {
  if (config_.fix_r) return false;
  ++counters_.r_proposed;
  const double proposal = r_ * std::exp(r_step_ * rng.normal());
  bool accepted = false;
  if (proposal == r_) {
    accepted = true;
  } else if (proposal > 0.0 && std::isfinite(proposal)) {
    const double log_ratio = r_log_target(proposal) - r_log_target(r_) + std::log(proposal) - std::log(r_);
    accepted = std::log(rng.uniform()) < log_ratio;
  }
  if (accepted) {
    r_ = proposal;
    log_en_ = log_prob_En(state_.num_items(), r_, p_);
    ++counters_.r_accepted;
  }
  if (adapting_) {
    ++window_proposed_;
    if (accepted) ++window_accepted_;
    if (window_proposed_ == kAdaptWindow) {
      const double rate = static_cast<double>(window_accepted_) / kAdaptWindow;
      if (rate < 0.2) r_step_ *= 0.75;
      else if (rate > 0.4) r_step_ *= 1.35;
      window_proposed_ = 0;
      window_accepted_ = 0;
    }
  }
  return accepted;
}

bool Sampler::update_p(Rng& rng) {
  if (config_.fix_p) return false;
  ++counters_.p_proposed;
  const int n = state_.num_items();
  const int k_count = state_.num_clusters();
  const double proposal = rng.beta(esc_.u + n - k_count, esc_.v + r_ * k_count);
  const double proposal_log_en = log_prob_En(n, r_, proposal);
  bool accepted = true;
  if (config_.conditioning == PriorConditioning::Conditional) {
    accepted = std::log(rng.uniform()) < log_en_ - proposal_log_en;
  }
  if (accepted) {
    p_ = proposal;
    log_en_ = proposal_log_en;
    ++counters_.p_accepted;
  }
  return accepted;
}

void Sampler::iterate(Rng& rng) {
  gibbs_sweep(rng);
  if (state_.num_items() >= 2) split_merge_step(rng);
  update_r(rng);
  update_p(rng);
}

void Sampler::verify_caches(double rel_tol) const {
  ClusterState canonical = state_;
  canonical.canonicalize();
  const Partition rho = canonical.to_partition();
  const SuffStats rebuilt = suffstats_build(*d_, rho);
  const double stats_diff = suffstats_max_rel_diff(canonical.stats(), rebuilt);
  if (!(stats_diff <= rel_tol)) {
    throw NumericError("cache check: sufficient statistics drifted (rel diff " +
                       std::to_string(stats_diff) + ")");
  }
  const double fresh = config_.prior_only ? 0.0 : log_marginal_likelihood(rebuilt, params_);
  if (!close_enough(loglik_, fresh, rel_tol)) {
    throw NumericError("cache check: log marginal likelihood " + std::to_string(loglik_) +
                       " != recomputed " + std::to_string(fresh));
  }
  const double en = log_prob_En(state_.num_items(), r_, p_);
  if (!close_enough(log_en_, en, rel_tol)) throw NumericError("cache check: log P(E_n) drifted");
}

SampleChain run_sampler(const DissimilarityMatrix& d, const ModelParams& params,
                        const ESCParams& esc, const SamplerConfig& config, const Partition& init) {
  config.options.validate();
  const char* env = std::getenv("BDC_DEBUG_CHECKS");
  const bool debug = config.debug_checks || (env != nullptr && std::string(env) == "1");

  Rng rng(config.options.seed);
  Sampler sampler(d, params, esc, config, init);
  SampleChain chain;
  chain.n = d.size();
  chain.options = config.options;
  chain.seed = config.options.seed;
  const auto& opt = config.options;
  chain.records.reserve(static_cast<std::size_t>((opt.iterations - opt.burnin) / opt.thin));

  sampler.set_adapting(opt.burnin > 0);
  for (int it = 0; it < opt.iterations; ++it) {
    if (it == opt.burnin) sampler.set_adapting(false);
    sampler.iterate(rng);
    if (debug) sampler.verify_caches();
    if (it >= opt.burnin && (it + 1 - opt.burnin) % opt.thin == 0) {
      chain.records.push_back(
          ChainRecord{it, sampler.partition(), sampler.r(), sampler.p(), sampler.log_posterior()});
    }
  }
  chain.acceptance = sampler.acceptance();
  chain.r_step = sampler.r_step();
  return chain;
}

std::vector<SampleChain> run_chains(const DissimilarityMatrix& d, const ModelParams& params,
                                    const ESCParams& esc, const SamplerConfig& config,
                                    const Partition& init) {
  config.options.validate();
  const int count = config.options.chains;
  std::vector<SampleChain> chains(count);
  if (count == 1) {
    chains[0] = run_sampler(d, params, esc, config, init);
    return chains;
  }
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> workers;
    for (int c = 0; c < count; ++c) {
      workers.emplace_back([&, c] {
        try {
          SamplerConfig local = config;
          local.options.seed = derive_seed(config.options.seed, static_cast<std::uint64_t>(c));
          chains[c] = run_sampler(d, params, esc, local, init);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return chains;
}

}  // namespace bdc
