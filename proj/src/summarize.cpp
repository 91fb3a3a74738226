// Apache License, Version 2.0, refer to LICENSE.txt

#include "bdc/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "bdc/metrics.hpp"

namespace bdc {

namespace {

void check_draws(std::span<const Partition> draws) {
  if (draws.empty()) throw ValidationError("summarize: chain has no draws");
  const int n = draws.front().size();
  for (const auto& rho : draws) {
    if (rho.size() != n) throw ValidationError("summarize: draws disagree on the number of items");
  }
}

std::vector<Partition> evenly_spaced(std::span<const Partition> draws, int cap) {
  const std::size_t total = draws.size();
  const std::size_t take = std::min<std::size_t>(total, static_cast<std::size_t>(std::max(1, cap)));
  std::vector<Partition> out;
  out.reserve(take);
  for (std::size_t j = 0; j < take; ++j) out.push_back(draws[j * total / take]);
  return out;
}

// Working partition for greedy moves: ids are stable, clusters may be empty.
struct Working {
  std::vector<int> labels;
  std::vector<int> sizes;

  explicit Working(const Partition& rho) : labels(rho.labels()), sizes(rho.sizes()) {}

  int empty_slot() {
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      if (sizes[k] == 0) return static_cast<int>(k);
    }
    sizes.push_back(0);
    return static_cast<int>(sizes.size()) - 1;
  }
};

PointEstimate refine_binder(const Partition& start, const Coclustering& s, int max_sweeps,
                            PointEstimate out) {
  const int n = s.n;
  Working w(start);
  // Pairs in the same cluster cost 1 - s_ij, split pairs cost s_ij, so a
  // move changes the loss by sum over the new mates of (1 - 2 s) minus the
  // same over the old mates.
  std::vector<double> gain;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool moved = false;
    for (int i = 0; i < n; ++i) {
      const int from = w.labels[i];
      const int fresh = w.sizes[from] > 1 ? w.empty_slot() : -1;
      gain.assign(w.sizes.size(), 0.0);
      for (int j = 0; j < n; ++j) {
        if (j != i) gain[w.labels[j]] += 1.0 - 2.0 * s(i, j);
      }
      int best = from;
      double best_delta = -1e-12;
      for (std::size_t t = 0; t < w.sizes.size(); ++t) {
        const int tt = static_cast<int>(t);
        if (tt == from || (w.sizes[t] == 0 && tt != fresh)) continue;
        const double delta = gain[t] - gain[from];
        if (delta < best_delta) {
          best_delta = delta;
          best = tt;
        }
      }
      if (best != from) {
        --w.sizes[from];
        ++w.sizes[best];
        w.labels[i] = best;
        moved = true;
      }
    }
    out.refinement_sweeps = sweep + 1;
    if (!moved) break;
  }
  out.partition = Partition::from_labels(w.labels);
  out.expected_loss = expected_binder_loss(out.partition, s);
  return out;
}

PointEstimate refine_vi(const Partition& start, std::span<const Partition> draws, int max_sweeps,
                        PointEstimate out) {
  const int n = start.size();
  const int count = static_cast<int>(draws.size());
  std::vector<double> f(n + 2, 0.0);
  for (int x = 1; x < n + 2; ++x) f[x] = x * std::log(static_cast<double>(x));

  Working w(start);
  // rows[k][offset[d] + j] = items in estimate cluster k and draw-d cluster j.
  std::vector<std::size_t> offset(count + 1, 0);
  for (int d = 0; d < count; ++d) offset[d + 1] = offset[d] + draws[d].num_clusters();
  const std::size_t width = offset[count];
  std::vector<std::vector<int>> rows(w.sizes.size(), std::vector<int>(width, 0));
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < count; ++d) ++rows[w.labels[i]][offset[d] + draws[d].label(i)];
  }

  std::vector<double> delta_joint;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool moved = false;
    for (int i = 0; i < n; ++i) {
      const int from = w.labels[i];
      const int fresh = w.sizes[from] > 1 ? w.empty_slot() : -1;
      if (rows.size() < w.sizes.size()) rows.emplace_back(width, 0);
      const std::vector<int>& src = rows[from];
      double leave = 0.0;
      for (int d = 0; d < count; ++d) {
        const int c = src[offset[d] + draws[d].label(i)];
        leave += f[c - 1] - f[c];
      }
      const double leave_size = f[w.sizes[from] - 1] - f[w.sizes[from]];

      int best = from;
      double best_delta = -1e-10;
      for (std::size_t t = 0; t < w.sizes.size(); ++t) {
        const int tt = static_cast<int>(t);
        if (tt == from || (w.sizes[t] == 0 && tt != fresh)) continue;
        const std::vector<int>& dst = rows[t];
        double join = 0.0;
        for (int d = 0; d < count; ++d) {
          const int c = dst[offset[d] + draws[d].label(i)];
          join += f[c + 1] - f[c];
        }
        // n * E[VI] changes by the marginal terms minus twice the joint ones.
        const double delta = (leave_size + f[w.sizes[t] + 1] - f[w.sizes[t]]) -
                             2.0 * (leave + join) / count;
        if (delta < best_delta) {
          best_delta = delta;
          best = tt;
        }
      }
      if (best != from) {
        for (int d = 0; d < count; ++d) {
          const std::size_t col = offset[d] + draws[d].label(i);
          --rows[from][col];
          ++rows[best][col];
        }
        --w.sizes[from];
        ++w.sizes[best];
        w.labels[i] = best;
        moved = true;
      }
    }
    out.refinement_sweeps = sweep + 1;
    if (!moved) break;
  }
  out.partition = Partition::from_labels(w.labels);
  out.expected_loss = expected_vi_loss(out.partition, draws);
  return out;
}

}  // namespace

Coclustering coclustering_matrix(std::span<const Partition> draws) {
  check_draws(draws);
  Coclustering s;
  s.n = draws.front().size();
  const std::size_t n = static_cast<std::size_t>(s.n);
  std::vector<std::int64_t> counts(n * n, 0);
  std::vector<std::vector<int>> members;
  for (const auto& rho : draws) {
    members.assign(rho.num_clusters(), {});
    for (int i = 0; i < s.n; ++i) members[rho.label(i)].push_back(i);
    for (const auto& group : members) {
      for (int a : group) {
        for (int b : group) ++counts[a * n + b];
      }
    }
  }
  s.values.resize(n * n);
  const double total = static_cast<double>(draws.size());
  for (std::size_t k = 0; k < n * n; ++k) s.values[k] = static_cast<double>(counts[k]) / total;
  return s;
}

double expected_binder_loss(const Partition& estimate, const Coclustering& s) {
  if (estimate.size() != s.n) throw ValidationError("summarize: estimate length mismatch");
  if (s.n < 2) return 0.0;
  double loss = 0.0;
  for (int i = 0; i < s.n; ++i) {
    for (int j = i + 1; j < s.n; ++j) {
      loss += estimate.label(i) == estimate.label(j) ? 1.0 - s(i, j) : s(i, j);
    }
  }
  return loss / (0.5 * s.n * (s.n - 1.0));
}

double expected_vi_loss(const Partition& estimate, std::span<const Partition> draws) {
  check_draws(draws);
  double total = 0.0;
  for (const auto& rho : draws) total += vi_distance(estimate, rho);
  return total / static_cast<double>(draws.size());
}

PointEstimate point_estimate(std::span<const Partition> draws, Loss loss, int max_draws,
                             int max_sweeps) {
  check_draws(draws);
  std::vector<Partition> scoring;
  Coclustering s;
  if (loss == Loss::Binder) {
    s = coclustering_matrix(draws);
  } else {
    scoring = evenly_spaced(draws, max_draws);
  }
  // Distinct candidates in order of first appearance.
  std::map<std::vector<int>, int> seen;
  std::vector<const Partition*> candidates;
  const std::span<const Partition> pool = loss == Loss::Binder ? draws : std::span<const Partition>(scoring);
  for (const auto& rho : pool) {
    if (seen.emplace(rho.labels(), static_cast<int>(candidates.size())).second) {
      candidates.push_back(&rho);
    }
  }

  PointEstimate out;
  out.candidates = static_cast<int>(candidates.size());
  const Partition* best = nullptr;
  double best_loss = 0.0;
  for (const Partition* c : candidates) {
    const double value = loss == Loss::Binder ? expected_binder_loss(*c, s) : expected_vi_loss(*c, scoring);
    if (best == nullptr || value < best_loss) {
      best = c;
      best_loss = value;
    }
  }
  out.best_sampled_loss = best_loss;
  out = loss == Loss::Binder ? refine_binder(*best, s, max_sweeps, out)
                             : refine_vi(*best, scoring, max_sweeps, out);
  if (out.expected_loss > best_loss) {
    // Rounding in the incremental deltas; never return worse than a sample.
    out.partition = *best;
    out.expected_loss = best_loss;
  }
  return out;
}

std::vector<double> k_posterior(std::span<const Partition> draws) {
  check_draws(draws);
  int k_max = 0;
  for (const auto& rho : draws) k_max = std::max(k_max, rho.num_clusters());
  std::vector<double> probs(k_max + 1, 0.0);
  for (const auto& rho : draws) probs[rho.num_clusters()] += 1.0;
  for (double& x : probs) x /= static_cast<double>(draws.size());
  return probs;
}

double ess(std::span<const double> trace) {
  const std::size_t n = trace.size();
  if (n < 10) throw ValidationError("ess: trace needs at least 10 values");
  double mean = 0.0;
  for (double x : trace) mean += x;
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t t = 0; t < n; ++t) centered[t] = trace[t] - mean;
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) acc += centered[t] * centered[t + lag];
    return acc / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) {
    warn("ess: constant trace, effective sample size set to 0");
    return 0.0;
  }
  double tau = -1.0;
  double previous_pair = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double pair = (autocov(2 * m) + autocov(2 * m + 1)) / c0;
    if (pair <= 0.0) break;
    pair = std::min(pair, previous_pair);
    previous_pair = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n)));
  return static_cast<double>(n) / tau;
}

PosteriorSummary summarize_chain(const SampleChain& chain, Loss loss, int max_draws) {
  const std::vector<Partition> draws = chain.partitions();
  PosteriorSummary out;
  out.draws = static_cast<int>(draws.size());
  out.coclustering = coclustering_matrix(draws);
  out.k_histogram = k_posterior(draws);
  out.loss = loss;
  out.estimate = point_estimate(draws, loss, max_draws);
  if (draws.size() >= 10) {
    std::vector<double> k_trace, lp_trace;
    for (const auto& rec : chain.records) {
      k_trace.push_back(rec.num_clusters());
      lp_trace.push_back(rec.logpost);
    }
    out.ess_k = ess(k_trace);
    out.ess_logpost = ess(lp_trace);
  }
  return out;
}

}  // namespace bdc
