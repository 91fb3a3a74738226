// Apache License, Version 2.0, refer to LICENSE.txt

#include "bdc/core.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "bdc/cluster_state.hpp"

namespace bdc {

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

DissimilarityMatrix DissimilarityMatrix::from_trusted(int n, std::vector<double> values) {
  DissimilarityMatrix out;
  out.n_ = n;
  out.d_ = std::move(values);
  out.logd_.resize(out.d_.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t k = out.index(i, j);
      out.logd_[k] = i == j ? 0.0 : std::log(out.d_[k]);
    }
  }
  return out;
}

namespace {

std::string cell(int i, int j) {
  std::ostringstream s;
  s << "(" << i + 1 << "," << j + 1 << ")";
  return s.str();
}

}  // namespace

DissimilarityMatrix validate_dissimilarity(const std::vector<std::vector<double>>& raw,
                                           const ValidateOptions& options) {
  const int n = static_cast<int>(raw.size());
  if (n == 0) throw ValidationError("dissimilarity: matrix is empty");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(raw[i].size()) != n) {
      throw ValidationError("dissimilarity: not square (row " + std::to_string(i + 1) + " has " +
                            std::to_string(raw[i].size()) + " entries, expected " +
                            std::to_string(n) + ")");
    }
  }
  double smallest_positive = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = raw[i][j];
      if (!std::isfinite(x)) throw ValidationError("dissimilarity: non-finite entry at " + cell(i, j));
      if (x < 0.0) throw ValidationError("dissimilarity: negative entry at " + cell(i, j));
      if (i == j && x != 0.0) throw ValidationError("dissimilarity: nonzero diagonal at " + cell(i, j));
      if (x > 0.0) smallest_positive = std::min(smallest_positive, x);
    }
  }
  std::vector<double> values(static_cast<std::size_t>(n) * n, 0.0);
  int clamped = 0;
  const double eps = 1e-6 * smallest_positive;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double a = raw[i][j];
      const double b = raw[j][i];
      const double scale = std::max(std::abs(a), std::abs(b));
      if (std::abs(a - b) > options.symmetry_rel_tol * scale) {
        throw ValidationError("dissimilarity: asymmetric entries at " + cell(i, j) + " and " +
                              cell(j, i));
      }
      double x = 0.5 * (a + b);
      if (x == 0.0) {
        if (!options.clamp_zero || !std::isfinite(eps)) {
          throw ValidationError("dissimilarity: zero off-diagonal entry at " + cell(i, j) +
                                " (duplicate observations?)");
        }
        x = eps;
        ++clamped;
      }
      values[static_cast<std::size_t>(i) * n + j] = x;
      values[static_cast<std::size_t>(j) * n + i] = x;
    }
  }
  if (clamped > 0) {
    warn("clamped " + std::to_string(clamped) + " zero off-diagonal distances to " +
         std::to_string(eps));
  }
  return DissimilarityMatrix::from_trusted(n, std::move(values));
}

Partition Partition::from_labels(std::span<const int> labels) {
  Partition out;
  out.labels_.resize(labels.size());
  std::unordered_map<int, int> ids;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.try_emplace(labels[i], static_cast<int>(out.sizes_.size()));
    if (inserted) out.sizes_.push_back(0);
    out.labels_[i] = it->second;
    ++out.sizes_[it->second];
  }
  return out;
}

Partition Partition::singletons(int n) {
  std::vector<int> z(n);
  for (int i = 0; i < n; ++i) z[i] = i;
  return from_labels(z);
}

Partition Partition::one_cluster(int n) {
  std::vector<int> z(n, 0);
  return from_labels(z);
}

std::vector<int> Partition::one_based() const {
  std::vector<int> out(labels_);
  for (int& z : out) ++z;
  return out;
}

SuffStats suffstats_build(const DissimilarityMatrix& d, const Partition& rho) {
  if (rho.size() != d.size()) {
    throw ValidationError("labels: " + std::to_string(rho.size()) + " labels for " +
                          std::to_string(d.size()) + " items");
  }
  const int k = rho.num_clusters();
  SuffStats s;
  s.num_clusters = k;
  s.within.assign(k, Block{});
  s.between.assign(static_cast<std::size_t>(k) * k, Block{});
  const int n = d.size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int a = rho.label(i);
      const int b = rho.label(j);
      const Block x{1, d(i, j), d.log_at(i, j)};
      if (a == b) {
        s.within[a] += x;
      } else {
        s.between[static_cast<std::size_t>(a) * k + b] += x;
        s.between[static_cast<std::size_t>(b) * k + a] += x;
      }
    }
  }
  return s;
}

MoveResult suffstats_move(const SuffStats& stats, int i, int from, int to,
                          const DissimilarityMatrix& d, const Partition& rho) {
  if (i < 0 || i >= rho.size()) throw ValidationError("move: item out of range");
  if (rho.label(i) != from) {
    throw ValidationError("move: item " + std::to_string(i) + " is not in cluster " +
                          std::to_string(from));
  }
  if (to < 0 || to > rho.num_clusters()) throw ValidationError("move: target cluster out of range");
  if (stats.num_clusters != rho.num_clusters()) {
    throw ValidationError("move: stats do not match partition");
  }
  ClusterState state(d, rho, stats);
  state.move(i, to);
  state.canonicalize();
  return {state.to_partition(), state.stats()};
}

double suffstats_max_rel_diff(const SuffStats& a, const SuffStats& b) {
  if (a.num_clusters != b.num_clusters) return std::numeric_limits<double>::infinity();
  auto rel = [](double x, double y) {
    const double scale = std::max({std::abs(x), std::abs(y), 1e-300});
    return std::abs(x - y) / scale;
  };
  double worst = 0.0;
  auto cmp = [&](const Block& x, const Block& y) {
    if (x.m != y.m) worst = std::numeric_limits<double>::infinity();
    if (std::abs(x.sum - y.sum) > 1e-12) worst = std::max(worst, rel(x.sum, y.sum));
    if (std::abs(x.log_sum - y.log_sum) > 1e-12) worst = std::max(worst, rel(x.log_sum, y.log_sum));
  };
  for (int k = 0; k < a.num_clusters; ++k) {
    cmp(a.within[k], b.within[k]);
    for (int t = 0; t < a.num_clusters; ++t) {
      if (t != k) cmp(a.pair(k, t), b.pair(k, t));
    }
  }
  return worst;
}

void ModelParams::validate() const {
  for (double x : {delta1, delta2, alpha, beta, zeta, gamma}) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw ValidationError("model params: all of delta1, delta2, alpha, beta, zeta, gamma must be positive and finite");
    }
  }
  if (repulsion && !(delta2 > 1.0)) {
    throw ValidationError("model params: delta2 must exceed 1 when repulsion is on");
  }
}

void ESCParams::validate() const {
  for (double x : {eta, sigma, u, v, r}) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw ValidationError("prior params: eta, sigma, u, v and r must be positive and finite");
    }
  }
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("prior params: p must lie strictly inside (0,1)");
}

void MCMCOptions::validate() const {
  if (iterations <= 0) throw ValidationError("options: iterations must be positive");
  if (burnin < 0 || burnin >= iterations) throw ValidationError("options: burn-in must be in [0, iterations)");
  if (thin < 1) throw ValidationError("options: thinning must be >= 1");
  if (split_merge_scans < 0) throw ValidationError("options: split-merge scans must be >= 0");
  if (chains < 1) throw ValidationError("options: chain count must be >= 1");
}

}  // namespace bdc
