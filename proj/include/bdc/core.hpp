// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdc {

// Input violated a documented invariant (bad matrix, bad labels, bad option).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine failed to converge or produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void warn(const std::string& message);

// Symmetric n x n matrix of strictly positive off-diagonal distances.
// The elementwise log is precomputed since every likelihood block needs it;
// the diagonal of both matrices is zero.
class DissimilarityMatrix {
 public:
  DissimilarityMatrix() = default;

  int size() const { return n_; }
  double operator()(int i, int j) const { return d_[index(i, j)]; }
  double log_at(int i, int j) const { return logd_[index(i, j)]; }

  std::span<const double> row(int i) const {
    return {d_.data() + index(i, 0), static_cast<std::size_t>(n_)};
  }
  std::span<const double> log_row(int i) const {
    return {logd_.data() + index(i, 0), static_cast<std::size_t>(n_)};
  }

  // Builds from already-checked symmetric storage. Use validate_dissimilarity
  // for untrusted input.
  static DissimilarityMatrix from_trusted(int n, std::vector<double> values);

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(j);
  }

  int n_ = 0;
  std::vector<double> d_;
  std::vector<double> logd_;
};

struct ValidateOptions {
  double symmetry_rel_tol = 1e-9;
  // Replace zero off-diagonal entries with 1e-6 * (smallest positive entry).
  bool clamp_zero = false;
};

// Checks squareness, finiteness, non-negativity, zero diagonal, symmetry
// (relative 1e-9, the average is stored) and strictly positive off-diagonal
// entries. Throws ValidationError naming the violated check.
DissimilarityMatrix validate_dissimilarity(
    const std::vector<std::vector<double>>& raw,
    const ValidateOptions& options = {});

// Cluster labels canonicalized by first occurrence: item 0 is always in
// cluster 0, the next unseen cluster gets id 1, and so on.
class Partition {
 public:
  Partition() = default;

  // Accepts arbitrary integer ids (e.g. 1-based labels from a file).
  static Partition from_labels(std::span<const int> labels);
  static Partition singletons(int n);
  static Partition one_cluster(int n);

  int size() const { return static_cast<int>(labels_.size()); }
  int num_clusters() const { return static_cast<int>(sizes_.size()); }
  int label(int i) const { return labels_[i]; }
  int cluster_size(int k) const { return sizes_[k]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<int>& sizes() const { return sizes_; }

  // Labels as 1..K for serialization.
  std::vector<int> one_based() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> labels_;
  std::vector<int> sizes_;
};

// Pair count, distance sum and log-distance sum of one block of Eq. (1):
// either the pairs inside one cluster or the pairs across two clusters.
struct Block {
  std::int64_t m = 0;
  double sum = 0.0;
  double log_sum = 0.0;

  Block& operator+=(const Block& other) {
    m += other.m;
    sum += other.sum;
    log_sum += other.log_sum;
    return *this;
  }
};

// Within-cluster blocks and the symmetric K x K table of cross-cluster blocks.
struct SuffStats {
  std::vector<Block> within;
  std::vector<Block> between;  // row-major K x K, diagonal unused
  int num_clusters = 0;

  const Block& pair(int k, int t) const {
    return between[static_cast<std::size_t>(k) * num_clusters + t];
  }
};

SuffStats suffstats_build(const DissimilarityMatrix& d, const Partition& rho);

// Moves item i from cluster `from` to cluster `to` (to == K opens a new
// singleton) and returns the canonicalized partition with its updated stats.
// Throws ValidationError if i is not in `from`.
struct MoveResult {
  Partition partition;
  SuffStats stats;
};
MoveResult suffstats_move(const SuffStats& stats, int i, int from, int to,
                          const DissimilarityMatrix& d, const Partition& rho);

// Largest relative difference between two stats tables over all entries.
double suffstats_max_rel_diff(const SuffStats& a, const SuffStats& b);

// Likelihood hyperparameters: Gamma(delta1, lambda_k) within clusters,
// Gamma(delta2, theta_kt) across clusters, with conjugate Gamma(alpha, beta)
// and Gamma(zeta, gamma) priors on the rates.
struct ModelParams {
  double delta1 = 1.0;
  double delta2 = 2.0;
  double alpha = 1.0;
  double beta = 1.0;
  double zeta = 1.0;
  double gamma = 1.0;
  bool repulsion = true;

  void validate() const;
};

// Shifted negative binomial partition prior nu = NegBin(r, p) + 1 with
// r ~ Gamma(eta, sigma) and p ~ Beta(u, v); r and p hold the current state.
struct ESCParams {
  double eta = 1.0;
  double sigma = 1.0;
  double u = 1.0;
  double v = 1.0;
  double r = 1.0;
  double p = 0.5;

  void validate() const;
};

struct MCMCOptions {
  int iterations = 50000;
  int burnin = 10000;
  int thin = 1;
  std::uint64_t seed = 1;
  int split_merge_scans = 5;
  int chains = 1;

  void validate() const;
};

}  // namespace bdc
