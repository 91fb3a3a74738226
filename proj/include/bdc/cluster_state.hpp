// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <span>
#include <vector>

#include "bdc/core.hpp"

namespace bdc {

// Mutable partition plus incrementally maintained sufficient statistics.
//
// Cluster ids are compact (0..K-1) but not in first-occurrence order while
// the state is being mutated: a cluster that empties is replaced by the last
// cluster. Call canonicalize() or to_partition() for the canonical form.
//
// Items may be detached (label -1) between detach() and attach(); every
// Gibbs visit does exactly that.
class ClusterState {
 public:
  ClusterState(const DissimilarityMatrix& d, const Partition& rho);
  ClusterState(const DissimilarityMatrix& d, const Partition& rho, const SuffStats& stats);

  const DissimilarityMatrix& distances() const { return *d_; }
  int num_items() const { return static_cast<int>(labels_.size()); }
  int num_clusters() const { return static_cast<int>(members_.size()); }
  int label(int i) const { return labels_[i]; }
  int cluster_size(int k) const { return static_cast<int>(members_[k].size()); }
  std::span<const int> members(int k) const { return members_[k]; }
  const Block& within(int k) const { return within_[k]; }
  const Block& pair(int k, int t) const { return between_[slot(k, t)]; }
  std::vector<int> sizes() const;

  // out[k] = {members of k other than i, sum of D(i,.) over them, sum of
  // log D(i,.) over them}. O(n).
  void row_sums(int i, std::vector<Block>& out) const;

  // Removes attached item i. `sums` must come from row_sums(i) and is kept in
  // step with the cluster ids: when i's cluster empties, the last cluster
  // takes its id and sums is reordered the same way.
  void detach(int i, std::vector<Block>& sums);
  // Adds detached item i to cluster k; k == num_clusters() opens a new one.
  void attach(int i, int k, std::vector<Block>& sums);
  void move(int i, int to);

  // Relabels clusters into first-occurrence order of their members.
  void canonicalize();
  Partition to_partition() const;
  // Stats in the current cluster-id order.
  SuffStats stats() const;

 private:
  std::size_t slot(int k, int t) const {
    return static_cast<std::size_t>(k) * static_cast<std::size_t>(capacity_) +
           static_cast<std::size_t>(t);
  }
  void ensure_capacity(int k);
  void remove_cluster(int k, std::vector<Block>& sums);
  void load(const Partition& rho);

  const DissimilarityMatrix* d_;
  std::vector<int> labels_;
  std::vector<int> position_;
  std::vector<std::vector<int>> members_;
  std::vector<Block> within_;
  std::vector<Block> between_;
  int capacity_ = 0;
};

}  // namespace bdc
