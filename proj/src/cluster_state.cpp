// Apache License, Version 2.0, refer to LICENSE.txt

#include "bdc/cluster_state.hpp"

#include <algorithm>
#include <numeric>

#include "bdc/kernels.hpp"

namespace bdc {

namespace {

void subtract(Block& b, const Block& x) {
  b.m -= x.m;
  if (b.m == 0) {
    b = Block{};
  } else {
    b.sum -= x.sum;
    b.log_sum -= x.log_sum;
  }
}

}  // namespace

ClusterState::ClusterState(const DissimilarityMatrix& d, const Partition& rho) : d_(&d) {
  load(rho);
  const SuffStats s = suffstats_build(d, rho);
  within_ = s.within;
  for (int k = 0; k < s.num_clusters; ++k) {
    for (int t = 0; t < s.num_clusters; ++t) between_[slot(k, t)] = s.pair(k, t);
  }
}

ClusterState::ClusterState(const DissimilarityMatrix& d, const Partition& rho, const SuffStats& stats)
    : d_(&d) {
  load(rho);
  within_ = stats.within;
  for (int k = 0; k < stats.num_clusters; ++k) {
    for (int t = 0; t < stats.num_clusters; ++t) between_[slot(k, t)] = stats.pair(k, t);
  }
}

void ClusterState::load(const Partition& rho) {
  if (rho.size() != d_->size()) {
    throw ValidationError("labels: " + std::to_string(rho.size()) + " labels for " +
                          std::to_string(d_->size()) + " items");
  }
  labels_ = rho.labels();
  position_.assign(labels_.size(), 0);
  members_.assign(rho.num_clusters(), {});
  for (int i = 0; i < rho.size(); ++i) {
    position_[i] = static_cast<int>(members_[labels_[i]].size());
    members_[labels_[i]].push_back(i);
  }
  capacity_ = 0;
  between_.clear();
  ensure_capacity(std::max(rho.num_clusters(), 4));
}

std::vector<int> ClusterState::sizes() const {
  std::vector<int> out(members_.size());
  for (std::size_t k = 0; k < members_.size(); ++k) out[k] = static_cast<int>(members_[k].size());
  return out;
}

void ClusterState::ensure_capacity(int k) {
  if (k <= capacity_) return;
  int cap = std::max(capacity_, 4);
  while (cap < k) cap *= 2;
  std::vector<Block> grown(static_cast<std::size_t>(cap) * cap);
  const int live = std::min(num_clusters(), capacity_);
  for (int a = 0; a < live; ++a) {
    for (int b = 0; b < live; ++b) {
      grown[static_cast<std::size_t>(a) * cap + b] = between_[slot(a, b)];
    }
  }
  between_ = std::move(grown);
  capacity_ = cap;
  within_.reserve(cap);
}

void ClusterState::row_sums(int i, std::vector<Block>& out) const {
  const int k_count = num_clusters();
  out.resize(k_count);
  const double* row = d_->row(i).data();
  const double* log_row = d_->log_row(i).data();
  for (int k = 0; k < k_count; ++k) {
    const auto g = kernels::gather_sum2(row, log_row, members_[k]);
    const int self = labels_[i] == k ? 1 : 0;
    out[k] = Block{static_cast<std::int64_t>(members_[k].size()) - self, g.sum, g.log_sum};
  }
}

void ClusterState::detach(int i, std::vector<Block>& sums) {
  const int a = labels_[i];
  const int k_count = num_clusters();
  subtract(within_[a], sums[a]);
  for (int t = 0; t < k_count; ++t) {
    if (t == a) continue;
    subtract(between_[slot(a, t)], sums[t]);
    between_[slot(t, a)] = between_[slot(a, t)];
  }
  auto& list = members_[a];
  const int pos = position_[i];
  list[pos] = list.back();
  position_[list[pos]] = pos;
  list.pop_back();
  labels_[i] = -1;
  if (list.empty()) remove_cluster(a, sums);
}

void ClusterState::remove_cluster(int k, std::vector<Block>& sums) {
  const int last = num_clusters() - 1;
  if (k != last) {
    members_[k] = std::move(members_[last]);
    for (int j : members_[k]) labels_[j] = k;
    within_[k] = within_[last];
    for (int t = 0; t < last; ++t) {
      if (t == k) continue;
      between_[slot(k, t)] = between_[slot(last, t)];
      between_[slot(t, k)] = between_[slot(k, t)];
    }
    sums[k] = sums[last];
  }
  for (int t = 0; t <= last; ++t) {
    between_[slot(last, t)] = Block{};
    between_[slot(t, last)] = Block{};
  }
  between_[slot(k, k)] = Block{};
  members_.pop_back();
  within_.pop_back();
  sums.pop_back();
}

void ClusterState::attach(int i, int k, std::vector<Block>& sums) {
  const int k_count = num_clusters();
  if (k == k_count) {
    ensure_capacity(k_count + 1);
    members_.emplace_back();
    within_.push_back(Block{});
    for (int t = 0; t < k_count; ++t) {
      between_[slot(k, t)] = sums[t];
      between_[slot(t, k)] = sums[t];
    }
    sums.push_back(Block{});
  } else {
    within_[k] += sums[k];
    for (int t = 0; t < k_count; ++t) {
      if (t == k) continue;
      between_[slot(k, t)] += sums[t];
      between_[slot(t, k)] = between_[slot(k, t)];
    }
  }
  labels_[i] = k;
  position_[i] = static_cast<int>(members_[k].size());
  members_[k].push_back(i);
}

void ClusterState::move(int i, int to) {
  std::vector<Block> sums;
  row_sums(i, sums);
  const int from = labels_[i];
  if (to == from) return;
  const int before = num_clusters();
  // A cluster emptied by detach is filled by the last id, so a target that
  // pointed at the last cluster follows it; a request for a fresh cluster
  // still means "one past the end".
  detach(i, sums);
  if (num_clusters() < before) {
    if (to == before) to = num_clusters();
    else if (to == before - 1) to = from;
  }
  attach(i, to, sums);
}

void ClusterState::canonicalize() {
  const int k_count = num_clusters();
  std::vector<int> new_id(k_count, -1);
  int next = 0;
  for (int label : labels_) {
    if (label >= 0 && new_id[label] < 0) new_id[label] = next++;
  }
  for (int k = 0; k < k_count; ++k) {
    if (new_id[k] < 0) new_id[k] = next++;
  }
  bool identity = true;
  for (int k = 0; k < k_count; ++k) identity = identity && new_id[k] == k;
  if (identity) return;

  std::vector<std::vector<int>> members(k_count);
  std::vector<Block> within(k_count);
  std::vector<Block> between(between_.size());
  for (int k = 0; k < k_count; ++k) {
    members[new_id[k]] = std::move(members_[k]);
    within[new_id[k]] = within_[k];
    for (int t = 0; t < k_count; ++t) {
      between[slot(new_id[k], new_id[t])] = between_[slot(k, t)];
    }
  }
  members_ = std::move(members);
  within_ = std::move(within);
  between_ = std::move(between);
  for (int& label : labels_) {
    if (label >= 0) label = new_id[label];
  }
}

Partition ClusterState::to_partition() const { return Partition::from_labels(labels_); }

SuffStats ClusterState::stats() const {
  SuffStats s;
  const int k_count = num_clusters();
  s.num_clusters = k_count;
  s.within = within_;
  s.between.resize(static_cast<std::size_t>(k_count) * k_count);
  for (int k = 0; k < k_count; ++k) {
    for (int t = 0; t < k_count; ++t) s.between[static_cast<std::size_t>(k) * k_count + t] = between_[slot(k, t)];
  }
  return s;
}

}  // namespace bdc
