// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bdc/core.hpp"
#include "bdc/random.hpp"

namespace bdc {

// Dense row-major n x l matrix of observations.
struct DataMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  DataMatrix() = default;
  DataMatrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)};
  }
};

struct SyntheticSettings {
  int n = 100;
  int dim = 2;
  int k = 3;
  double separation = 8.0;
  double sigma = 1.0;
  std::uint64_t seed = 1;
};

struct SyntheticDataset {
  DataMatrix data;
  Partition truth;
  DataMatrix centers;
  SyntheticSettings settings;
};

// Centers uniform on the sphere of radius separation * sigma * sqrt(dim);
// cluster sizes differ by at most one and items are laid out cluster by
// cluster; y_i ~ N(center, sigma^2 I).
SyntheticDataset generate_gaussian_mixture(const SyntheticSettings& settings);

// Pairwise (squared) Euclidean distances, validated like any other input so
// duplicate rows are reported as zero off-diagonal entries.
DissimilarityMatrix euclidean_distances(const DataMatrix& data, bool squared,
                                        const ValidateOptions& options = {});

struct ClusteringResult {
  Partition labels;
  // k-means: within-cluster sum of squares. k-medoids: sum of distances to
  // the assigned medoid.
  double objective = 0.0;
  std::vector<int> medoids;  // k-medoids only
};

// Lloyd iterations from k-means++ seeds, best of `restarts`.
ClusteringResult kmeans(const DataMatrix& data, int k, Rng& rng, int restarts = 10);

// Deterministic PAM: greedy BUILD then best-improvement SWAP (FastPAM1
// bookkeeping). Starts from `initial` medoids when given.
ClusteringResult kmedoids(const DissimilarityMatrix& d, int k, std::span<const int> initial = {});

// Objective for K = 1..k_max. Each K also tries the K-1 solution plus one
// split, so the curve is nonincreasing.
std::vector<double> wss_curve(const DataMatrix& data, int k_max, Rng& rng);
std::vector<double> wss_curve(const DissimilarityMatrix& d, int k_max);

}  // namespace bdc
