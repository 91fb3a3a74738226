// Apache License, Version 2.0, refer to LICENSE.txt

#include "bdc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bdc/kernels.hpp"

namespace bdc {

namespace {

struct Lloyd {
  std::vector<int> labels;
  DataMatrix centers;
  double wss = 0.0;
};

double nearest(const DataMatrix& data, const DataMatrix& centers, int i, int* which) {
  double best = std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int c = 0; c < centers.rows; ++c) {
    const double dist = kernels::squared_distance(data.row(i), centers.row(c));
    if (dist < best) {
      best = dist;
      arg = c;
    }
  }
  if (which != nullptr) *which = arg;
  return best;
}

// Assign/update until assignments settle. An emptied cluster keeps its old
// center, so the objective never increases.
Lloyd run_lloyd(const DataMatrix& data, DataMatrix centers) {
  const int n = data.rows;
  const int k = centers.rows;
  const int dim = data.cols;
  Lloyd out;
  out.labels.assign(n, -1);
  std::vector<int> counts(k);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int c;
      nearest(data, centers, i, &c);
      if (c != out.labels[i]) {
        out.labels[i] = c;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    DataMatrix sums(k, dim);
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      const int c = out.labels[i];
      ++counts[c];
      for (int j = 0; j < dim; ++j) sums(c, j) += data(i, j);
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (int j = 0; j < dim; ++j) centers(c, j) = sums(c, j) / counts[c];
    }
  }
  out.wss = 0.0;
  for (int i = 0; i < n; ++i) {
    out.wss += kernels::squared_distance(data.row(i), centers.row(out.labels[i]));
  }
  out.centers = std::move(centers);
  return out;
}

DataMatrix kmeanspp_seeds(const DataMatrix& data, int k, Rng& rng) {
  const int n = data.rows;
  DataMatrix centers(k, data.cols);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(n, 0);
  int pick = rng.uniform_int(n);
  for (int c = 0; c < k; ++c) {
    chosen[pick] = 1;
    std::copy(data.row(pick).begin(), data.row(pick).end(), centers.values.begin() + c * data.cols);
    if (c + 1 == k) break;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], kernels::squared_distance(data.row(i), data.row(pick)));
      if (!chosen[i]) total += dist[i];
    }
    pick = -1;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (int i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        target -= dist[i];
        pick = i;
        if (target < 0.0) break;
      }
    }
    if (pick < 0) {
      // Only duplicates of chosen points remain.
      for (int i = 0; i < n && pick < 0; ++i) {
        if (!chosen[i]) pick = i;
      }
    }
  }
  return centers;
}

void check_k(int k, int n) {
  if (k < 1 || k > n) {
    throw ValidationError("clustering: K must lie in [1, n] (K=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");
  }
}

ClusteringResult to_result(const Lloyd& fit) {
  return ClusteringResult{Partition::from_labels(fit.labels), fit.wss, {}};
}

}  // namespace

SyntheticDataset generate_gaussian_mixture(const SyntheticSettings& s) {
  if (s.n < 1 || s.dim < 1 || s.k < 1 || s.k > s.n) {
    throw ValidationError("generate: need n >= 1, dim >= 1 and 1 <= K <= n");
  }
  if (!(s.sigma > 0.0) || !(s.separation >= 0.0)) {
    throw ValidationError("generate: sigma must be positive and separation nonnegative");
  }
  Rng rng(s.seed);
  SyntheticDataset out;
  out.settings = s;
  out.centers = DataMatrix(s.k, s.dim);
  const double radius = s.separation * s.sigma * std::sqrt(static_cast<double>(s.dim));
  for (int c = 0; c < s.k; ++c) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (int j = 0; j < s.dim; ++j) {
        out.centers(c, j) = rng.normal();
        norm2 += out.centers(c, j) * out.centers(c, j);
      }
    } while (norm2 == 0.0);
    const double scale = radius / std::sqrt(norm2);
    for (int j = 0; j < s.dim; ++j) out.centers(c, j) *= scale;
  }
  std::vector<int> labels;
  labels.reserve(s.n);
  for (int c = 0; c < s.k; ++c) {
    const int size = s.n / s.k + (c < s.n % s.k ? 1 : 0);
    labels.insert(labels.end(), size, c);
  }
  out.data = DataMatrix(s.n, s.dim);
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.dim; ++j) out.data(i, j) = out.centers(labels[i], j) + s.sigma * rng.normal();
  }
  out.truth = Partition::from_labels(labels);
  return out;
}

DissimilarityMatrix euclidean_distances(const DataMatrix& data, bool squared,
                                        const ValidateOptions& options) {
  const int n = data.rows;
  if (n < 2) throw ValidationError("distances: need at least 2 observations");
  std::vector<std::vector<double>> raw(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double sq = kernels::squared_distance(data.row(i), data.row(j));
      raw[i][j] = raw[j][i] = squared ? sq : std::sqrt(sq);
    }
  }
  return validate_dissimilarity(raw, options);
}

ClusteringResult kmeans(const DataMatrix& data, int k, Rng& rng, int restarts) {
  check_k(k, data.rows);
  Lloyd best;
  best.wss = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < std::max(1, restarts); ++rep) {
    Lloyd fit = run_lloyd(data, kmeanspp_seeds(data, k, rng));
    if (fit.wss < best.wss) best = std::move(fit);
  }
  return to_result(best);
}

ClusteringResult kmedoids(const DissimilarityMatrix& d, int k, std::span<const int> initial) {
  const int n = d.size();
  check_k(k, n);
  if (static_cast<int>(initial.size()) > k) throw ValidationError("kmedoids: too many initial medoids");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<int> medoids(initial.begin(), initial.end());
  std::vector<char> is_medoid(n, 0);
  for (int m : medoids) {
    if (m < 0 || m >= n || is_medoid[m]) throw ValidationError("kmedoids: invalid initial medoids");
    is_medoid[m] = 1;
  }
  std::vector<double> dnear(n, inf);
  for (int m : medoids) {
    for (int i = 0; i < n; ++i) dnear[i] = std::min(dnear[i], d(i, m));
  }

  // BUILD: add the medoid with the largest objective reduction.
  while (static_cast<int>(medoids.size()) < k) {
    int best = -1;
    double best_total = inf;
    for (int h = 0; h < n; ++h) {
      if (is_medoid[h]) continue;
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += std::min(dnear[i], d(i, h));
      if (total < best_total) {
        best_total = total;
        best = h;
      }
    }
    medoids.push_back(best);
    is_medoid[best] = 1;
    for (int i = 0; i < n; ++i) dnear[i] = std::min(dnear[i], d(i, best));
  }

  // SWAP.
  std::vector<int> near(n);
  std::vector<double> dsecond(n);
  std::vector<double> removal(k);
  std::vector<double> delta(k);
  auto refresh = [&] {
    for (int i = 0; i < n; ++i) {
      double first = inf, second = inf;
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        const double x = d(i, medoids[c]);
        if (x < first) {
          second = first;
          first = x;
          arg = c;
        } else if (x < second) {
          second = x;
        }
      }
      near[i] = arg;
      dnear[i] = first;
      dsecond[i] = second;
    }
  };
  refresh();
  for (int pass = 0; pass < 1000 && k < n; ++pass) {
    std::fill(removal.begin(), removal.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      if (k > 1) removal[near[i]] += dsecond[i] - dnear[i];
    }
    double best_change = 0.0;
    int best_c = -1, best_h = -1;
    for (int h = 0; h < n; ++h) {
      if (is_medoid[h]) continue;
      delta = removal;
      double shared = 0.0;
      for (int i = 0; i < n; ++i) {
        const double x = d(i, h);
        if (x < dnear[i]) {
          shared += x - dnear[i];
          delta[near[i]] += dnear[i] - (k > 1 ? dsecond[i] : dnear[i]);
        } else if (k > 1 && x < dsecond[i]) {
          delta[near[i]] += x - dsecond[i];
        } else if (k == 1) {
          delta[near[i]] += x - dnear[i];
        }
      }
      for (int c = 0; c < k; ++c) {
        const double change = delta[c] + shared;
        if (change < best_change - 1e-12 * (1.0 + std::abs(best_change))) {
          best_change = change;
          best_c = c;
          best_h = h;
        }
      }
    }
    if (best_c < 0) break;
    is_medoid[medoids[best_c]] = 0;
    medoids[best_c] = best_h;
    is_medoid[best_h] = 1;
    refresh();
  }

  ClusteringResult out;
  std::vector<int> labels(n);
  out.objective = 0.0;
  for (int i = 0; i < n; ++i) {
    labels[i] = near[i];
    out.objective += dnear[i];
  }
  out.labels = Partition::from_labels(labels);
  out.medoids = medoids;
  return out;
}

std::vector<double> wss_curve(const DataMatrix& data, int k_max, Rng& rng) {
  check_k(k_max, data.rows);
  std::vector<double> curve;
  Lloyd previous;
  for (int k = 1; k <= k_max; ++k) {
    ClusteringResult fresh = kmeans(data, k, rng);
    Lloyd best;
    best.wss = fresh.objective;
    if (k == 1) {
      best = run_lloyd(data, kmeanspp_seeds(data, 1, rng));
    } else {
      // Split: open a center at the point farthest from its own center.
      DataMatrix seeds(k, data.cols);
      std::copy(previous.centers.values.begin(), previous.centers.values.end(), seeds.values.begin());
      int far = 0;
      double far_dist = -1.0;
      for (int i = 0; i < data.rows; ++i) {
        const double x = kernels::squared_distance(data.row(i), previous.centers.row(previous.labels[i]));
        if (x > far_dist) {
          far_dist = x;
          far = i;
        }
      }
      std::copy(data.row(far).begin(), data.row(far).end(), seeds.values.begin() + (k - 1) * data.cols);
      Lloyd split = run_lloyd(data, std::move(seeds));
      if (fresh.objective < split.wss) {
        // Rebuild centers for the fresh labels so the next split has them.
        DataMatrix centers(k, data.cols);
        std::vector<int> counts(k, 0);
        for (int i = 0; i < data.rows; ++i) {
          const int c = fresh.labels.label(i);
          ++counts[c];
          for (int j = 0; j < data.cols; ++j) centers(c, j) += data(i, j);
        }
        for (int c = 0; c < k; ++c) {
          if (counts[c] == 0) continue;
          for (int j = 0; j < data.cols; ++j) centers(c, j) /= counts[c];
        }
        best.labels = fresh.labels.labels();
        best.centers = std::move(centers);
      } else {
        best = std::move(split);
      }
    }
    curve.push_back(best.wss);
    previous = std::move(best);
  }
  return curve;
}

std::vector<double> wss_curve(const DissimilarityMatrix& d, int k_max) {
  check_k(k_max, d.size());
  std::vector<double> curve;
  std::vector<int> medoids;
  for (int k = 1; k <= k_max; ++k) {
    const ClusteringResult fit = kmedoids(d, k, medoids);
    curve.push_back(fit.objective);
    medoids = fit.medoids;
  }
  return curve;
}

}  // namespace bdc
