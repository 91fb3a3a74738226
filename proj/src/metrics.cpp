// Apache License, Version 2.0, refer to LICENSE.txt

#include "bdc/metrics.hpp"

#include <cmath>
#include <string>

namespace bdc {

namespace {

double choose2(std::int64_t x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

double plogp_sum(const std::vector<std::int64_t>& counts, double n) {
  double h = 0.0;
  for (std::int64_t c : counts) {
    if (c > 0) {
      const double q = static_cast<double>(c) / n;
      h -= q * std::log(q);
    }
  }
  return h;
}

struct Entropies {
  double ha = 0.0;
  double hb = 0.0;
  double mutual = 0.0;
};

Entropies entropies(const ContingencyTable& t) {
  const double n = t.n;
  Entropies e;
  e.ha = plogp_sum(t.row_sums, n);
  e.hb = plogp_sum(t.col_sums, n);
  for (int i = 0; i < t.rows; ++i) {
    for (int j = 0; j < t.cols; ++j) {
      const std::int64_t c = t.at(i, j);
      if (c == 0) continue;
      const double cd = static_cast<double>(c);
      e.mutual += cd / n *
                  std::log(cd * n / (static_cast<double>(t.row_sums[i]) * t.col_sums[j]));
    }
  }
  return e;
}

}  // namespace

ContingencyTable contingency_table(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) {
    throw ValidationError("length mismatch: partitions have " + std::to_string(a.size()) +
                          " and " + std::to_string(b.size()) + " items");
  }
  ContingencyTable t;
  t.n = a.size();
  t.rows = a.num_clusters();
  t.cols = b.num_clusters();
  t.counts.assign(static_cast<std::size_t>(t.rows) * t.cols, 0);
  t.row_sums.assign(t.rows, 0);
  t.col_sums.assign(t.cols, 0);
  for (int i = 0; i < t.n; ++i) {
    ++t.counts[static_cast<std::size_t>(a.label(i)) * t.cols + b.label(i)];
    ++t.row_sums[a.label(i)];
    ++t.col_sums[b.label(i)];
  }
  return t;
}

double binder_loss(const Partition& a, const Partition& b) {
  const ContingencyTable t = contingency_table(a, b);
  if (t.n < 2) return 0.0;
  double both = 0.0, in_a = 0.0, in_b = 0.0;
  for (std::int64_t c : t.counts) both += choose2(c);
  for (std::int64_t c : t.row_sums) in_a += choose2(c);
  for (std::int64_t c : t.col_sums) in_b += choose2(c);
  return (in_a + in_b - 2.0 * both) / choose2(t.n);
}

double vi_distance(const Partition& a, const Partition& b, bool normalized) {
  const ContingencyTable t = contingency_table(a, b);
  if (normalized && t.n < 2) throw ValidationError("normalized VI needs n >= 2");
  if (t.n == 0 || a == b) return 0.0;
  const Entropies e = entropies(t);
  const double vi = std::max(0.0, e.ha + e.hb - 2.0 * e.mutual);
  return normalized ? vi / std::log(static_cast<double>(t.n)) : vi;
}

double ari(const Partition& a, const Partition& b) {
  const ContingencyTable t = contingency_table(a, b);
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (std::int64_t c : t.counts) index += choose2(c);
  for (std::int64_t c : t.row_sums) sum_a += choose2(c);
  for (std::int64_t c : t.col_sums) sum_b += choose2(c);
  const double total = choose2(t.n);
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return a == b ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

double nmi(const Partition& a, const Partition& b) {
  const ContingencyTable t = contingency_table(a, b);
  const Entropies e = entropies(t);
  if (t.rows <= 1 && t.cols <= 1) {
    warn("nmi: both partitions have a single cluster; defined as 1");
    return 1.0;
  }
  if (e.ha == 0.0 || e.hb == 0.0) return 0.0;
  if (a == b) return 1.0;
  const double value = e.mutual / std::sqrt(e.ha * e.hb);
  return std::min(1.0, std::max(0.0, value));
}

}  // namespace bdc
