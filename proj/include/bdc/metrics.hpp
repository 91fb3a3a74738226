// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <vector>

#include "bdc/core.hpp"

namespace bdc {

struct ContingencyTable {
  int n = 0;
  int rows = 0;
  int cols = 0;
  std::vector<std::int64_t> counts;  // rows x cols, row-major
  std::vector<std::int64_t> row_sums;
  std::vector<std::int64_t> col_sums;

  std::int64_t at(int i, int j) const { return counts[static_cast<std::size_t>(i) * cols + j]; }
};

// Throws ValidationError on a length mismatch.
ContingencyTable contingency_table(const Partition& a, const Partition& b);

// Pairwise co-clustering disagreements over C(n, 2); 0 when n < 2.
double binder_loss(const Partition& a, const Partition& b);
// Variation of information in nats; normalized divides by log n (n >= 2).
double vi_distance(const Partition& a, const Partition& b, bool normalized = false);
double ari(const Partition& a, const Partition& b);
// I / sqrt(H_a H_b). Two single-cluster partitions give 1 with a warning.
double nmi(const Partition& a, const Partition& b);

}  // namespace bdc
