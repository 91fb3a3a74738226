// Apache License, Version 2.0, refer to LICENSE.txt

#include <cmath>
#include <map>

#include "bdc/metrics.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bdc;

namespace {

Partition P(std::vector<int> labels) { return Partition::from_labels(labels); }

// Pair counting straight over all i < j.
struct Pairs {
  double both = 0, only_a = 0, only_b = 0, neither = 0;
};

Pairs count_pairs(const Partition& a, const Partition& b) {
  Pairs out;
  for (int i = 0; i < a.size(); ++i) {
    for (int j = i + 1; j < a.size(); ++j) {
      const bool sa = a.label(i) == a.label(j), sb = b.label(i) == b.label(j);
      if (sa && sb) ++out.both;
      else if (sa) ++out.only_a;
      else if (sb) ++out.only_b;
      else ++out.neither;
    }
  }
  return out;
}

double brute_binder(const Partition& a, const Partition& b) {
  const Pairs c = count_pairs(a, b);
  const double total = c.both + c.only_a + c.only_b + c.neither;
  return (c.only_a + c.only_b) / total;
}

double brute_ari(const Partition& a, const Partition& b) {
  const Pairs c = count_pairs(a, b);
  const double total = c.both + c.only_a + c.only_b + c.neither;
  const double pa = c.both + c.only_a, pb = c.both + c.only_b;
  const double expected = pa * pb / total;
  return (c.both - expected) / (0.5 * (pa + pb) - expected);
}

// Entropies from item-level counts in a map.
void brute_entropies(const Partition& a, const Partition& b, double& ha, double& hb, double& mi) {
  const double n = a.size();
  std::map<int, int> fa, fb;
  std::map<std::pair<int, int>, int> fab;
  for (int i = 0; i < a.size(); ++i) {
    ++fa[a.label(i)];
    ++fb[b.label(i)];
    ++fab[{a.label(i), b.label(i)}];
  }
  ha = hb = mi = 0.0;
  for (auto [k, c] : fa) ha -= c / n * std::log(c / n);
  for (auto [k, c] : fb) hb -= c / n * std::log(c / n);
  for (auto [kk, c] : fab) mi += c / n * std::log(c * n / (double(fa[kk.first]) * fb[kk.second]));
}

}  // namespace

TEST_CASE("hand values") {
  const auto a = P({0, 0, 1}), b = P({0, 1, 1});
  CHECK(binder_loss(a, b) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(ari(a, b) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(binder_loss(a, a) == 0.0);
  CHECK(ari(a, a) == 1.0);
  CHECK(vi_distance(a, a) == 0.0);
  CHECK(vi_distance(P({0, 0}), P({0, 1})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(vi_distance(P({0, 0}), P({0, 1}), true) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(nmi(P({0, 0, 1, 1}), P({0, 1, 0, 1})) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(nmi(P({0, 0, 1, 1}), P({3, 3, 5, 5})) == 1.0);
}

TEST_CASE("degenerate cases") {
  CHECK(nmi(P({0, 0, 0}), P({1, 1, 1})) == 1.0);
  CHECK(nmi(P({0, 0, 0}), P({0, 1, 1})) == 0.0);
  CHECK_THROWS_AS(binder_loss(P({0, 1}), P({0, 1, 2})), ValidationError);
  CHECK_THROWS_AS(vi_distance(P({0}), P({0}), true), ValidationError);
}

TEST_CASE("metrics match brute-force oracles on random pairs") {
  Rng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + rng.uniform_int(49);
    const auto a = testing::random_partition(n, 6, rng);
    const auto b = testing::random_partition(n, 6, rng);
    CHECK(std::abs(binder_loss(a, b) - brute_binder(a, b)) <= 1e-12);
    CHECK(std::abs(binder_loss(a, b) - (1.0 - (count_pairs(a, b).both + count_pairs(a, b).neither) /
                                                  (0.5 * n * (n - 1.0)))) <= 1e-12);
    if (a.num_clusters() > 1 || b.num_clusters() > 1) {
      const Pairs c = count_pairs(a, b);
      const double pa = c.both + c.only_a, pb = c.both + c.only_b;
      const double total = 0.5 * n * (n - 1.0);
      if (0.5 * (pa + pb) != pa * pb / total) CHECK(std::abs(ari(a, b) - brute_ari(a, b)) <= 1e-12);
    }
    double ha, hb, mi;
    brute_entropies(a, b, ha, hb, mi);
    CHECK(std::abs(vi_distance(a, b) - (ha + hb - 2.0 * mi)) <= 1e-12);
    if (ha > 0 && hb > 0) CHECK(std::abs(nmi(a, b) - mi / std::sqrt(ha * hb)) <= 1e-12);
  }
}

TEST_CASE("VI is a metric") {
  Rng rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + rng.uniform_int(30);
    const auto a = testing::random_partition(n, 5, rng);
    const auto b = testing::random_partition(n, 5, rng);
    const auto c = testing::random_partition(n, 5, rng);
    CHECK(vi_distance(a, c) <= vi_distance(a, b) + vi_distance(b, c) + 1e-12);
    CHECK(vi_distance(a, b) == doctest::Approx(vi_distance(b, a)).epsilon(1e-14));
    const double nvi = vi_distance(a, b, true);
    CHECK(nvi >= 0.0);
    CHECK(nvi <= 1.0 + 1e-12);
  }
}

TEST_CASE("metrics are invariant to item and label permutation") {
  Rng rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 3 + rng.uniform_int(20);
    const auto a = testing::random_partition(n, 4, rng);
    const auto b = testing::random_partition(n, 4, rng);
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(std::span<int>(perm));
    std::vector<int> la(n), lb(n);
    for (int i = 0; i < n; ++i) {
      la[i] = 10 - a.label(perm[i]);
      lb[i] = 3 * b.label(perm[i]) + 7;
    }
    const auto pa = P(la), pb = P(lb);
    CHECK(binder_loss(pa, pb) == doctest::Approx(binder_loss(a, b)).epsilon(1e-13));
    CHECK(vi_distance(pa, pb) == doctest::Approx(vi_distance(a, b)).epsilon(1e-12));
    CHECK(ari(pa, pb) == doctest::Approx(ari(a, b)).epsilon(1e-12));
    CHECK(nmi(pa, pb) == doctest::Approx(nmi(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("contingency table margins") {
  const auto t = contingency_table(P({0, 0, 1, 2}), P({0, 1, 1, 1}));
  CHECK(t.rows == 3);
  CHECK(t.cols == 2);
  CHECK(t.at(0, 0) == 1);
  CHECK(t.at(0, 1) == 1);
  CHECK(t.row_sums == std::vector<std::int64_t>{2, 1, 1});
  CHECK(t.col_sums == std::vector<std::int64_t>{1, 3});
}
