// Apache License, Version 2.0, refer to LICENSE.txt

#include <cmath>

#include "bdc/metrics.hpp"
#include "bdc/summarize.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bdc;

namespace {

Partition P(std::vector<int> labels) { return Partition::from_labels(labels); }

}  // namespace

TEST_CASE("co-clustering") {
  const std::vector<Partition> same(3, P({0, 0, 1}));
  const auto s = coclustering_matrix(same);
  CHECK(s(0, 1) == 1.0);
  CHECK(s(0, 2) == 0.0);
  CHECK(s(2, 2) == 1.0);
  const std::vector<Partition> two{P({0, 0, 1}), P({0, 1, 1})};
  CHECK(coclustering_matrix(two)(0, 1) == 0.5);
  CHECK_THROWS_AS(coclustering_matrix(std::vector<Partition>{}), ValidationError);
}

TEST_CASE("co-clustering ignores per-draw relabeling") {
  const std::vector<Partition> a{P({0, 0, 1, 2}), P({0, 1, 1, 0})};
  const std::vector<Partition> b{P({5, 5, 2, 9}), P({3, 1, 1, 3})};
  CHECK(coclustering_matrix(a).values == coclustering_matrix(b).values);
}

TEST_CASE("identical draws give that partition with zero loss") {
  const std::vector<Partition> draws(5, P({0, 1, 0, 2}));
  for (Loss loss : {Loss::Binder, Loss::VI}) {
    const auto est = point_estimate(draws, loss);
    CHECK(est.partition == draws[0]);
    CHECK(est.expected_loss == 0.0);
  }
}

TEST_CASE("closed-form Binder loss equals the average pairwise disagreement") {
  const std::vector<Partition> draws{P({0, 0, 0, 1, 1}), P({0, 1, 1, 1, 2}),
                                     P({0, 0, 0, 1, 1}), P({0, 1, 1, 1, 2})};
  const auto s = coclustering_matrix(draws);
  const auto est = point_estimate(draws, Loss::Binder);
  double direct = 0.0;
  for (const auto& rho : draws) direct += binder_loss(est.partition, rho);
  direct /= draws.size();
  CHECK(std::abs(est.expected_loss - direct) <= 1e-12);
  CHECK(std::abs(expected_binder_loss(est.partition, s) - direct) <= 1e-12);
}

TEST_CASE("point estimate is no worse than any sampled partition") {
  Rng rng(1);
  std::vector<Partition> draws;
  const Partition base = P({0, 0, 0, 1, 1, 1, 2, 2});
  for (int t = 0; t < 60; ++t) {
    std::vector<int> labels = base.labels();
    for (int& x : labels) {
      if (rng.uniform() < 0.15) x = rng.uniform_int(4);
    }
    draws.push_back(P(labels));
  }
  const auto s = coclustering_matrix(draws);
  const auto b = point_estimate(draws, Loss::Binder);
  const auto v = point_estimate(draws, Loss::VI);
  for (const auto& rho : draws) {
    CHECK(b.expected_loss <= expected_binder_loss(rho, s) + 1e-12);
    CHECK(v.expected_loss <= expected_vi_loss(rho, draws) + 1e-12);
  }
  CHECK(b.expected_loss <= b.best_sampled_loss);
  CHECK(v.expected_loss <= v.best_sampled_loss);
  CHECK(v.expected_loss == doctest::Approx(expected_vi_loss(v.partition, draws)).epsilon(1e-12));
}

TEST_CASE("greedy refinement can leave the sampled set") {
  // Each draw misplaces a different item; the majority partition is never sampled.
  const std::vector<Partition> draws{P({0, 0, 0, 1, 1, 0}), P({1, 0, 0, 1, 1, 1}),
                                     P({0, 1, 0, 1, 1, 1}), P({0, 0, 1, 1, 1, 1})};
  const auto est = point_estimate(draws, Loss::Binder);
  CHECK(est.partition == P({0, 0, 0, 1, 1, 1}));
  CHECK(est.expected_loss < est.best_sampled_loss);
}

TEST_CASE("K posterior") {
  const std::vector<Partition> all3(4, P({0, 1, 2}));
  const auto h = k_posterior(all3);
  CHECK(h[3] == 1.0);
  const std::vector<Partition> mix{P({0, 1, 2}), P({0, 0, 1}), P({0, 0, 0}), P({0, 0, 1})};
  const auto m = k_posterior(mix);
  double total = 0.0;
  for (double x : m) total += x;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m[2] == 0.5);
}

TEST_CASE("ESS") {
  Rng rng(2);
  std::vector<double> iid(10000);
  for (double& x : iid) x = rng.normal();
  const double e = ess(iid);
  CHECK(e >= 8000.0);
  CHECK(e <= 12000.0);

  std::vector<double> ar(100000);
  double x = 0.0;
  for (double& v : ar) {
    x = 0.9 * x + rng.normal();
    v = x;
  }
  const double want = ar.size() * (1.0 - 0.9) / (1.0 + 0.9);
  CHECK(ess(ar) == doctest::Approx(want).epsilon(0.25));

  CHECK(ess(std::vector<double>(20, 3.0)) == 0.0);
  CHECK_THROWS_AS(ess(std::vector<double>(9, 1.0)), ValidationError);
}
