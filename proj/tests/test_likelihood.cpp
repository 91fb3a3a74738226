// Apache License, Version 2.0, refer to LICENSE.txt

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>

#include "bdc/cluster_state.hpp"
#include "bdc/likelihood.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bdc;

namespace {

// log of int_0^inf prod Gamma(d; shape, lam) Gamma(lam; a, b) dlam by
// exp-sinh quadrature around the integrand's mode.
double quadrature_block(std::int64_t m, double sum, double log_sum, double shape, double a, double b) {
  const double md = static_cast<double>(m);
  auto log_f = [&](double lam) {
    return md * (shape * std::log(lam) - std::lgamma(shape)) + (shape - 1.0) * log_sum - lam * sum +
           a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(lam) - b * lam;
  };
  const double mode = std::max((a + shape * md - 1.0) / (b + sum), 1e-300);
  const double peak = log_f(mode);
  boost::math::quadrature::exp_sinh<double> integrator;
  // Substitute lam = mode * t so the bulk sits near t = 1.
  const double value = integrator.integrate(
      [&](double t) { return t > 0.0 ? mode * std::exp(log_f(mode * t) - peak) : 0.0; }, 1e-13);
  return peak + std::log(value);
}

}  // namespace

TEST_CASE("block marginal is 0 for an empty block") {
  CHECK(gamma_block_logmarginal(0, 0.0, 0.0, 2.0, 3.0, 4.0) == 0.0);
}

TEST_CASE("block marginal matches exp-sinh quadrature") {
  Rng rng(5);
  for (int rep = 0; rep < 40; ++rep) {
    const std::int64_t m = 1 + rng.uniform_int(60);
    const double shape = 0.3 + 5.0 * rng.uniform();
    const double a = 0.5 + 10.0 * rng.uniform();
    const double b = 0.2 + 5.0 * rng.uniform();
    double sum = 0.0, log_sum = 0.0;
    for (std::int64_t k = 0; k < m; ++k) {
      const double x = 0.1 + 3.0 * rng.uniform();
      sum += x;
      log_sum += std::log(x);
    }
    const double closed = gamma_block_logmarginal(m, sum, log_sum, shape, a, b);
    const double quad = quadrature_block(m, sum, log_sum, shape, a, b);
    CHECK(std::abs(closed - quad) <= 1e-8 * std::max(1.0, std::abs(closed)));
  }
}

TEST_CASE("single pair hand value") {
  // m = 1, d = 2, shape 1, Gamma(1, 1) prior: int lam e^{-2 lam} e^{-lam} = 1/9.
  CHECK(gamma_block_logmarginal(1, 2.0, std::log(2.0), 1.0, 1.0, 1.0) ==
        doctest::Approx(std::log(1.0 / 9.0)).epsilon(1e-14));
}

TEST_CASE("repulsion off contributes nothing") {
  ModelParams p;
  p.repulsion = false;
  CHECK(repulsion_logmarginal(5, 3.0, 1.0, p) == 0.0);
  Rng rng(6);
  const auto d = testing::random_distances(9, rng);
  const Partition rho = testing::random_partition(9, 3, rng);
  const SuffStats s = suffstats_build(d, rho);
  double cohesion = 0.0;
  for (const auto& w : s.within) cohesion += cohesion_logmarginal(w.m, w.sum, w.log_sum, p);
  CHECK(log_marginal_likelihood(s, p) == doctest::Approx(cohesion).epsilon(1e-14));
}

TEST_CASE("tabulated evaluator agrees with the free functions") {
  Rng rng(7);
  ModelParams p{1.7, 2.4, 3.0, 2.0, 5.0, 1.5, true};
  const auto d = testing::random_distances(30, rng);
  const Partition rho = testing::random_partition(30, 5, rng);
  LikelihoodEvaluator lik(p, 30);
  ClusterState state(d, rho);
  CHECK(lik.total(state) == doctest::Approx(log_marginal_likelihood(d, rho, p)).epsilon(1e-12));
  LikelihoodEvaluator off(p, 30, false);
  CHECK(off.total(state) == 0.0);
}

TEST_CASE("allocation deltas equal differences of full likelihoods") {
  Rng rng(8);
  ModelParams p{1.3, 2.2, 2.0, 3.0, 4.0, 2.0, true};
  const int n = 14;
  const auto d = testing::random_distances(n, rng);
  for (int rep = 0; rep < 20; ++rep) {
    const Partition rho = testing::random_partition(n, 4, rng);
    const int i = rng.uniform_int(n);
    ClusterState state(d, rho);
    LikelihoodEvaluator lik(p, n);
    std::vector<Block> sums;
    state.row_sums(i, sums);
    state.detach(i, sums);
    const auto deltas = allocation_log_deltas(state, lik, sums);
    REQUIRE(static_cast<int>(deltas.size()) == state.num_clusters() + 1);
    std::vector<double> full;
    for (int c = 0; c <= state.num_clusters(); ++c) {
      ClusterState trial = state;
      std::vector<Block> s2 = sums;
      trial.attach(i, c, s2);
      full.push_back(log_marginal_likelihood(d, trial.to_partition(), p));
    }
    for (std::size_t c = 1; c < full.size(); ++c) {
      CHECK(deltas[c] - deltas[0] == doctest::Approx(full[c] - full[0]).epsilon(1e-9));
    }
  }
}

TEST_CASE("deltas from cached block values match the direct deltas") {
  Rng rng(9);
  const int n = 25;
  const auto d = testing::random_distances(n, rng);
  for (bool repulsion : {true, false}) {
    const ModelParams p{1.7, 2.5, 2.0, 1.5, 3.0, 2.5, repulsion};
    LikelihoodEvaluator lik(p, n);
    for (int rep = 0; rep < 20; ++rep) {
      ClusterState state(d, testing::random_partition(n, 6, rng));
      const int i = rng.uniform_int(n);
      std::vector<Block> sums;
      state.row_sums(i, sums);
      state.detach(i, sums);
      const int k = state.num_clusters();
      const int stride = k + 3;
      std::vector<double> values(static_cast<std::size_t>(stride) * stride, 0.0);
      for (int c = 0; c < k; ++c) {
        values[c * stride + c] = lik.cohesion(state.within(c));
        for (int t = 0; t < k; ++t) {
          if (t != c) values[c * stride + t] = lik.repulsion(state.pair(c, t));
        }
      }
      std::vector<int> candidates;
      for (int c = k; c >= 0; c -= 2) candidates.push_back(c);
      std::vector<double> direct(candidates.size()), cached(candidates.size());
      allocation_log_deltas(state, lik, sums, candidates, direct);
      allocation_log_deltas(state, lik, sums, candidates, cached, values, stride);
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        CHECK(cached[c] == doctest::Approx(direct[c]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("cluster rate draws follow their conjugate posteriors") {
  Rng rng(9);
  ModelParams p{1.5, 2.5, 2.0, 1.0, 3.0, 2.0, true};
  const auto d = testing::random_distances(10, rng);
  const Partition rho = Partition::from_labels(std::vector<int>{0, 0, 0, 0, 1, 1, 1, 2, 2, 2});
  const SuffStats s = suffstats_build(d, rho);
  double lam0 = 0.0, th01 = 0.0;
  const int reps = 20000;
  for (int r = 0; r < reps; ++r) {
    const ClusterRates rates = sample_cluster_rates(d, rho, p, rng);
    lam0 += rates.lambda[0];
    th01 += rates.theta[1];
    REQUIRE(rates.theta[1] == rates.theta[3]);
  }
  const double want_lam = (p.alpha + p.delta1 * s.within[0].m) / (p.beta + s.within[0].sum);
  const double want_th = (p.zeta + p.delta2 * s.pair(0, 1).m) / (p.gamma + s.pair(0, 1).sum);
  CHECK(lam0 / reps == doctest::Approx(want_lam).epsilon(0.02));
  CHECK(th01 / reps == doctest::Approx(want_th).epsilon(0.02));
}
