// Apache License, Version 2.0, refer to LICENSE.txt

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>
#include <map>

#include "bdc/prior_esc.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bdc;

namespace {

// P(E_n) by the renewal recursion q_n = sum_m nu(m) q_{n-m}.
double renewal_prob(int n, double r, double p) {
  std::vector<double> q(n + 1, 0.0);
  q[0] = 1.0;
  for (int t = 1; t <= n; ++t) {
    for (int m = 1; m <= t; ++m) q[t] += std::exp(nu_logpmf(m, r, p)) * q[t - m];
  }
  return q[n];
}

// U(a, b, z) for non-integer b from Kummer's M.
double tricomi_from_kummer(double a, double b, double z) {
  using boost::math::hypergeometric_1F1;
  return std::tgamma(1.0 - b) / std::tgamma(a - b + 1.0) * hypergeometric_1F1(a, b, z) +
         std::tgamma(b - 1.0) / std::tgamma(a) * std::pow(z, 1.0 - b) *
             hypergeometric_1F1(a - b + 1.0, 2.0 - b, z);
}

}  // namespace

TEST_CASE("nu is a shifted negative binomial") {
  const double r = 2.5, p = 0.4;
  double total = 0.0, mean = 0.0;
  for (int m = 1; m < 400; ++m) {
    const double w = std::exp(nu_logpmf(m, r, p));
    total += w;
    mean += m * w;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(1.0 + r * p / (1.0 - p)).epsilon(1e-12));
  CHECK(std::exp(nu_logpmf(1, r, p)) == doctest::Approx(std::pow(1.0 - p, r)));
  for (int m = 1; m < 20; ++m) {
    CHECK(nu_ratio(m, r, p) ==
          doctest::Approx(std::exp(nu_logpmf(m + 1, r, p) - nu_logpmf(m, r, p))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(nu_logpmf(0, r, p), ValidationError);
  CHECK_THROWS_AS(nu_logpmf(1, r, 1.0), ValidationError);
}

TEST_CASE("P(E_n) matches the renewal recursion") {
  for (double r : {0.3, 1.0, 4.0}) {
    for (double p : {0.1, 0.5, 0.9}) {
      for (int n : {1, 2, 7, 30}) {
        CHECK(prob_En(n, r, p) == doctest::Approx(renewal_prob(n, r, p)).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("conditional EPPF is normalized and gives the K law") {
  const int n = 7;
  const auto parts = testing::all_partitions(n);
  REQUIRE(parts.size() == 877);
  for (double r : {0.5, 2.0}) {
    for (double p : {0.3, 0.8}) {
      double total = 0.0;
      std::vector<double> by_k(n + 1, 0.0);
      for (const auto& rho : parts) {
        const double w = std::exp(eppf_conditional_log(rho, r, p));
        total += w;
        by_k[rho.num_clusters()] += w;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      const KDistribution kd = k_conditional_pmf(n, r, p);
      for (int k = 1; k <= n; ++k) CHECK(kd(k) == doctest::Approx(by_k[k]).epsilon(1e-11));
    }
  }
}

TEST_CASE("EPPF is symmetric in cluster order") {
  const std::vector<int> a{3, 1, 2}, b{1, 2, 3};
  CHECK(eppf_conditional_log(a, 1.3, 0.4) == doctest::Approx(eppf_conditional_log(b, 1.3, 0.4)));
}

TEST_CASE("allocation weights are EPPF ratios") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + rng.uniform_int(10);
    const Partition rho = testing::random_partition(n, 4, rng);
    const double r = 0.2 + 3.0 * rng.uniform(), p = 0.05 + 0.9 * rng.uniform();
    const auto w = allocation_prior_logweights(rho.sizes(), r, p);
    std::vector<int> sizes = rho.sizes();
    std::vector<double> joint;
    for (std::size_t c = 0; c <= sizes.size(); ++c) {
      std::vector<int> grown = sizes;
      if (c == sizes.size()) grown.push_back(1);
      else ++grown[c];
      joint.push_back(eppf_log_unnormalized(grown, r, p));
    }
    for (std::size_t c = 1; c < joint.size(); ++c) {
      CHECK(w[c] - w[0] == doctest::Approx(joint[c] - joint[0]).epsilon(1e-11));
    }
  }
}

TEST_CASE("Tricomi U") {
  CHECK(tricomi_u(1.0, 1.0, 1.0) == doctest::Approx(0.5963473623231940).epsilon(1e-10));
  for (double a : {0.3, 1.0, 2.7}) {
    for (double z : {0.05, 1.0, 12.0}) {
      CHECK(tricomi_u(a, a + 1.0, z) == doctest::Approx(std::pow(z, -a)).epsilon(1e-8));
    }
  }
  for (double a : {0.4, 1.5, 3.0}) {
    for (double b : {-1.3, 0.5, 2.5}) {
      for (double z : {0.3, 2.0, 7.0}) {
        CHECK(tricomi_u(a, b, z) == doctest::Approx(tricomi_from_kummer(a, b, z)).epsilon(1e-8));
      }
    }
  }
  // Large z: asymptotic series z^-a sum_k (a)_k (a-b+1)_k / k! (-z)^-k.
  const double a = 2.0, b = 0.5, z = 400.0;
  double term = 1.0, series = 1.0;
  for (int k = 0; k < 8; ++k) {
    term *= -(a + k) * (a - b + 1.0 + k) / ((k + 1.0) * z);
    series += term;
  }
  CHECK(log_tricomi_u(a, b, z) == doctest::Approx(-a * std::log(z) + std::log(series)).epsilon(1e-10));
}

TEST_CASE("exact K marginal under uniform p equals the r-integral of the Beta-averaged numerator") {
  // With p ~ U(0,1), E_p[NegBin(m; rK, p)] = C(rK+m-1, m) B(m+1, rK+1)
  // = rK / ((rK+m)(rK+m+1)); the K law is E_r of that, normalized.
  const int n = 9;
  ESCParams esc;
  esc.eta = 1.7;
  esc.sigma = 0.8;
  esc.u = esc.v = 1.0;
  const KDistribution kd = k_marginal_pmf(n, esc);
  CHECK(kd.exact);
  std::vector<double> want(n + 1, 0.0);
  double total = 0.0;
  boost::math::quadrature::exp_sinh<double> integrator;
  for (int k = 1; k <= n; ++k) {
    const double m = n - k;
    want[k] = integrator.integrate([&](double r) {
      if (!(r > 0.0)) return 0.0;
      const double prior = std::exp(esc.eta * std::log(esc.sigma) - std::lgamma(esc.eta) +
                                    (esc.eta - 1.0) * std::log(r) - esc.sigma * r);
      const double rk = r * k;
      return prior * rk / ((rk + m) * (rk + m + 1.0));
    });
    total += want[k];
  }
  for (int k = 1; k <= n; ++k) CHECK(kd(k) == doctest::Approx(want[k] / total).epsilon(1e-8));
}

TEST_CASE("general (u, v) K marginal is a normalized approximation") {
  ESCParams esc;
  esc.eta = 2.0;
  esc.sigma = 1.0;
  esc.u = 2.0;
  esc.v = 3.0;
  const KDistribution kd = k_marginal_pmf(30, esc);
  CHECK_FALSE(kd.exact);
  double total = 0.0;
  for (double x : kd.probs) {
    CHECK(x >= 0.0);
    total += x;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  esc.eta = 0.5;  // eta <= u: K = n term by quadrature
  const KDistribution low = k_marginal_pmf(30, esc);
  CHECK(std::isfinite(low(30)));
}

TEST_CASE("prior partition sampler matches the EPPF") {
  const int n = 4;
  const double r = 1.5, p = 0.45;
  Rng rng(21);
  std::map<std::vector<int>, double> freq;
  const int reps = 40000;
  for (int t = 0; t < reps; ++t) freq[sample_partition_prior(n, r, p, rng).labels()] += 1.0 / reps;
  double tv = 0.0;
  for (const auto& rho : testing::all_partitions(n)) {
    tv += std::abs(freq[rho.labels()] - std::exp(eppf_conditional_log(rho, r, p)));
  }
  CHECK(0.5 * tv < 0.02);
}

TEST_CASE("nu sampler matches its pmf") {
  Rng rng(22);
  const double r = 2.0, p = 0.6;
  std::vector<double> freq(60, 0.0);
  const int reps = 50000;
  for (int t = 0; t < reps; ++t) {
    const int m = sample_nu(r, p, rng);
    if (m < 60) freq[m] += 1.0 / reps;
  }
  std::vector<double> want(60, 0.0);
  for (int m = 1; m < 60; ++m) want[m] = std::exp(nu_logpmf(m, r, p));
  CHECK(testing::total_variation(freq, want) < 0.02);
}
