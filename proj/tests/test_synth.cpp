// Apache License, Version 2.0, refer to LICENSE.txt

#include <algorithm>
#include <cmath>

#include "bdc/elicit.hpp"
#include "bdc/synth.hpp"
#include "doctest.h"

using namespace bdc;

namespace {

// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
double ks_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double dmax = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    dmax = std::max(dmax, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * dmax;
  double p = 0.0;
  for (int k = 1; k < 200; ++k) p += 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST_CASE("generator is reproducible and lays out clusters in blocks") {
  SyntheticSettings s{50, 3, 4, 5.0, 1.0, 17};
  const auto a = generate_gaussian_mixture(s);
  const auto b = generate_gaussian_mixture(s);
  CHECK(a.data.values == b.data.values);
  CHECK(a.truth == b.truth);
  CHECK(a.truth.sizes() == std::vector<int>{13, 13, 12, 12});
  for (int c = 0; c < 4; ++c) {
    double norm2 = 0.0;
    for (int j = 0; j < 3; ++j) norm2 += a.centers(c, j) * a.centers(c, j);
    CHECK(std::sqrt(norm2) == doctest::Approx(5.0 * std::sqrt(3.0)));
  }
  CHECK_THROWS_AS(generate_gaussian_mixture(SyntheticSettings{3, 2, 4, 1.0, 1.0, 1}), ValidationError);
}

TEST_CASE("K = 1 squared distances average 2 sigma^2 l") {
  const double sigma = 1.7;
  const int dim = 6;
  const auto ds = generate_gaussian_mixture(SyntheticSettings{500, dim, 1, 3.0, sigma, 5});
  const auto d = euclidean_distances(ds.data, true);
  double mean = 0.0;
  for (int i = 0; i < 500; ++i) {
    for (int j = i + 1; j < 500; ++j) mean += d(i, j);
  }
  mean /= 500.0 * 499.0 / 2.0;
  CHECK(mean == doctest::Approx(2.0 * sigma * sigma * dim).epsilon(0.05));
}

TEST_CASE("zero separation makes within and cross distances indistinguishable") {
  const auto ds = generate_gaussian_mixture(SyntheticSettings{120, 3, 2, 0.0, 1.0, 6});
  const auto d = euclidean_distances(ds.data, false);
  // Disjoint pairs keep the samples independent.
  std::vector<double> within, cross;
  for (int i = 0; i + 1 < 60; i += 2) within.push_back(d(i, i + 1));
  for (int i = 60; i + 1 < 120; i += 2) within.push_back(d(i, i + 1));
  for (int i = 0; i < 60; ++i) cross.push_back(d(i, 60 + (i + 30) % 60));
  CHECK(ks_pvalue(within, cross) > 0.01);
}

TEST_CASE("euclidean distances") {
  DataMatrix x(2, 2);
  x(1, 0) = 3.0;
  x(1, 1) = 4.0;
  CHECK(euclidean_distances(x, false)(0, 1) == 5.0);
  CHECK(euclidean_distances(x, true)(0, 1) == 25.0);

  Rng rng(7);
  const int n = 20, dim = 5;
  DataMatrix y(n, dim);
  for (double& v : y.values) v = rng.normal();
  const auto d = euclidean_distances(y, false);
  // Naive loop.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int t = 0; t < dim; ++t) s += (y(i, t) - y(j, t)) * (y(i, t) - y(j, t));
      CHECK(d(i, j) == doctest::Approx(std::sqrt(s)).epsilon(1e-13));
    }
  }
  // Random orthogonal transform (Gram-Schmidt) plus translation.
  std::vector<std::vector<double>> q(dim, std::vector<double>(dim));
  for (int a = 0; a < dim; ++a) {
    for (double& v : q[a]) v = rng.normal();
    for (int b = 0; b < a; ++b) {
      double dot = 0.0;
      for (int t = 0; t < dim; ++t) dot += q[a][t] * q[b][t];
      for (int t = 0; t < dim; ++t) q[a][t] -= dot * q[b][t];
    }
    double norm = 0.0;
    for (double v : q[a]) norm += v * v;
    for (double& v : q[a]) v /= std::sqrt(norm);
  }
  DataMatrix z(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < dim; ++a) {
      for (int t = 0; t < dim; ++t) z(i, a) += q[a][t] * y(i, t);
      z(i, a) += 3.5 * (a + 1);
    }
  }
  const auto dz = euclidean_distances(z, false);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) CHECK(std::abs(dz(i, j) - d(i, j)) < 1e-9);
  }
  DataMatrix dup(2, 1);
  CHECK_THROWS_AS(euclidean_distances(dup, false), ValidationError);
}

TEST_CASE("kmeans") {
  DataMatrix x(4, 1);
  x(0, 0) = 0.0;
  x(1, 0) = 0.1;
  x(2, 0) = 10.0;
  x(3, 0) = 10.2;
  Rng rng(8);
  const auto two = kmeans(x, 2, rng);
  CHECK(two.labels == Partition::from_labels(std::vector<int>{0, 0, 1, 1}));
  CHECK(two.objective == doctest::Approx(0.005 + 0.02));
  CHECK(kmeans(x, 4, rng).objective == 0.0);
  CHECK_THROWS_AS(kmeans(x, 5, rng), ValidationError);
}

TEST_CASE("kmedoids") {
  const auto d = validate_dissimilarity({{0, 1, 10}, {1, 0, 9}, {10, 9, 0}});
  const auto two = kmedoids(d, 2);
  CHECK(two.labels == Partition::from_labels(std::vector<int>{0, 0, 1}));
  CHECK(two.objective == 1.0);
  CHECK(kmedoids(d, 3).objective == 0.0);
  CHECK_THROWS_AS(kmedoids(d, 4), ValidationError);

  // Swap never worsens the BUILD objective: start from the worst medoids.
  Rng rng(9);
  const auto ds = generate_gaussian_mixture(SyntheticSettings{60, 2, 3, 4.0, 1.0, 9});
  const auto dm = euclidean_distances(ds.data, false);
  const auto fit = kmedoids(dm, 3);
  const std::vector<int> bad{0, 1, 2};
  double bad_obj = 0.0;
  for (int i = 0; i < 60; ++i) bad_obj += std::min({dm(i, 0), dm(i, 1), dm(i, 2)});
  CHECK(kmedoids(dm, 3, bad).objective <= bad_obj);
  CHECK(fit.objective <= kmedoids(dm, 3, bad).objective + 1e-9);
}

TEST_CASE("objective curves") {
  // In 30 dimensions the random sphere centers are close to equidistant.
  const auto ds = generate_gaussian_mixture(SyntheticSettings{90, 30, 3, 8.0, 1.0, 10});
  Rng rng(10);
  const auto curve = wss_curve(ds.data, 8, rng);
  // K = 1: sum of squares about the grand mean.
  double total = 0.0;
  for (int j = 0; j < 30; ++j) {
    double mean = 0.0;
    for (int i = 0; i < 90; ++i) mean += ds.data(i, j);
    mean /= 90.0;
    for (int i = 0; i < 90; ++i) total += (ds.data(i, j) - mean) * (ds.data(i, j) - mean);
  }
  CHECK(curve[0] == doctest::Approx(total).epsilon(1e-12));
  for (std::size_t k = 1; k < curve.size(); ++k) CHECK(curve[k] <= curve[k - 1]);
  CHECK(elbow_k(curve) == 3);

  const auto dm = euclidean_distances(ds.data, false);
  const auto dcurve = wss_curve(dm, 8);
  for (std::size_t k = 1; k < dcurve.size(); ++k) CHECK(dcurve[k] <= dcurve[k - 1]);
  CHECK(elbow_k(dcurve) == 3);
}
