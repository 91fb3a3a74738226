// Apache License, Version 2.0, refer to LICENSE.txt

#include "bdc/elicit.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "bdc/mcmc.hpp"

namespace bdc {

namespace {

using boost::math::digamma;
using boost::math::trigamma;

constexpr int kMaxNewton = 200;

void check_samples(std::span<const double> xs, const char* who) {
  if (xs.size() < 2) {
    throw ValidationError(std::string(who) + ": insufficient samples (need at least 2)");
  }
  for (double x : xs) {
    if (!std::isfinite(x)) throw ValidationError(std::string(who) + ": non-finite sample");
  }
  if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) {
    throw ValidationError(std::string(who) + ": constant samples");
  }
}

}  // namespace

int elbow_k(std::span<const double> curve) {
  if (curve.size() < 3) throw ValidationError("elbow: curve needs at least 3 points");
  const auto [lo_it, hi_it] = std::minmax_element(curve.begin(), curve.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  auto y = [&](std::size_t t) { return range > 0.0 ? (curve[t] - lo) / range : 0.0; };
  std::size_t best = 1;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t + 1 < curve.size(); ++t) {
    const double second = y(t - 1) - 2.0 * y(t) + y(t + 1);
    if (second > best_value + 1e-12) {
      best_value = second;
      best = t;
    }
  }
  return static_cast<int>(best) + 1;
}

GammaFit gamma_mle(std::span<const double> xs) {
  check_samples(xs, "gamma_mle");
  const double count = static_cast<double>(xs.size());
  double mean = 0.0, mean_log = 0.0;
  for (double x : xs) {
    if (!(x > 0.0)) throw ValidationError("gamma_mle: samples must be positive");
    mean += x;
    mean_log += std::log(x);
  }
  mean /= count;
  mean_log /= count;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= count;
  const double s = std::log(mean) - mean_log;
  if (!(s > 0.0) || !(var > 0.0)) throw ValidationError("gamma_mle: constant samples");

  // log k - digamma(k) = s, Newton from the moment estimate.
  GammaFit fit;
  double k = mean * mean / var;
  for (int it = 1; it <= kMaxNewton; ++it) {
    const double g = std::log(k) - digamma(k) - s;
    const double dg = 1.0 / k - trigamma(k);
    double next = k - g / dg;
    if (!(next > 0.0)) next = 0.5 * k;
    const double change = std::abs(next - k) / k;
    k = next;
    fit.iterations = it;
    if (change <= 1e-10) break;
  }
  if (!std::isfinite(k)) throw NumericError("gamma_mle: Newton iteration diverged");
  fit.shape = k;
  fit.rate = k / mean;
  fit.loglik = count * (k * std::log(fit.rate) - std::lgamma(k) + (k - 1.0) * mean_log - fit.rate * mean);
  return fit;
}

BetaFit beta_mle(std::span<const double> xs) {
  check_samples(xs, "beta_mle");
  const double count = static_cast<double>(xs.size());
  double mean = 0.0, g1 = 0.0, g2 = 0.0;
  for (double x : xs) {
    if (!(x > 0.0 && x < 1.0)) throw ValidationError("beta_mle: samples must lie strictly inside (0,1)");
    mean += x;
    g1 += std::log(x);
    g2 += std::log1p(-x);
  }
  mean /= count;
  g1 /= count;
  g2 /= count;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= count;

  double u = 1.0, v = 1.0;
  const double common = mean * (1.0 - mean) / var - 1.0;
  if (common > 0.0) {
    u = mean * common;
    v = (1.0 - mean) * common;
  }
  auto residual = [&](double a, double b, double& f1, double& f2) {
    const double ds = digamma(a + b);
    f1 = digamma(a) - ds - g1;
    f2 = digamma(b) - ds - g2;
    return std::hypot(f1, f2);
  };
  BetaFit fit;
  double f1, f2;
  double norm = residual(u, v, f1, f2);
  for (int it = 1; it <= kMaxNewton && norm > 1e-10; ++it) {
    const double ts = trigamma(u + v);
    const double j11 = trigamma(u) - ts, j22 = trigamma(v) - ts, j12 = -ts;
    const double det = j11 * j22 - j12 * j12;
    const double du = (j22 * f1 - j12 * f2) / det;
    const double dv = (j11 * f2 - j12 * f1) / det;
    double step = 1.0;
    double nu = u - du, nv = v - dv;
    while (!(nu > 0.0 && nv > 0.0) && step > 1e-8) {
      step *= 0.5;
      nu = u - step * du;
      nv = v - step * dv;
    }
    if (!(nu > 0.0 && nv > 0.0)) throw NumericError("beta_mle: Newton step left the domain");
    u = nu;
    v = nv;
    norm = residual(u, v, f1, f2);
    fit.iterations = it;
  }
  if (!(norm <= 1e-8)) throw NumericError("beta_mle: Newton iteration did not converge");
  fit.u = u;
  fit.v = v;
  fit.loglik = count * (std::lgamma(u + v) - std::lgamma(u) - std::lgamma(v) + (u - 1.0) * g1 +
                        (v - 1.0) * g2);
  return fit;
}

LikelihoodFit fit_likelihood_hyperparams(const DissimilarityMatrix& d, const Partition& labels) {
  const int n = d.size();
  if (labels.size() != n) throw ValidationError("elicit: label count does not match the matrix");
  std::vector<double> within, between;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      (labels.label(i) == labels.label(j) ? within : between).push_back(d(i, j));
    }
  }
  if (within.empty()) throw ValidationError("elicit: A empty (no within-cluster pairs)");
  if (between.empty()) throw ValidationError("elicit: B empty (no cross-cluster pairs)");

  LikelihoodFit out;
  out.within = gamma_mle(within);
  out.between = gamma_mle(between);
  out.n_within = static_cast<std::int64_t>(within.size());
  out.n_between = static_cast<std::int64_t>(between.size());
  ModelParams& m = out.params;
  m.delta1 = out.within.shape;
  m.alpha = m.delta1 * static_cast<double>(out.n_within);
  m.beta = 0.0;
  for (double x : within) m.beta += x;
  m.delta2 = out.between.shape;
  if (!(m.delta2 > 1.0)) {
    warn("elicit: fitted delta2 = " + std::to_string(m.delta2) +
         " <= 1, clamped to 1 + 1e-6 to keep the repulsion density vanishing at 0");
    m.delta2 = 1.0 + 1e-6;
    out.delta2_clamped = true;
  }
  m.zeta = m.delta2 * static_cast<double>(out.n_between);
  m.gamma = 0.0;
  for (double x : between) m.gamma += x;
  m.repulsion = true;
  return out;
}

PriorFit fit_prior_params(const DissimilarityMatrix& d, const Partition& labels, Rng& rng,
                          const PriorFitOptions& options) {
  if (labels.size() != d.size()) throw ValidationError("elicit: label count does not match the matrix");
  if (options.warmup < 0 || options.draws < 0) throw ValidationError("elicit: negative chain length");
  ESCParams start;  // Gamma(1, 1) on r, Beta(1, 1) on p
  SamplerConfig config;
  config.prior_only = true;
  Sampler sampler(d, ModelParams{}, start, config, labels);

  PriorFit out;
  sampler.set_adapting(true);
  for (int it = 0; it < options.warmup; ++it) {
    sampler.update_r(rng);
    sampler.update_p(rng);
  }
  sampler.set_adapting(false);
  for (int it = 0; it < options.draws; ++it) {
    sampler.update_r(rng);
    sampler.update_p(rng);
    out.r_draws.push_back(sampler.r());
    out.p_draws.push_back(sampler.p());
  }
  out.r_fit = gamma_mle(out.r_draws);
  out.p_fit = beta_mle(out.p_draws);
  out.esc.eta = out.r_fit.shape;
  out.esc.sigma = out.r_fit.rate;
  out.esc.u = out.p_fit.u;
  out.esc.v = out.p_fit.v;
  out.esc.r = out.esc.eta / out.esc.sigma;
  out.esc.p = out.esc.u / (out.esc.u + out.esc.v);
  return out;
}

ElicitationReport elicit(const DissimilarityMatrix& d, const DataMatrix* data,
                         const ElicitOptions& options) {
  const int n = d.size();
  if (n < 4) throw ValidationError("elicit: need at least 4 items for an elbow curve");
  if (data != nullptr && data->rows != n) {
    throw ValidationError("elicit: data rows do not match the dissimilarity matrix");
  }
  const int k_max = std::min(options.k_max, n - 1);
  if (k_max < 3) throw ValidationError("elicit: --kmax must be at least 3");

  ElicitationReport report;
  Rng cluster_rng(derive_seed(options.seed, 0));
  if (data != nullptr) {
    report.method = "kmeans";
    report.curve = wss_curve(*data, k_max, cluster_rng);
    report.k_elbow = elbow_k(report.curve);
    report.initial_labels = kmeans(*data, report.k_elbow, cluster_rng).labels;
  } else {
    report.method = "kmedoids";
    report.curve = wss_curve(d, k_max);
    report.k_elbow = elbow_k(report.curve);
    report.initial_labels = kmedoids(d, report.k_elbow).labels;
  }
  report.likelihood = fit_likelihood_hyperparams(d, report.initial_labels);
  Rng prior_rng(derive_seed(options.seed, 1));
  report.prior = fit_prior_params(d, report.initial_labels, prior_rng, options.prior);
  return report;
}

}  // namespace bdc
