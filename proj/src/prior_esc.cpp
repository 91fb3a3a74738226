// Apache License, Version 2.0, refer to LICENSE.txt

#include "bdc/prior_esc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bdc/quadrature.hpp"

namespace bdc {

namespace {

void check_rp(double r, double p) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("nu: r must be positive and finite");
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("nu: p must lie strictly inside (0,1)");
}

double log_sum_exp(std::span<const double> xs) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

KDistribution normalize_logs(int n, const std::vector<double>& logs, bool exact) {
  KDistribution out;
  out.n = n;
  out.exact = exact;
  const double norm = log_sum_exp(logs);
  if (!std::isfinite(norm)) throw NumericError("K distribution: normalizer is not finite");
  out.probs.resize(logs.size());
  for (std::size_t k = 0; k < logs.size(); ++k) out.probs[k] = std::exp(logs[k] - norm);
  return out;
}

// log of int_0^inf exp(-z t) t^(a-1) g(t) dt for a > 0, z > 0 and a smooth,
// at most polynomially growing g given as log_g.
//
// [0, 1] is integrated in w = t^a (removes the t^(a-1) endpoint
// singularity) when a < 1; [1, inf) in s = log(1 + t), truncated once the
// integrand has fallen 80 nats below its running maximum. Both pieces are
// scaled by that maximum before exponentiating.
template <typename LogG>
double log_gamma_kernel_integral(double a, double z, LogG&& log_g) {
  const bool substitute = a < 1.0;
  auto head = [&](double x) {
    if (substitute) {
      const double t = std::pow(x, 1.0 / a);
      return -std::log(a) - z * t + log_g(t);
    }
    return -z * x + (a - 1.0) * std::log(x) + log_g(x);
  };
  auto tail = [&](double s) {
    const double t = std::expm1(s);
    return -z * t + (a - 1.0) * std::log(t) + log_g(t) + s;
  };

  double peak = -std::numeric_limits<double>::infinity();
  for (int j = 1; j <= 64; ++j) peak = std::max(peak, head(j / 64.0));

  const double s_lo = std::log(2.0);
  double t_hi = std::max(4.0, 4.0 * (a + 1.0) / z);
  double previous = tail(s_lo);
  peak = std::max(peak, previous);
  for (int guard = 0; guard < 2000; ++guard) {
    const double s_hi = std::log1p(t_hi);
    const int steps = 64;
    double last = previous;
    for (int j = 1; j <= steps; ++j) {
      last = tail(s_lo + (s_hi - s_lo) * j / steps);
      peak = std::max(peak, last);
    }
    const double before = tail(std::log1p(0.5 * t_hi));
    if (last < peak - 80.0 && last < before) break;
    previous = last;
    t_hi *= 2.0;
  }
  if (!std::isfinite(peak)) throw NumericError("tricomi: integrand is not finite");

  auto head_scaled = [&](double x) { return std::exp(head(x) - peak); };
  auto tail_scaled = [&](double s) { return std::exp(tail(s) - peak); };
  const QuadResult first = integrate_adaptive(head_scaled, 0.0, 1.0, 1e-14);
  const QuadResult second = integrate_adaptive(tail_scaled, s_lo, std::log1p(t_hi), 1e-14);
  const double total = first.value + second.value;
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericError("tricomi: quadrature failed");
  return peak + std::log(total);
}

}  // namespace

double nu_logpmf(int m, double r, double p) {
  check_rp(r, p);
  if (m < 1) throw ValidationError("nu: cluster size must be >= 1");
  const double k = m - 1;
  return std::lgamma(k + r) - std::lgamma(r) - std::lgamma(k + 1.0) + k * std::log(p) +
         r * std::log1p(-p);
}

double nu_ratio(int m, double r, double p) {
  check_rp(r, p);
  if (m < 1) throw ValidationError("nu: cluster size must be >= 1");
  return p * ((m - 1.0 + r) / m);
}

double negbin_logpmf(int k, double shape, double p) {
  if (k == 0) return shape * std::log1p(-p);
  return std::lgamma(k + shape) - std::lgamma(shape) - std::lgamma(k + 1.0) + k * std::log(p) +
         shape * std::log1p(-p);
}

std::vector<double> k_conditional_log_numerators(int n, double r, double p) {
  check_rp(r, p);
  if (n < 1) throw ValidationError("prior: n must be >= 1");
  std::vector<double> logs(n);
  for (int k = 1; k <= n; ++k) logs[k - 1] = negbin_logpmf(n - k, r * k, p);
  return logs;
}

double log_prob_En(int n, double r, double p) {
  return log_sum_exp(k_conditional_log_numerators(n, r, p));
}

double prob_En(int n, double r, double p) { return std::exp(log_prob_En(n, r, p)); }

double eppf_log_unnormalized(std::span<const int> sizes, double r, double p) {
  int n = 0;
  double out = std::lgamma(static_cast<double>(sizes.size()) + 1.0);
  for (int m : sizes) {
    n += m;
    out += std::lgamma(m + 1.0) + nu_logpmf(m, r, p);
  }
  return out - std::lgamma(n + 1.0);
}

double eppf_conditional_log(std::span<const int> sizes, double r, double p) {
  const int n = std::accumulate(sizes.begin(), sizes.end(), 0);
  return eppf_log_unnormalized(sizes, r, p) - log_prob_En(n, r, p);
}

double eppf_conditional_log(const Partition& rho, double r, double p) {
  return eppf_conditional_log(rho.sizes(), r, p);
}

KDistribution k_conditional_pmf(int n, double r, double p) {
  return normalize_logs(n, k_conditional_log_numerators(n, r, p), true);
}

double log_tricomi_u(double a, double b, double z) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("tricomi: a must be positive");
  if (!(z > 0.0) || !std::isfinite(z)) throw ValidationError("tricomi: z must be positive");
  if (!std::isfinite(b)) throw ValidationError("tricomi: b must be finite");
  const double c = b - a - 1.0;
  const double log_int = log_gamma_kernel_integral(a, z, [c](double t) { return c * std::log1p(t); });
  return log_int - std::lgamma(a);
}

double tricomi_u(double a, double b, double z) { return std::exp(log_tricomi_u(a, b, z)); }

KDistribution k_marginal_pmf(int n, const ESCParams& esc) {
  if (n < 1) throw ValidationError("prior: n must be >= 1");
  if (!(esc.eta > 0 && esc.sigma > 0 && esc.u > 0 && esc.v > 0)) {
    throw ValidationError("prior: eta, sigma, u, v must be positive");
  }
  const double eta = esc.eta;
  const double sigma = esc.sigma;
  std::vector<double> logs(n);
  if (esc.u == 1.0 && esc.v == 1.0) {
    // pi(K) ∝ w'^-eta U(eta, eta, sigma/w') - [K<n] w^-eta U(eta, eta, sigma/w)
    // with w = K/(n-K), w' = K/(n-K+1).
    for (int k = 1; k <= n; ++k) {
      const double w_prime = static_cast<double>(k) / (n - k + 1);
      const double first = -eta * std::log(w_prime) + log_tricomi_u(eta, eta, sigma / w_prime);
      if (k == n) {
        logs[k - 1] = first;
        continue;
      }
      const double w = static_cast<double>(k) / (n - k);
      const double second = -eta * std::log(w) + log_tricomi_u(eta, eta, sigma / w);
      const double gap = second - first;
      logs[k - 1] = gap < 0.0 ? first + std::log1p(-std::exp(gap))
                              : -std::numeric_limits<double>::infinity();
    }
    return normalize_logs(n, logs, true);
  }

  const double u = esc.u;
  const double v = esc.v;
  for (int k = 1; k < n; ++k) {
    const double m = n - k;
    logs[k - 1] = std::lgamma(m + u) - std::lgamma(m + 1.0) + eta * std::log(sigma) +
                  std::lgamma(eta + v) - eta * std::log(static_cast<double>(k)) +
                  (eta - u) * std::log(m) + log_tricomi_u(v + eta, eta - u + 1.0, sigma * m / k);
  }
  const double nd = n;
  if (eta > u) {
    logs[n - 1] = std::lgamma(u) + u * std::log(sigma) + std::lgamma(eta - u) - u * std::log(nd);
  } else {
    // E_r[(rn)^-u] diverges here; use Gamma(u) Gamma(eta) E_r[Gamma(v+rn)/Gamma(u+v+rn)]
    // directly, which is what the approximation stands in for.
    const double log_e = log_gamma_kernel_integral(eta, sigma, [&](double r) {
      return std::lgamma(v + r * nd) - std::lgamma(u + v + r * nd);
    });
    logs[n - 1] = std::lgamma(u) + eta * std::log(sigma) + log_e;
  }
  return normalize_logs(n, logs, false);
}

std::vector<double> allocation_prior_logweights(std::span<const int> sizes, double r, double p) {
  check_rp(r, p);
  std::vector<double> out(sizes.size() + 1);
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    const int m = sizes[j];
    out[j] = std::log(m + 1.0) + std::log(nu_ratio(m, r, p));
  }
  out[sizes.size()] = std::log(static_cast<double>(sizes.size()) + 1.0) + r * std::log1p(-p);
  return out;
}

int sample_nu(double r, double p, Rng& rng) {
  const double lambda = rng.gamma(r, (1.0 - p) / p);
  return 1 + rng.poisson(lambda);
}

Partition sample_partition_prior(int n, double r, double p, Rng& rng) {
  check_rp(r, p);
  if (n < 1) throw ValidationError("prior: n must be >= 1");
  std::vector<int> sizes;
  for (;;) {
    sizes.clear();
    int total = 0;
    while (total < n) {
      const int m = sample_nu(r, p, rng);
      sizes.push_back(m);
      total += m;
    }
    if (total == n) break;
  }
  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t k = 0; k < sizes.size(); ++k) labels.insert(labels.end(), sizes[k], static_cast<int>(k));
  rng.shuffle(std::span<int>(labels));
  return Partition::from_labels(labels);
}

}  // namespace bdc
