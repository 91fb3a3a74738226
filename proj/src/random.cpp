// Apache License, Version 2.0, refer to LICENSE.txt

#include "bdc/random.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bdc {

int Rng::uniform_int(int n) {
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<int>(x % range);
}

// Marsaglia polar method.
double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

// Marsaglia-Tsang for shape >= 1; boosted by U^(1/shape) below 1.
double Rng::log_gamma1(double shape) {
  if (shape < 1.0) {
    return log_gamma1(shape + 1.0) + std::log(uniform()) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d * v);
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

double Rng::gamma(double shape, double rate) { return std::exp(log_gamma1(shape)) / rate; }

double Rng::beta(double a, double b) {
  const double lx = log_gamma1(a);
  const double ly = log_gamma1(b);
  // x / (x + y) = 1 / (1 + exp(ly - lx))
  double p = 1.0 / (1.0 + std::exp(ly - lx));
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  if (p < lo) p = lo;
  if (p > hi) p = hi;
  return p;
}

int Rng::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean > 1e9) throw std::overflow_error("poisson: mean too large");
  std::poisson_distribution<int> dist(mean);
  return dist(engine_);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace bdc
