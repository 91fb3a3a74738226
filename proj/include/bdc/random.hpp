// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace bdc {

// Seeded generator with self-contained variate algorithms, so a seed fixes
// every draw independently of the standard library's distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  int uniform_int(int n);

  double normal();
  // Gamma with shape/rate parametrization.
  double gamma(double shape, double rate);
  // log of a Gamma(shape, 1) draw; stays finite for tiny shapes.
  double log_gamma1(double shape);
  // Beta(a, b), clamped strictly inside (0, 1).
  double beta(double a, double b);
  int poisson(double mean);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t k = values.size(); k > 1; --k) {
      const int j = uniform_int(static_cast<int>(k));
      std::swap(values[k - 1], values[static_cast<std::size_t>(j)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 mix of (seed, stream); used to give each chain its own seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace bdc
