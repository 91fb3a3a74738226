// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <span>
#include <string_view>

// Data-parallel inner loops with a scalar reference and an AVX2 variant.
// The active variant is picked once at startup from the CPU features and can
// be forced with BDC_SIMD=scalar|avx2 or set_backend().

namespace bdc::kernels {

enum class Backend { Scalar, Avx2 };

struct GatherSums {
  double sum = 0.0;
  double log_sum = 0.0;
};

namespace scalar {
GatherSums gather_sum2(const double* a, const double* b, std::span<const int> idx);
double squared_distance(const double* x, const double* y, std::size_t len);
void log_batch(const double* x, double* out, std::size_t len);
}  // namespace scalar

namespace avx2 {
bool supported();
GatherSums gather_sum2(const double* a, const double* b, std::span<const int> idx);
double squared_distance(const double* x, const double* y, std::size_t len);
void log_batch(const double* x, double* out, std::size_t len);
}  // namespace avx2

Backend active_backend();
// Throws std::invalid_argument if the CPU lacks the requested backend.
void set_backend(Backend backend);
bool backend_available(Backend backend);
std::string_view backend_name(Backend backend);

// sum_k a[idx[k]] and sum_k b[idx[k]].
GatherSums gather_sum2(const double* a, const double* b, std::span<const int> idx);
double squared_distance(std::span<const double> x, std::span<const double> y);
// out[k] = log(x[k]). The AVX2 variant is glibc's vector log (within 4 ulp).
void log_batch(std::span<const double> x, std::span<double> out);

}  // namespace bdc::kernels
