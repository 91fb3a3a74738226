// Apache License, Version 2.0, refer to LICENSE.txt

#include "bdc/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace bdc::kernels {

namespace scalar {

GatherSums gather_sum2(const double* a, const double* b, std::span<const int> idx) {
  GatherSums out;
  for (int k : idx) {
    out.sum += a[k];
    out.log_sum += b[k];
  }
  return out;
}

double squared_distance(const double* x, const double* y, std::size_t len) {
  double acc = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    const double diff = x[k] - y[k];
    acc += diff * diff;
  }
  return acc;
}

void log_batch(const double* x, double* out, std::size_t len) {
  for (std::size_t k = 0; k < len; ++k) out[k] = std::log(x[k]);
}

}  // namespace scalar

namespace {

struct Table {
  Backend backend;
  GatherSums (*gather_sum2)(const double*, const double*, std::span<const int>);
  double (*squared_distance)(const double*, const double*, std::size_t);
  void (*log_batch)(const double*, double*, std::size_t);
};

Table make_table(Backend backend) {
  if (backend == Backend::Avx2) {
    return {backend, &avx2::gather_sum2, &avx2::squared_distance, &avx2::log_batch};
  }
  return {backend, &scalar::gather_sum2, &scalar::squared_distance, &scalar::log_batch};
}

Table initial_table() {
  if (const char* env = std::getenv("BDC_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return make_table(Backend::Scalar);
    if (want == "avx2" && avx2::supported()) return make_table(Backend::Avx2);
  }
  return make_table(avx2::supported() ? Backend::Avx2 : Backend::Scalar);
}

Table& table() {
  static Table t = initial_table();
  return t;
}

}  // namespace

Backend active_backend() { return table().backend; }

bool backend_available(Backend backend) {
  return backend == Backend::Scalar || avx2::supported();
}

void set_backend(Backend backend) {
  if (!backend_available(backend)) {
    throw std::invalid_argument("SIMD backend not supported on this CPU");
  }
  table() = make_table(backend);
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

GatherSums gather_sum2(const double* a, const double* b, std::span<const int> idx) {
  return table().gather_sum2(a, b, idx);
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("squared_distance: length mismatch");
  return table().squared_distance(x.data(), y.data(), x.size());
}

void log_batch(std::span<const double> x, std::span<double> out) {
  if (x.size() != out.size()) throw std::invalid_argument("log_batch: length mismatch");
  table().log_batch(x.data(), out.data(), x.size());
}

}  // namespace bdc::kernels
