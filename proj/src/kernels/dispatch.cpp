#include <atomic>
#include <cassert>
#include <cstdlib>
#include <cstring>

#include "heartstack/kernels.hpp"

namespace heartstack::kernels {

namespace {

Backend detect() {
  const char* env = std::getenv("HEARTSTACK_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Backend::scalar;
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

bool set_backend(Backend backend) {
  if (backend == Backend::avx2 && !cpu_has_avx2()) return false;
  current().store(backend, std::memory_order_relaxed);
  return true;
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active_backend() == Backend::avx2 ? avx2::dot(a.data(), b.data(), a.size())
                                           : scalar::dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active_backend() == Backend::avx2
             ? avx2::squared_distance(a.data(), b.data(), a.size())
             : scalar::squared_distance(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  if (active_backend() == Backend::avx2) {
    avx2::axpy(alpha, x.data(), y.data(), x.size());
  } else {
    scalar::axpy(alpha, x.data(), y.data(), x.size());
  }
}

}  // namespace heartstack::kernels
