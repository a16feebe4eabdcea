#pragma once

// Dense double-precision inner loops shared by the distance, linear and
// neural learners and by the correlation code.
//
// Every kernel has a scalar reference implementation and an AVX2 variant.
// The reference accumulates in four interleaved lanes and reduces them as
// (l0 + l2) + (l1 + l3), exactly like the 256-bit path, and neither uses
// fused multiply-add. Both backends therefore return bit-identical results.

#include <cstddef>
#include <span>
#include <string_view>

namespace heartstack::kernels {

enum class Backend { scalar, avx2 };

/// Backend currently used by the dispatching entry points. Chosen on first
/// use: AVX2 when the CPU reports it, unless HEARTSTACK_SIMD=scalar.
Backend active_backend();

/// Overrides the dispatch choice (tests). Requesting avx2 on a CPU without
/// it returns false and leaves the backend unchanged.
bool set_backend(Backend backend);

bool cpu_has_avx2();

std::string_view backend_name(Backend backend);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace avx2

}  // namespace heartstack::kernels
