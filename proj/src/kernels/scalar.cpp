#include "heartstack/kernels.hpp"

namespace heartstack::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) {
      const double p = a[i + l] * b[i + l];
      lane[l] = lane[l] + p;
    }
  }
  double sum = (lane[0] + lane[2]) + (lane[1] + lane[3]);
  for (; i < n; ++i) {
    const double p = a[i] * b[i];
    sum = sum + p;
  }
  return sum;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) {
      const double d = a[i + l] - b[i + l];
      const double p = d * d;
      lane[l] = lane[l] + p;
    }
  }
  double sum = (lane[0] + lane[2]) + (lane[1] + lane[3]);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    const double p = d * d;
    sum = sum + p;
  }
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double p = alpha * x[i];
    y[i] = y[i] + p;
  }
}

}  // namespace heartstack::kernels::scalar
