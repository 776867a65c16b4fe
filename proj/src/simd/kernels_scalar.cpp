#include "splitplot/simd/kernels.hpp"

namespace splitplot::simd {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

double diff_sumsq(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

double sum(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k];
  return s;
}

void subtract_scalar(double* a, double c, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) a[k] -= c;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", dot, diff_sumsq, sum, subtract_scalar};
  return table;
}

}  // namespace splitplot::simd
