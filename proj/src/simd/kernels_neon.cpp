#include <arm_neon.h>

#include "splitplot/simd/kernels.hpp"

namespace splitplot::simd {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + k), vld1q_f64(b + k));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + k + 2), vld1q_f64(b + k + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; k < n; ++k) s += a[k] * b[k];
  return s;
}

double diff_sumsq(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const float64x2_t t0 = vsubq_f64(vld1q_f64(a + k), vld1q_f64(b + k));
    const float64x2_t t1 = vsubq_f64(vld1q_f64(a + k + 2), vld1q_f64(b + k + 2));
    acc0 = vfmaq_f64(acc0, t0, t0);
    acc1 = vfmaq_f64(acc1, t1, t1);
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; k < n; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

double sum(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) acc = vaddq_f64(acc, vld1q_f64(a + k));
  double s = vaddvq_f64(acc);
  for (; k < n; ++k) s += a[k];
  return s;
}

void subtract_scalar(double* a, double c, std::size_t n) {
  const float64x2_t vc = vdupq_n_f64(c);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) vst1q_f64(a + k, vsubq_f64(vld1q_f64(a + k), vc));
  for (; k < n; ++k) a[k] -= c;
}

}  // namespace

const KernelTable* neon_kernels() {
  static const KernelTable table{"neon", dot, diff_sumsq, sum, subtract_scalar};
  return &table;
}

}  // namespace splitplot::simd
