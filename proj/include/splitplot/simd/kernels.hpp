#pragma once

#include <cstddef>
#include <string_view>

namespace splitplot::simd {

// Inner loops of the Gram construction and the order-4 kernel sums.
// Every variant must agree with the scalar reference to rounding
// (tests/test_simd.cpp checks this on random inputs).

using DotFn = double (*)(const double* a, const double* b, std::size_t n);
using DiffSumSqFn = double (*)(const double* a, const double* b, std::size_t n);
using SumFn = double (*)(const double* a, std::size_t n);
using SubtractScalarFn = void (*)(double* a, double c, std::size_t n);

struct KernelTable {
  std::string_view name;
  DotFn dot;               // sum a[k] * b[k]
  DiffSumSqFn diff_sumsq;  // sum (a[k] - b[k])^2
  SumFn sum;               // sum a[k]
  SubtractScalarFn subtract_scalar;  // a[k] -= c
};

const KernelTable& scalar_kernels();
/// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

/// Best kernels for this CPU, chosen once. SPLITPLOT_SIMD=scalar|avx2|neon
/// in the environment forces a variant (falls back to scalar if unavailable).
const KernelTable& active();

}  // namespace splitplot::simd
