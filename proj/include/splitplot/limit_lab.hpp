#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace splitplot {

// Finite-N view of the limit law of the standardized quadratic form,
//   sum_s b_s (C_s - 1) / sqrt(2) + sqrt(1 - sum_s b_s^2) Z,
// driven by the normalized spectrum of T V_N T. The regime tags are
// diagnostics only; critical values always come from K_{f_hat}.

enum class Regime { kNormal, kChi1, kFiniteMixture, kInfiniteMixture };

std::string_view to_string(Regime regime);

struct RegimeThresholds {
  double low = 0.05;
  double high = 0.95;
  double mass_cut = 0.99;
};

struct RegimeReport {
  double beta1 = 0.0;
  /// Smallest r with sum_{s<=r} beta_s^2 >= mass_cut; spectrum size + 1
  /// when a truncated spectrum never reaches the cut.
  std::size_t r_effective = 0;
  Regime tag = Regime::kNormal;
  /// beta1 within 1e-9 of a threshold.
  bool boundary = false;
  RegimeThresholds thresholds;
};

/// betas must be nonnegative, sorted decreasing, with sum beta^2 <= 1 + 1e-8.
/// A sum noticeably below one is read as a truncated spectrum.
RegimeReport classify_regime(std::span<const double> betas, const RegimeThresholds& thresholds = {});

/// m i.i.d. draws of the limit law using the first `terms` weights
/// (all when terms exceeds the size) plus the Gaussian remainder. Drawn in
/// fixed-size chunks from substreams (seed, chunk), so the output does not
/// depend on the thread count.
std::vector<double> sample_mixture(std::span<const double> betas, std::size_t m, std::uint64_t seed,
                                   std::size_t terms = static_cast<std::size_t>(-1), unsigned threads = 0);

struct QuantileEstimate {
  double value = 0.0;
  double standard_error = 0.0;  // bootstrap
};

/// Empirical (1 - alpha)-quantile of a sample (linear interpolation between
/// order statistics).
double empirical_quantile(std::span<const double> sorted, double alpha);

/// Monte Carlo (1 - alpha)-quantile of the limit law, with a bootstrap
/// standard error over 100 resamples. m must be at least 10^5.
QuantileEstimate mixture_quantile(std::span<const double> betas, double alpha, std::size_t m, std::uint64_t seed,
                                  std::size_t terms = static_cast<std::size_t>(-1), unsigned threads = 0);

struct ApproximationRow {
  double alpha = 0.0;
  double mixture = 0.0;
  double mixture_se = 0.0;
  double kf = 0.0;
  double gap = 0.0;  // mixture - kf
};

/// Signed gap between the Monte Carlo limit quantile and K_{f_P} across alpha.
std::vector<ApproximationRow> approximation_error(std::span<const double> betas, double f_p,
                                                  std::span<const double> alpha_grid, std::size_t m,
                                                  std::uint64_t seed, unsigned threads = 0);

}  // namespace splitplot
