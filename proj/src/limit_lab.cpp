#include "splitplot/limit_lab.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "splitplot/common.hpp"
#include "splitplot/distributions.hpp"
#include "splitplot/parallel.hpp"
#include "splitplot/rng.hpp"

namespace splitplot {
namespace {

constexpr std::size_t kChunk = 4096;
constexpr int kBootstrapResamples = 100;

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::kNormal: return "normal";
    case Regime::kChi1: return "chi1";
    case Regime::kFiniteMixture: return "finite-mixture";
    case Regime::kInfiniteMixture: return "infinite-mixture";
  }
  return "normal";
}

RegimeReport classify_regime(std::span<const double> betas, const RegimeThresholds& thresholds) {
  if (betas.empty()) throw InputError("empty spectrum");
  double mass = 0.0;
  for (std::size_t s = 0; s < betas.size(); ++s) {
    if (!(betas[s] >= -1e-12)) throw InputError("spectrum has negative weights");
    if (s > 0 && betas[s] > betas[s - 1] + 1e-12) throw InputError("spectrum is not sorted in decreasing order");
    mass += betas[s] * betas[s];
  }
  if (mass > 1.0 + 1e-8) throw InputError("spectrum is not normalized: sum of squared weights exceeds 1");

  RegimeReport rep;
  rep.thresholds = thresholds;
  rep.beta1 = betas.front();
  rep.r_effective = betas.size() + 1;
  double cumulative = 0.0;
  for (std::size_t s = 0; s < betas.size(); ++s) {
    cumulative += betas[s] * betas[s];
    if (cumulative >= thresholds.mass_cut - 1e-12) {
      rep.r_effective = s + 1;
      break;
    }
  }
  if (rep.beta1 <= thresholds.low + 1e-12) {
    rep.tag = Regime::kNormal;
  } else if (rep.beta1 >= thresholds.high - 1e-12) {
    rep.tag = Regime::kChi1;
  } else if (rep.r_effective > betas.size()) {
    rep.tag = Regime::kInfiniteMixture;
  } else {
    rep.tag = Regime::kFiniteMixture;
  }
  rep.boundary = std::abs(rep.beta1 - thresholds.low) <= 1e-9 || std::abs(rep.beta1 - thresholds.high) <= 1e-9;
  return rep;
}

std::vector<double> sample_mixture(std::span<const double> betas, std::size_t m, std::uint64_t seed,
                                   std::size_t terms, unsigned threads) {
  const std::size_t r = std::min(terms, betas.size());
  double mass = 0.0;
  for (std::size_t s = 0; s < r; ++s) mass += betas[s] * betas[s];
  if (mass > 1.0 + 1e-10) throw InputError("spectrum is not normalized: sum of squared weights exceeds 1");
  const double remainder = std::sqrt(std::max(0.0, 1.0 - mass));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  std::vector<double> out(m);
  const std::size_t chunks = (m + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    Philox rng(seed, stream_tag::kMixture, c);
    std::normal_distribution<double> normal;
    const std::size_t end = std::min(m, (c + 1) * kChunk);
    for (std::size_t j = c * kChunk; j < end; ++j) {
      double x = 0.0;
      for (std::size_t s = 0; s < r; ++s) {
        const double z = normal(rng);
        x += betas[s] * (z * z - 1.0);
      }
      x *= inv_sqrt2;
      if (remainder > 0.0) x += remainder * normal(rng);
      out[j] = x;
    }
  });
  return out;
}

double empirical_quantile(std::span<const double> sorted, double alpha) {
  if (sorted.empty()) throw InputError("empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie strictly between 0 and 1");
  const double h = (1.0 - alpha) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

double bootstrap_se(std::span<const double> sample, double alpha, std::uint64_t seed) {
  const std::size_t m = sample.size();
  const double h = (1.0 - alpha) * static_cast<double>(m - 1);
  const auto k = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(k);
  std::vector<double> resample(m);
  double sum = 0.0, sumsq = 0.0;
  for (int b = 0; b < kBootstrapResamples; ++b) {
    Philox rng(seed, stream_tag::kBootstrap, static_cast<std::uint64_t>(b));
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    for (auto& v : resample) v = sample[pick(rng)];
    std::nth_element(resample.begin(), resample.begin() + static_cast<std::ptrdiff_t>(k), resample.end());
    const double lo = resample[k];
    double q = lo;
    if (k + 1 < m && frac > 0.0) {
      const double hi = *std::min_element(resample.begin() + static_cast<std::ptrdiff_t>(k) + 1, resample.end());
      q = lo + frac * (hi - lo);
    }
    sum += q;
    sumsq += q * q;
  }
  const double n = kBootstrapResamples;
  const double mean = sum / n;
  return std::sqrt(std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0)));
}

}  // namespace

QuantileEstimate mixture_quantile(std::span<const double> betas, double alpha, std::size_t m, std::uint64_t seed,
                                  std::size_t terms, unsigned threads) {
  if (m < 100'000) throw InputError("mixture quantiles need at least 100000 samples");
  std::vector<double> sample = sample_mixture(betas, m, seed, terms, threads);
  std::sort(sample.begin(), sample.end());
  return {empirical_quantile(sample, alpha), bootstrap_se(sample, alpha, seed)};
}

std::vector<ApproximationRow> approximation_error(std::span<const double> betas, double f_p,
                                                  std::span<const double> alpha_grid, std::size_t m,
                                                  std::uint64_t seed, unsigned threads) {
  if (m < 100'000) throw InputError("mixture quantiles need at least 100000 samples");
  std::vector<double> sample = sample_mixture(betas, m, seed, static_cast<std::size_t>(-1), threads);
  std::sort(sample.begin(), sample.end());
  std::vector<ApproximationRow> rows;
  rows.reserve(alpha_grid.size());
  for (double alpha : alpha_grid) {
    ApproximationRow row;
    row.alpha = alpha;
    row.mixture = empirical_quantile(sample, alpha);
    row.mixture_se = bootstrap_se(sample, alpha, seed);
    row.kf = kf_quantile(f_p, alpha);
    row.gap = row.mixture - row.kf;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace splitplot
