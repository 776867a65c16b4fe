#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "splitplot/common.hpp"
#include "splitplot/design.hpp"
#include "splitplot/kron.hpp"
#include "splitplot/rng.hpp"
#include "splitplot/test_engine.hpp"

namespace splitplot {

/// Group sizes of the reference unbalanced layout
/// (15,15,20,35,25,20,30,30,35,20,15,25): the first a entries, cycling
/// for a > 12.
std::vector<std::size_t> paper_sizes(std::size_t a);

CovarianceModel ar_covariance(std::size_t d, double rho);

enum class Alternative { kNull, kTrend, kOnePoint, kShift };

std::string_view to_string(Alternative alt);
Alternative parse_alternative(std::string_view name);

/// a x d mean table. Odd groups (1-based) stay at zero; even groups get
/// delta * k / d (trend), delta * e_1 (one-point) or delta * 1_d (shift).
RowMatrix alternative_mean(Alternative kind, double delta, std::size_t a, std::size_t d);

/// X_{i,j} = mu_i + L z with z drawn row by row, group by group from rng.
DataSet sample_dataset(const Design& design, const RowMatrix& means, const Matrix& chol_lower, Philox& rng);

enum class TestKind { kZ, kChi1, kKf };
inline constexpr std::array<TestKind, 3> kAllTests{TestKind::kZ, TestKind::kChi1, TestKind::kKf};
std::string_view to_string(TestKind test);

struct SimConfig {
  std::vector<std::size_t> sizes;
  std::size_t dim = 0;
  CovarianceModel covariance = CovarianceModel::identity(1);
  HypothesisSpec hypothesis;
  Alternative alternative = Alternative::kNull;
  std::vector<double> deltas{0.0};
  double alpha = 0.05;
  std::size_t replications = 2000;
  double upsilon = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  /// Throws InputError when the configuration is unusable.
  void validate() const;
};

struct RateRow {
  double delta = 0.0;
  TestKind test = TestKind::kKf;
  std::uint64_t rejections = 0;
  std::uint64_t replications = 0;
  double rate = 0.0;
  double se = 0.0;  // sqrt(rate (1 - rate) / reps)
};

struct SimResult {
  SimConfig config;
  std::vector<RateRow> rows;  // delta-major, tests in kAllTests order
  double seconds = 0.0;

  const RateRow& at(double delta, TestKind test) const;
};

/// Rejection rates of psi_z, psi_chi and phi_N* for every delta in the
/// config. Replication r draws its noise from substream (seed, r) and reuses
/// it across deltas; its subsampling seed is mix_seed(seed, r).
SimResult estimate_rejection_rate(const SimConfig& config);

struct PowerCurve {
  SimResult result;
  /// Largest drop of the phi_N* rate between consecutive deltas, in units of
  /// its standard error; <= 3 reads as nondecreasing up to Monte Carlo noise.
  double worst_drop_se = 0.0;
  bool monotone = true;
};

PowerCurve power_curve(const SimConfig& config);

/// Null draws of W~_N (exact moments, known Sigma), one per replication.
std::vector<double> simulate_standardized_null(const Design& design, const Matrix& sigma,
                                               const ProjectionPair& projection, std::size_t replications,
                                               std::uint64_t seed, unsigned threads = 0);

}  // namespace splitplot
