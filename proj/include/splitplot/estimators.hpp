#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "splitplot/common.hpp"
#include "splitplot/design.hpp"

namespace splitplot {

/// Per-group Gram matrices of the sub-plot-projected observations.
///
/// Entry (l, k) of group i is y_l^T y_k with y_l = T_S (X_{i,l} - Xbar_i).
/// Every kernel below only sees within-group differences
/// T_S (X_l - X_k) = y_l - y_k, so the group mean drops out exactly; keeping
/// it out of the cache makes the estimators shift invariant in floating point
/// as well. Each group's matrix is symmetric with zero row sums.
class GramCache {
 public:
  GramCache(const DataSet& data, const Matrix& sub_projection);

  std::size_t groups() const noexcept { return grams_.size(); }
  std::size_t size(std::size_t i) const { return static_cast<std::size_t>(grams_.at(i).rows()); }
  const RowMatrix& group(std::size_t i) const { return grams_.at(i); }
  std::vector<std::size_t> sizes() const;

 private:
  std::vector<RowMatrix> grams_;
};

/// Projects each row of x onto T_S, recognising identity, centering and
/// averaging projectors so they cost O(d) per row instead of O(d^2).
RowMatrix project_rows(const RowMatrix& x, const Matrix& sub_projection);

/// Unbiased for tr(T_S Sigma). Groups with n_i < 2 are skipped.
double a1(const GramCache& gram);

/// Unbiased for tr((T_S Sigma)^2); nonnegative. Groups with n_i < 4 are skipped.
///
/// Sums [(X_l1 - X_l2)^T T_S (X_k1 - X_k2)]^2 over disjoint index pairs,
/// divided by 4 * 6 * sum_i C(n_i, 4). For a fixed pair (l1, l2) the inner
/// sum over unordered pairs {k1, k2} of the remaining m indices equals
/// m * sum D_k^2 - (sum D_k)^2 with D_k = G[l1,k] - G[l2,k], so each group
/// costs O(n^3) instead of O(n^4).
double a2(const GramCache& gram);

inline constexpr std::uint64_t kDefaultTermCap = 100'000'000;

/// Complete order-6 U-statistic, unbiased for tr((T_S Sigma)^3).
///
/// Enumerates 6-subsets and the 15 ways to split each into three pairs; the
/// ordered-tuple kernel is constant on the 48 orderings that produce the
/// same split. Throws InputError if sum_i 6! C(n_i, 6) exceeds term_cap.
double c1_exact(const GramCache& gram, std::uint64_t term_cap = kDefaultTermCap);

/// Number of subsample draws per group: ceil(upsilon * C(n_i, 6)), 0 for n_i < 6.
std::vector<std::uint64_t> subsample_counts(const std::vector<std::size_t>& sizes, double upsilon);

struct SubsampleConfig {
  double upsilon = 0.05;
  std::uint64_t seed = 0;
};

/// Subsampled C1: w_i uniformly random ordered 6-tuples of distinct indices
/// per group, drawn from the substream (seed, group index).
double c1_subsampled(const GramCache& gram, const SubsampleConfig& config);

enum class C1Mode { kExact, kSubsampled };

struct TraceEstimates {
  double a1 = 0.0;
  double a2 = 0.0;
  double c1 = 0.0;
  C1Mode c1_mode = C1Mode::kSubsampled;
  std::vector<std::size_t> a1_groups;
  std::vector<std::size_t> a2_groups;
  std::vector<std::size_t> c1_groups;
  std::vector<std::uint64_t> draws;  // per group, subsampled mode only
};

/// A1, A2 and C1 (subsampled, or exact when config is empty).
TraceEstimates estimate_traces(const GramCache& gram, const SubsampleConfig* subsample,
                               std::uint64_t term_cap = kDefaultTermCap);

/// A2^3 / C1^2 * eta; +infinity when |C1| < 1e-300 (normal-limit regime).
double f_hat(double a2, double c1, double eta);

}  // namespace splitplot
