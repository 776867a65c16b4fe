#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "splitplot/common.hpp"

namespace splitplot {

/// Group structure of a split-plot design: a groups of sizes n_i, each
/// subject measured at d time points.
class Design {
 public:
  Design(std::vector<std::size_t> sizes, std::size_t dim);

  std::size_t groups() const noexcept { return sizes_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t total() const noexcept { return total_; }
  std::size_t size(std::size_t i) const { return sizes_.at(i); }
  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }

  bool operator==(const Design&) const = default;

 private:
  std::vector<std::size_t> sizes_;
  std::size_t dim_;
  std::size_t total_;
};

/// Observations grouped by whole-plot level. Group i is an n_i x d matrix
/// whose rows are subjects.
class DataSet {
 public:
  explicit DataSet(std::vector<RowMatrix> groups);

  const Design& design() const noexcept { return design_; }
  const RowMatrix& group(std::size_t i) const { return groups_.at(i); }
  const std::vector<RowMatrix>& groups() const noexcept { return groups_; }

  /// Group means as an a x d table (row i = mean of group i).
  RowMatrix group_means() const;

 private:
  std::vector<RowMatrix> groups_;
  Design design_;
};

enum class HypothesisKind { kGroup, kTime, kInteraction, kGrandMean, kCustom };

std::string_view to_string(HypothesisKind kind);
/// Accepts "group", "time", "interaction", "grand-mean".
HypothesisKind parse_hypothesis_kind(std::string_view name);

/// Null hypothesis H mu = 0 with H = H_W (x) H_S. Custom hypotheses carry
/// the two contrast factors explicitly.
struct HypothesisSpec {
  HypothesisKind kind = HypothesisKind::kInteraction;
  Matrix whole_contrast;  // columns = a (custom only)
  Matrix sub_contrast;    // columns = d (custom only)

  static HypothesisSpec custom(Matrix whole, Matrix sub);
};

/// T = T_W (x) T_S with both factors symmetric idempotent.
class ProjectionPair {
 public:
  ProjectionPair(Matrix whole, Matrix sub);

  const Matrix& whole() const noexcept { return whole_; }
  const Matrix& sub() const noexcept { return sub_; }

 private:
  Matrix whole_;
  Matrix sub_;
};

/// T = H^T (H H^T)^- H. The generalized inverse comes from a symmetric
/// eigendecomposition of H H^T with eigenvalues below 1e-12 * max dropped.
Matrix build_projection(const Matrix& contrast);

ProjectionPair canonical_hypothesis(HypothesisKind kind, std::size_t a, std::size_t d);
/// Canonical kinds dispatch to canonical_hypothesis; custom contrasts go
/// through build_projection and must match (a, d).
ProjectionPair projection_for(const HypothesisSpec& spec, std::size_t a, std::size_t d);

/// mu_{it} = grand + alpha_i + beta_t + gamma_{it} with sum-to-zero constraints.
struct EffectDecomposition {
  double grand = 0.0;
  Vector alpha;
  Vector beta;
  Matrix gamma;

  Matrix reconstruct() const;
};

EffectDecomposition decompose_effects(const Matrix& means);

/// Per-estimator eligibility. A1 needs n_i >= 2, A2 n_i >= 4, C1 n_i >= 6.
struct DesignDiagnostics {
  std::vector<std::size_t> a1_groups;
  std::vector<std::size_t> a2_groups;
  std::vector<std::size_t> c1_groups;

  bool a1_feasible() const noexcept { return !a1_groups.empty(); }
  bool a2_feasible() const noexcept { return !a2_groups.empty(); }
  bool c1_feasible() const noexcept { return !c1_groups.empty(); }
  /// Human-readable explanation of every infeasible estimator; empty if none.
  std::string message() const;
};

inline constexpr std::size_t kMinSizeA1 = 2;
inline constexpr std::size_t kMinSizeA2 = 4;
inline constexpr std::size_t kMinSizeC1 = 6;

DesignDiagnostics validate_design(const Design& design);

}  // namespace splitplot
