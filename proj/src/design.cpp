#include "splitplot/design.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <sstream>

#include "splitplot/kron.hpp"

namespace splitplot {
namespace {

constexpr double kProjectionTol = 1e-10;

void check_projection(const Matrix& t, std::string_view label) {
  if (t.rows() != t.cols()) throw InputError(std::string(label) + " factor must be square");
  if (!t.allFinite()) throw InputError(std::string(label) + " factor has non-finite entries");
  if (t.cwiseAbs().maxCoeff() == 0.0) throw InputError(std::string(label) + " factor is all zero");
  if ((t - t.transpose()).cwiseAbs().maxCoeff() > kProjectionTol)
    throw InputError(std::string(label) + " factor is not symmetric");
  if ((t * t - t).cwiseAbs().maxCoeff() > kProjectionTol)
    throw InputError(std::string(label) + " factor is not idempotent");
}

Matrix averaging(std::size_t k) {
  const auto n = static_cast<Eigen::Index>(k);
  return Matrix::Constant(n, n, 1.0 / static_cast<double>(k));
}

}  // namespace

Design::Design(std::vector<std::size_t> sizes, std::size_t dim)
    : sizes_(std::move(sizes)), dim_(dim), total_(0) {
  if (sizes_.empty()) throw InputError("design needs at least one group");
  if (dim_ == 0) throw InputError("design dimension must be >= 1");
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (sizes_[i] == 0) throw InputError("group " + std::to_string(i + 1) + " is empty");
  }
  total_ = std::accumulate(sizes_.begin(), sizes_.end(), std::size_t{0});
}

namespace {

Design design_of(const std::vector<RowMatrix>& groups) {
  if (groups.empty()) throw InputError("dataset needs at least one group");
  std::vector<std::size_t> sizes;
  sizes.reserve(groups.size());
  for (const auto& g : groups) sizes.push_back(static_cast<std::size_t>(g.rows()));
  return Design(std::move(sizes), static_cast<std::size_t>(groups.front().cols()));
}

}  // namespace

DataSet::DataSet(std::vector<RowMatrix> groups) : groups_(std::move(groups)), design_(design_of(groups_)) {
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    if (static_cast<std::size_t>(groups_[i].cols()) != design_.dim())
      throw InputError("group " + std::to_string(i + 1) + " has a different number of time points");
    if (!groups_[i].allFinite())
      throw InputError("group " + std::to_string(i + 1) + " contains non-finite values");
  }
}

RowMatrix DataSet::group_means() const {
  RowMatrix means(static_cast<Eigen::Index>(groups_.size()), static_cast<Eigen::Index>(design_.dim()));
  for (std::size_t i = 0; i < groups_.size(); ++i)
    means.row(static_cast<Eigen::Index>(i)) = groups_[i].colwise().mean();
  return means;
}

std::string_view to_string(HypothesisKind kind) {
  switch (kind) {
    case HypothesisKind::kGroup: return "group";
    case HypothesisKind::kTime: return "time";
    case HypothesisKind::kInteraction: return "interaction";
    case HypothesisKind::kGrandMean: return "grand-mean";
    case HypothesisKind::kCustom: return "custom";
  }
  return "custom";
}

HypothesisKind parse_hypothesis_kind(std::string_view name) {
  if (name == "group") return HypothesisKind::kGroup;
  if (name == "time") return HypothesisKind::kTime;
  if (name == "interaction") return HypothesisKind::kInteraction;
  if (name == "grand-mean") return HypothesisKind::kGrandMean;
  throw InputError("unknown hypothesis '" + std::string(name) +
                   "' (expected group, time, interaction or grand-mean)");
}

HypothesisSpec HypothesisSpec::custom(Matrix whole, Matrix sub) {
  return HypothesisSpec{HypothesisKind::kCustom, std::move(whole), std::move(sub)};
}

ProjectionPair::ProjectionPair(Matrix whole, Matrix sub) : whole_(std::move(whole)), sub_(std::move(sub)) {
  check_projection(whole_, "whole-plot");
  check_projection(sub_, "sub-plot");
}

Matrix build_projection(const Matrix& contrast) {
  if (contrast.size() == 0) throw InputError("empty contrast matrix");
  if (!contrast.allFinite()) throw InputError("contrast matrix has non-finite entries");
  if (contrast.cwiseAbs().maxCoeff() == 0.0) throw InputError("degenerate contrast: all entries are zero");

  const Matrix gram = contrast * contrast.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector& values = eig.eigenvalues();
  const double cutoff = values.maxCoeff() * 1e-12;
  Vector inv = Vector::Zero(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values(k) > cutoff) inv(k) = 1.0 / values(k);
  }
  const Matrix ginv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  Matrix t = contrast.transpose() * ginv * contrast;
  return 0.5 * (t + t.transpose());
}

ProjectionPair canonical_hypothesis(HypothesisKind kind, std::size_t a, std::size_t d) {
  if (a == 0 || d == 0) throw InputError("hypothesis needs a >= 1 and d >= 1");
  switch (kind) {
    case HypothesisKind::kGroup:
      if (a == 1) throw InputError("rank-zero factor: group hypothesis needs a >= 2");
      return {centering_matrix(a), averaging(d)};
    case HypothesisKind::kTime:
      if (d == 1) throw InputError("rank-zero factor: time hypothesis needs d >= 2");
      return {averaging(a), centering_matrix(d)};
    case HypothesisKind::kInteraction:
      if (a == 1 || d == 1) throw InputError("rank-zero factor: interaction hypothesis needs a >= 2 and d >= 2");
      return {centering_matrix(a), centering_matrix(d)};
    case HypothesisKind::kGrandMean:
      return {averaging(a), averaging(d)};
    case HypothesisKind::kCustom:
      break;
  }
  throw InputError("custom hypotheses need explicit contrast matrices");
}

ProjectionPair projection_for(const HypothesisSpec& spec, std::size_t a, std::size_t d) {
  if (spec.kind != HypothesisKind::kCustom) return canonical_hypothesis(spec.kind, a, d);
  if (static_cast<std::size_t>(spec.whole_contrast.cols()) != a)
    throw InputError("whole-plot contrast must have a = " + std::to_string(a) + " columns");
  if (static_cast<std::size_t>(spec.sub_contrast.cols()) != d)
    throw InputError("sub-plot contrast must have d = " + std::to_string(d) + " columns");
  return {build_projection(spec.whole_contrast), build_projection(spec.sub_contrast)};
}

Matrix EffectDecomposition::reconstruct() const {
  Matrix mu = gamma;
  mu.array() += grand;
  mu.colwise() += alpha;
  mu.rowwise() += beta.transpose();
  return mu;
}

EffectDecomposition decompose_effects(const Matrix& means) {
  if (means.size() == 0) throw InputError("empty mean table");
  if (!means.allFinite()) throw InputError("mean table has non-finite entries");
  EffectDecomposition e;
  e.grand = means.mean();
  e.alpha = means.rowwise().mean().array() - e.grand;
  e.beta = means.colwise().mean().transpose().array() - e.grand;
  e.gamma = means;
  e.gamma.colwise() -= e.alpha;
  e.gamma.rowwise() -= e.beta.transpose();
  e.gamma.array() -= e.grand;
  return e;
}

std::string DesignDiagnostics::message() const {
  std::ostringstream os;
  if (!a1_feasible()) os << "A1 (trace estimator) needs at least one group with at least 2 observations\n";
  if (!a2_feasible()) os << "A2 (squared-trace estimator) needs at least one group with at least 4 observations\n";
  if (!c1_feasible())
    os << "C1 (cubed-trace estimator) needs groups with at least 6 observations; none are present\n";
  return os.str();
}

DesignDiagnostics validate_design(const Design& design) {
  DesignDiagnostics diag;
  for (std::size_t i = 0; i < design.groups(); ++i) {
    const std::size_t n = design.size(i);
    if (n >= kMinSizeA1) diag.a1_groups.push_back(i);
    if (n >= kMinSizeA2) diag.a2_groups.push_back(i);
    if (n >= kMinSizeC1) diag.c1_groups.push_back(i);
  }
  return diag;
}

}  // namespace splitplot
