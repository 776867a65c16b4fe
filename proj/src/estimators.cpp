#include "splitplot/estimators.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "splitplot/rng.hpp"
#include "splitplot/simd/kernels.hpp"

namespace splitplot {
namespace {

enum class ProjectorShape { kIdentity, kCentering, kAveraging, kDense };

ProjectorShape classify(const Matrix& t) {
  const auto d = t.rows();
  const double inv = 1.0 / static_cast<double>(d);
  bool identity = true, centering = true, averaging = true;
  for (Eigen::Index i = 0; i < d && (identity || centering || averaging); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double delta = i == j ? 1.0 : 0.0;
      const double v = t(i, j);
      identity = identity && std::abs(v - delta) <= 1e-14;
      centering = centering && std::abs(v - (delta - inv)) <= 1e-14;
      averaging = averaging && std::abs(v - inv) <= 1e-14;
    }
  }
  if (identity) return ProjectorShape::kIdentity;
  if (centering) return ProjectorShape::kCentering;
  if (averaging) return ProjectorShape::kAveraging;
  return ProjectorShape::kDense;
}

// C(n, k) for small k, exact in 64 bits for the sizes this library meets.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  unsigned __int128 c = 1;
  for (std::uint64_t i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  if (c > std::numeric_limits<std::uint64_t>::max()) throw InputError("binomial coefficient overflows");
  return static_cast<std::uint64_t>(c);
}

// The 15 ways to split six positions into three pairs.
constexpr std::array<std::array<int, 6>, 15> kPairings{{
    {0, 1, 2, 3, 4, 5}, {0, 1, 2, 4, 3, 5}, {0, 1, 2, 5, 3, 4},
    {0, 2, 1, 3, 4, 5}, {0, 2, 1, 4, 3, 5}, {0, 2, 1, 5, 3, 4},
    {0, 3, 1, 2, 4, 5}, {0, 3, 1, 4, 2, 5}, {0, 3, 1, 5, 2, 4},
    {0, 4, 1, 2, 3, 5}, {0, 4, 1, 3, 2, 5}, {0, 4, 1, 5, 2, 3},
    {0, 5, 1, 2, 3, 4}, {0, 5, 1, 3, 2, 4}, {0, 5, 1, 4, 2, 3},
}};

// Lambda_1 * Lambda_2 * Lambda_3 for the pairs (p,q), (r,s), (u,v).
inline double triple_product(const double* g, std::size_t n, std::size_t p, std::size_t q, std::size_t r,
                             std::size_t s, std::size_t u, std::size_t v) {
  const auto at = [g, n](std::size_t i, std::size_t j) { return g[i * n + j]; };
  const double l1 = at(p, r) - at(p, s) - at(q, r) + at(q, s);
  const double l2 = at(r, u) - at(r, v) - at(s, u) + at(s, v);
  const double l3 = at(u, p) - at(u, q) - at(v, p) + at(v, q);
  return l1 * l2 * l3;
}

}  // namespace

RowMatrix project_rows(const RowMatrix& x, const Matrix& sub_projection) {
  const auto d = x.cols();
  if (sub_projection.rows() != d || sub_projection.cols() != d)
    throw InputError("sub-plot projection does not match the number of time points");
  const auto& k = simd::active();
  const auto n = static_cast<std::size_t>(d);
  switch (classify(sub_projection)) {
    case ProjectorShape::kIdentity:
      return x;
    case ProjectorShape::kCentering: {
      RowMatrix y = x;
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        double* row = y.row(r).data();
        k.subtract_scalar(row, k.sum(row, n) / static_cast<double>(n), n);
      }
      return y;
    }
    case ProjectorShape::kAveraging: {
      RowMatrix y(x.rows(), d);
      for (Eigen::Index r = 0; r < y.rows(); ++r)
        y.row(r).setConstant(k.sum(x.row(r).data(), n) / static_cast<double>(n));
      return y;
    }
    case ProjectorShape::kDense:
      break;
  }
  return x * sub_projection;
}

GramCache::GramCache(const DataSet& data, const Matrix& sub_projection) {
  const auto& k = simd::active();
  const auto d = data.design().dim();
  grams_.reserve(data.design().groups());
  for (const auto& x : data.groups()) {
    RowMatrix y = project_rows(x, sub_projection);
    y.rowwise() -= y.colwise().mean();
    const auto n = y.rows();
    RowMatrix g(n, n);
    for (Eigen::Index l = 0; l < n; ++l) {
      for (Eigen::Index m = l; m < n; ++m) {
        g(l, m) = k.dot(y.row(l).data(), y.row(m).data(), d);
        g(m, l) = g(l, m);
      }
    }
    grams_.push_back(std::move(g));
  }
}

std::vector<std::size_t> GramCache::sizes() const {
  std::vector<std::size_t> out;
  out.reserve(grams_.size());
  for (const auto& g : grams_) out.push_back(static_cast<std::size_t>(g.rows()));
  return out;
}

double a1(const GramCache& gram) {
  double numerator = 0.0, denominator = 0.0;
  for (std::size_t i = 0; i < gram.groups(); ++i) {
    const std::size_t n = gram.size(i);
    if (n < kMinSizeA1) continue;
    const auto& g = gram.group(i);
    // sum_{l<k} (G_ll + G_kk - 2 G_lk) = n tr(G) - sum(G)
    numerator += static_cast<double>(n) * g.trace() - g.sum();
    denominator += static_cast<double>(n) * static_cast<double>(n - 1);
  }
  if (denominator == 0.0) throw InputError("A1 requires at least one group with n_i >= 2");
  return numerator / denominator;
}

double a2(const GramCache& gram) {
  const auto& k = simd::active();
  double numerator = 0.0, denominator = 0.0;
  for (std::size_t i = 0; i < gram.groups(); ++i) {
    const std::size_t n = gram.size(i);
    if (n < kMinSizeA2) continue;
    const auto& g = gram.group(i);
    const Vector row_sums = g.rowwise().sum();
    const double m = static_cast<double>(n - 2);
    double group_sum = 0.0;
    for (std::size_t l1 = 1; l1 < n; ++l1) {
      const double* r1 = g.row(static_cast<Eigen::Index>(l1)).data();
      for (std::size_t l2 = 0; l2 < l1; ++l2) {
        const double* r2 = g.row(static_cast<Eigen::Index>(l2)).data();
        const double d1 = r1[l1] - r2[l1];
        const double d2 = r1[l2] - r2[l2];
        const double sum = row_sums(static_cast<Eigen::Index>(l1)) - row_sums(static_cast<Eigen::Index>(l2)) - d1 - d2;
        const double sumsq = k.diff_sumsq(r1, r2, n) - d1 * d1 - d2 * d2;
        group_sum += std::max(0.0, m * sumsq - sum * sum);
      }
    }
    numerator += group_sum;
    denominator += 24.0 * static_cast<double>(binomial(n, 4));
  }
  if (denominator == 0.0) throw InputError("A2 requires at least one group with n_i >= 4");
  return numerator / denominator;
}

double c1_exact(const GramCache& gram, std::uint64_t term_cap) {
  double terms = 0.0;
  for (std::size_t i = 0; i < gram.groups(); ++i) terms += 720.0 * static_cast<double>(binomial(gram.size(i), 6));
  if (terms == 0.0) throw InputError("C1 requires at least one group with n_i >= 6");
  if (terms > static_cast<double>(term_cap))
    throw InputError("exact C1 needs " + std::to_string(static_cast<std::uint64_t>(terms)) +
                     " kernel evaluations (cap " + std::to_string(term_cap) + "); use the subsampled estimator");

  double numerator = 0.0;
  for (std::size_t i = 0; i < gram.groups(); ++i) {
    const std::size_t n = gram.size(i);
    if (n < kMinSizeC1) continue;
    const double* g = gram.group(i).data();
    double group_sum = 0.0;
    std::array<std::size_t, 6> idx{};
    for (idx[0] = 0; idx[0] < n; ++idx[0])
      for (idx[1] = idx[0] + 1; idx[1] < n; ++idx[1])
        for (idx[2] = idx[1] + 1; idx[2] < n; ++idx[2])
          for (idx[3] = idx[2] + 1; idx[3] < n; ++idx[3])
            for (idx[4] = idx[3] + 1; idx[4] < n; ++idx[4])
              for (idx[5] = idx[4] + 1; idx[5] < n; ++idx[5])
                for (const auto& p : kPairings)
                  group_sum += triple_product(g, n, idx[p[0]], idx[p[1]], idx[p[2]], idx[p[3]], idx[p[4]], idx[p[5]]);
    // 48 orderings per split, and the ordered sum carries a factor 1/8.
    numerator += 6.0 * group_sum;
  }
  return numerator / terms;
}

std::vector<std::uint64_t> subsample_counts(const std::vector<std::size_t>& sizes, double upsilon) {
  if (!(upsilon > 0.0) || !std::isfinite(upsilon)) throw InputError("upsilon must be a positive number");
  std::vector<std::uint64_t> w;
  w.reserve(sizes.size());
  for (auto n : sizes) {
    w.push_back(n < kMinSizeC1 ? 0 : static_cast<std::uint64_t>(std::ceil(upsilon * static_cast<double>(binomial(n, 6)))));
  }
  return w;
}

double c1_subsampled(const GramCache& gram, const SubsampleConfig& config) {
  const auto w = subsample_counts(gram.sizes(), config.upsilon);
  double total_draws = 0.0, numerator = 0.0;
  for (std::size_t i = 0; i < gram.groups(); ++i) {
    if (w[i] == 0) continue;
    const std::size_t n = gram.size(i);
    const double* g = gram.group(i).data();
    Philox rng(config.seed, stream_tag::kSubsample, i);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    double group_sum = 0.0;
    std::array<std::size_t, 6> s{};
    for (std::uint64_t b = 0; b < w[i]; ++b) {
      for (int j = 0; j < 6; ++j) {
        bool fresh;
        do {
          s[j] = pick(rng);
          fresh = true;
          for (int q = 0; q < j; ++q) fresh = fresh && s[q] != s[j];
        } while (!fresh);
      }
      group_sum += triple_product(g, n, s[0], s[1], s[2], s[3], s[4], s[5]);
    }
    numerator += group_sum;
    total_draws += static_cast<double>(w[i]);
  }
  if (total_draws == 0.0) throw InputError("C1 requires at least one group with n_i >= 6");
  return numerator / (8.0 * total_draws);
}

TraceEstimates estimate_traces(const GramCache& gram, const SubsampleConfig* subsample, std::uint64_t term_cap) {
  TraceEstimates est;
  for (std::size_t i = 0; i < gram.groups(); ++i) {
    const auto n = gram.size(i);
    if (n >= kMinSizeA1) est.a1_groups.push_back(i);
    if (n >= kMinSizeA2) est.a2_groups.push_back(i);
    if (n >= kMinSizeC1) est.c1_groups.push_back(i);
  }
  est.a1 = a1(gram);
  est.a2 = a2(gram);
  if (subsample) {
    est.c1_mode = C1Mode::kSubsampled;
    est.c1 = c1_subsampled(gram, *subsample);
    est.draws = subsample_counts(gram.sizes(), subsample->upsilon);
  } else {
    est.c1_mode = C1Mode::kExact;
    est.c1 = c1_exact(gram, term_cap);
  }
  return est;
}

double f_hat(double a2, double c1, double eta) {
  if (std::abs(c1) < 1e-300) return std::numeric_limits<double>::infinity();
  return a2 * a2 * a2 / (c1 * c1) * eta;
}

}  // namespace splitplot
