#include "splitplot/sim.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "splitplot/parallel.hpp"

namespace splitplot {
namespace {

constexpr std::array<std::size_t, 12> kPaperSizes{15, 15, 20, 35, 25, 20, 30, 30, 35, 20, 15, 25};

Matrix cholesky_lower(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw InputError("covariance matrix is not positive definite");
  return llt.matrixL();
}

std::vector<RowMatrix> draw_noise(const Design& design, const Matrix& chol_lower, Philox& rng) {
  std::normal_distribution<double> normal;
  const auto d = static_cast<Eigen::Index>(design.dim());
  std::vector<RowMatrix> groups;
  groups.reserve(design.groups());
  for (std::size_t i = 0; i < design.groups(); ++i) {
    RowMatrix z(static_cast<Eigen::Index>(design.size(i)), d);
    for (Eigen::Index r = 0; r < z.rows(); ++r)
      for (Eigen::Index c = 0; c < d; ++c) z(r, c) = normal(rng);
    groups.push_back(z * chol_lower.transpose());
  }
  return groups;
}

DataSet shifted(const std::vector<RowMatrix>& noise, const RowMatrix& means) {
  std::vector<RowMatrix> groups = noise;
  for (std::size_t i = 0; i < groups.size(); ++i) groups[i].rowwise() += means.row(static_cast<Eigen::Index>(i));
  return DataSet(std::move(groups));
}

}  // namespace

std::vector<std::size_t> paper_sizes(std::size_t a) {
  if (a == 0) throw InputError("need at least one group");
  std::vector<std::size_t> sizes(a);
  for (std::size_t i = 0; i < a; ++i) sizes[i] = kPaperSizes[i % kPaperSizes.size()];
  return sizes;
}

CovarianceModel ar_covariance(std::size_t d, double rho) { return CovarianceModel::autoregressive(d, rho); }

std::string_view to_string(Alternative alt) {
  switch (alt) {
    case Alternative::kNull: return "null";
    case Alternative::kTrend: return "trend";
    case Alternative::kOnePoint: return "one-point";
    case Alternative::kShift: return "shift";
  }
  return "null";
}

Alternative parse_alternative(std::string_view name) {
  if (name == "null") return Alternative::kNull;
  if (name == "trend") return Alternative::kTrend;
  if (name == "one-point") return Alternative::kOnePoint;
  if (name == "shift") return Alternative::kShift;
  throw InputError("unknown alternative '" + std::string(name) + "' (expected null, trend, one-point or shift)");
}

std::string_view to_string(TestKind test) {
  switch (test) {
    case TestKind::kZ: return "psi_z";
    case TestKind::kChi1: return "psi_chi";
    case TestKind::kKf: return "phi_kf";
  }
  return "phi_kf";
}

RowMatrix alternative_mean(Alternative kind, double delta, std::size_t a, std::size_t d) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InputError("delta must be a nonnegative number");
  RowMatrix mu = RowMatrix::Zero(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(d));
  if (kind == Alternative::kNull) return mu;
  for (std::size_t i = 1; i < a; i += 2) {
    auto row = mu.row(static_cast<Eigen::Index>(i));
    switch (kind) {
      case Alternative::kTrend:
        for (std::size_t k = 0; k < d; ++k)
          row(static_cast<Eigen::Index>(k)) = delta * static_cast<double>(k + 1) / static_cast<double>(d);
        break;
      case Alternative::kOnePoint:
        row(0) = delta;
        break;
      case Alternative::kShift:
        row.setConstant(delta);
        break;
      case Alternative::kNull:
        break;
    }
  }
  return mu;
}

DataSet sample_dataset(const Design& design, const RowMatrix& means, const Matrix& chol_lower, Philox& rng) {
  if (static_cast<std::size_t>(means.rows()) != design.groups() || static_cast<std::size_t>(means.cols()) != design.dim())
    throw InputError("mean table does not match the design");
  return shifted(draw_noise(design, chol_lower, rng), means);
}

void SimConfig::validate() const {
  if (sizes.empty()) throw InputError("simulation needs at least one group");
  if (dim == 0) throw InputError("simulation dimension must be >= 1");
  if (covariance.dim() != dim) throw InputError("covariance dimension does not match d");
  if (replications == 0) throw InputError("replications must be >= 1");
  if (deltas.empty()) throw InputError("delta grid is empty");
  for (double delta : deltas)
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw InputError("delta grid must be nonnegative");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie strictly between 0 and 1");
  if (!(upsilon > 0.0)) throw InputError("upsilon must be positive");
  if (alternative == Alternative::kShift && hypothesis.kind != HypothesisKind::kGrandMean &&
      hypothesis.kind != HypothesisKind::kTime)
    throw InputError("the shift alternative is only defined for the grand-mean and time hypotheses");
  const auto diag = validate_design(Design(sizes, dim));
  if (!diag.a1_feasible() || !diag.a2_feasible() || !diag.c1_feasible())
    throw InputError("infeasible design: " + diag.message());
}

const RateRow& SimResult::at(double delta, TestKind test) const {
  for (const auto& row : rows)
    if (row.delta == delta && row.test == test) return row;
  throw InputError("no result for delta " + std::to_string(delta));
}

SimResult estimate_rejection_rate(const SimConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const Design design(config.sizes, config.dim);
  const Matrix chol = cholesky_lower(config.covariance.materialize());
  const ProjectionPair projection = projection_for(config.hypothesis, design.groups(), design.dim());

  std::vector<RowMatrix> means;
  for (double delta : config.deltas)
    means.push_back(alternative_mean(config.alternative, delta, design.groups(), design.dim()));

  const std::size_t per_rep = config.deltas.size() * kAllTests.size();
  std::vector<unsigned char> decisions(config.replications * per_rep, 0);

  parallel_for(config.replications, config.threads, [&](std::size_t r) {
    Philox rng(config.seed, stream_tag::kData, r);
    const auto noise = draw_noise(design, chol, rng);
    const TestOptions options{config.alpha, config.upsilon, mix_seed(config.seed, r), false};
    for (std::size_t k = 0; k < config.deltas.size(); ++k) {
      const TestResult res = run_test(shifted(noise, means[k]), projection, options);
      unsigned char* out = &decisions[r * per_rep + k * kAllTests.size()];
      out[0] = res.decisions.z;
      out[1] = res.decisions.chi1;
      out[2] = res.decisions.kf;
    }
  });

  SimResult result;
  result.config = config;
  const double reps = static_cast<double>(config.replications);
  for (std::size_t k = 0; k < config.deltas.size(); ++k) {
    for (std::size_t t = 0; t < kAllTests.size(); ++t) {
      RateRow row;
      row.delta = config.deltas[k];
      row.test = kAllTests[t];
      row.replications = config.replications;
      for (std::size_t r = 0; r < config.replications; ++r) row.rejections += decisions[r * per_rep + k * kAllTests.size() + t];
      row.rate = static_cast<double>(row.rejections) / reps;
      row.se = std::sqrt(row.rate * (1.0 - row.rate) / reps);
      result.rows.push_back(row);
    }
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

PowerCurve power_curve(const SimConfig& config) {
  PowerCurve curve{estimate_rejection_rate(config)};
  const auto& rows = curve.result.rows;
  const RateRow* prev = nullptr;
  for (const auto& row : rows) {
    if (row.test != TestKind::kKf) continue;
    if (prev && row.delta > prev->delta) {
      const double se = std::max(std::hypot(row.se, prev->se), 1.0 / static_cast<double>(row.replications));
      curve.worst_drop_se = std::max(curve.worst_drop_se, (prev->rate - row.rate) / se);
    }
    prev = &row;
  }
  curve.monotone = curve.worst_drop_se <= 3.0;
  return curve;
}

std::vector<double> simulate_standardized_null(const Design& design, const Matrix& sigma,
                                               const ProjectionPair& projection, std::size_t replications,
                                               std::uint64_t seed, unsigned threads) {
  const Matrix chol = cholesky_lower(sigma);
  const auto moments = qf_moments(trace_powers(projection.sub(), sigma), projection.whole(), design.sizes());
  if (!(moments.variance > 0.0)) throw InputError("null variance of Q_N is not positive");
  const double sd = std::sqrt(moments.variance);
  std::vector<double> out(replications);
  parallel_for(replications, threads, [&](std::size_t r) {
    Philox rng(seed, stream_tag::kData, r);
    const DataSet data(draw_noise(design, chol, rng));
    out[r] = (q_statistic(data, projection.whole(), projection.sub()) - moments.mean) / sd;
  });
  return out;
}

}  // namespace splitplot
