#include <splitplot/estimators.hpp>
#include <splitplot/kron.hpp>

#include <doctest.h>

#include "oracles.hpp"

using namespace splitplot;

namespace {

double rel(double x, double ref) { return std::abs(x - ref) / std::max(1e-300, std::abs(ref)); }

DataSet shifted(const DataSet& ds, std::mt19937_64& gen) {
  std::vector<RowMatrix> g = ds.groups();
  for (auto& x : g) {
    const Matrix c = 50.0 * oracle::random_matrix(1, static_cast<std::size_t>(x.cols()), gen);
    for (Eigen::Index r = 0; r < x.rows(); ++r) x.row(r) += c.row(0);
  }
  return DataSet(std::move(g));
}

DataSet permuted(const DataSet& ds, std::mt19937_64& gen) {
  std::vector<RowMatrix> g = ds.groups();
  for (auto& x : g) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), gen);
    RowMatrix y(x.rows(), x.cols());
    for (std::size_t r = 0; r < order.size(); ++r) y.row(static_cast<Eigen::Index>(r)) = x.row(order[r]);
    x = y;
  }
  return DataSet(std::move(g));
}

DataSet scaled(const DataSet& ds, double c) {
  std::vector<RowMatrix> g = ds.groups();
  for (auto& x : g) x *= c;
  return DataSet(std::move(g));
}

}  // namespace

TEST_CASE("projected rows and Gram cache match dense products") {
  std::mt19937_64 gen(1);
  const RowMatrix x = oracle::random_matrix(4, 3, gen);
  for (const Matrix& ts : {Matrix(Matrix::Identity(3, 3)), oracle::centering(3), oracle::averaging(3),
                           build_projection(oracle::random_matrix(2, 3, gen))}) {
    const RowMatrix p = project_rows(x, ts);
    CHECK(oracle::max_abs_diff(p, RowMatrix(x * ts)) < 1e-13);

    const DataSet ds({x});
    const GramCache gram(ds, ts);
    RowMatrix centered = x;
    const Eigen::RowVectorXd mean = x.colwise().mean();
    for (Eigen::Index r = 0; r < 4; ++r) centered.row(r) -= mean;
    const Matrix y = centered * ts;
    CHECK(oracle::max_abs_diff(gram.group(0), Matrix(y * y.transpose())) < 1e-12);
    CHECK(oracle::max_abs_diff(gram.group(0), Matrix(gram.group(0).transpose())) == 0.0);
  }

  RowMatrix c(3, 2);
  c << 1, 2, 1, 2, 1, 2;
  const GramCache cst(DataSet({c}), Matrix::Identity(2, 2));
  CHECK(cst.group(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(GramCache(DataSet({c}), Matrix::Identity(3, 3)), InputError);
}

TEST_CASE("A1 worked example and edge cases") {
  RowMatrix x(2, 2);
  x << 1, 0, 0, 0;
  CHECK(a1(GramCache(DataSet({x}), Matrix::Identity(2, 2))) == doctest::Approx(0.5));

  RowMatrix c = RowMatrix::Constant(7, 3, 4.0);
  const GramCache cst(DataSet({c}), Matrix::Identity(3, 3));
  CHECK(a1(cst) == 0.0);
  CHECK(a2(cst) == 0.0);
  CHECK(c1_exact(cst) == 0.0);
  CHECK(c1_subsampled(cst, {0.5, 9}) == 0.0);

  CHECK_THROWS_WITH_AS(a1(GramCache(DataSet({RowMatrix::Zero(1, 2)}), Matrix::Identity(2, 2))),
                       doctest::Contains("A1 requires"), InputError);
  CHECK_THROWS_WITH_AS(a2(GramCache(DataSet({RowMatrix::Zero(3, 2)}), Matrix::Identity(2, 2))),
                       doctest::Contains("A2 requires"), InputError);
  CHECK_THROWS_AS(c1_exact(GramCache(DataSet({RowMatrix::Zero(5, 2)}), Matrix::Identity(2, 2))), InputError);
}

TEST_CASE("A2 with orthogonal pair differences is zero") {
  // Rows e1, 0, e2, 0: the differences of disjoint pairs are orthogonal or zero.
  RowMatrix x = RowMatrix::Zero(4, 2);
  x(0, 0) = 1.0;
  x(2, 1) = 1.0;
  const GramCache gram(DataSet({x}), Matrix::Identity(2, 2));
  CHECK(std::abs(a2(gram)) < 1e-15);
}

TEST_CASE("Gram-based estimators equal the literal enumeration oracles") {
  std::mt19937_64 gen(77);
  for (int rep = 0; rep < 6; ++rep) {
    const std::size_t d = 2 + rep % 4;
    const std::vector<std::size_t> sizes{static_cast<std::size_t>(6 + rep % 3), 7, 3};
    const DataSet ds = oracle::random_dataset(sizes, d, 100 + rep);
    const Matrix ts = rep % 2 ? oracle::centering(d) : Matrix(Matrix::Identity(d, d));
    const GramCache gram(ds, ts);
    CHECK(rel(a1(gram), oracle::a1_raw(ds, ts)) < 1e-12);
    CHECK(rel(a2(gram), oracle::a2_raw(ds, ts)) < 1e-12);
    CHECK(rel(c1_exact(gram), oracle::c1_raw(ds, ts)) < 1e-12);
  }
}

TEST_CASE("c1_exact matches the ordered 6-tuple oracle on single groups of 6 and 7") {
  for (std::size_t n : {6u, 7u}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const DataSet ds = oracle::random_dataset({n}, 2 + seed % 2, seed * 31 + n);
      const Matrix ts = oracle::centering(ds.design().dim());
      CHECK(rel(c1_exact(GramCache(ds, ts)), oracle::c1_raw(ds, ts)) < 1e-12);
    }
  }
}

TEST_CASE("c1_exact respects the term cap") {
  const DataSet ds = oracle::random_dataset({10, 10}, 2, 4);
  const GramCache gram(ds, Matrix::Identity(2, 2));
  CHECK_THROWS_WITH_AS(c1_exact(gram, 1000), doctest::Contains("subsampl"), InputError);
  CHECK_NOTHROW(c1_exact(gram, 1'000'000));
}

TEST_CASE("subsample counts") {
  const auto w = subsample_counts({15, 35, 5, 6}, 0.05);
  CHECK(w == std::vector<std::uint64_t>{251, 81158, 0, 1});
  CHECK(oracle::binom(15, 6) == 5005.0);
  CHECK(oracle::binom(35, 6) == 1623160.0);
  CHECK_THROWS_AS(subsample_counts({10}, 0.0), InputError);
}

TEST_CASE("estimator invariances") {
  std::mt19937_64 gen(5);
  const DataSet ds = oracle::random_dataset({8, 7}, 4, 55);
  const Matrix ts = oracle::centering(4);
  const GramCache base(ds, ts);
  const double b1 = a1(base), b2 = a2(base), b3 = c1_exact(base);
  const SubsampleConfig cfg{0.5, 3};
  const double bs = c1_subsampled(base, cfg);

  const GramCache sh(shifted(ds, gen), ts);
  CHECK(rel(a1(sh), b1) < 1e-9);
  CHECK(rel(a2(sh), b2) < 1e-9);
  CHECK(rel(c1_exact(sh), b3) < 1e-9);
  CHECK(rel(c1_subsampled(sh, cfg), bs) < 1e-9);

  const GramCache pm(permuted(ds, gen), ts);
  CHECK(rel(a1(pm), b1) < 1e-12);
  CHECK(rel(a2(pm), b2) < 1e-12);
  CHECK(rel(c1_exact(pm), b3) < 1e-12);

  const double c = 1.7;
  const GramCache sc(scaled(ds, c), ts);
  CHECK(rel(a1(sc), c * c * b1) < 1e-9);
  CHECK(rel(a2(sc), std::pow(c, 4) * b2) < 1e-9);
  CHECK(rel(c1_exact(sc), std::pow(c, 6) * b3) < 1e-9);
}

TEST_CASE("A2 is nonnegative") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const DataSet ds = oracle::random_dataset({4, 5}, 1 + seed % 3, seed);
    CHECK(a2(GramCache(ds, Matrix::Identity(ds.design().dim(), ds.design().dim()))) >= 0.0);
  }
}

TEST_CASE("subsampled C1 is deterministic and seed-sensitive") {
  const DataSet ds = oracle::random_dataset({9, 8}, 3, 8);
  const GramCache gram(ds, Matrix::Identity(3, 3));
  CHECK(c1_subsampled(gram, {0.2, 1}) == c1_subsampled(gram, {0.2, 1}));
  CHECK(c1_subsampled(gram, {0.2, 1}) != c1_subsampled(gram, {0.2, 2}));
}

TEST_CASE("subsampled C1 is conditionally unbiased and permutation invariant in mean") {
  const DataSet ds = oracle::random_dataset({8, 8}, 3, 21);
  const Matrix ts = oracle::centering(3);
  const GramCache gram(ds, ts);
  const double exact = c1_exact(gram);
  std::mt19937_64 gen(4);
  const GramCache pm(permuted(ds, gen), ts);
  std::vector<double> v, w;
  for (std::uint64_t s = 0; s < 4000; ++s) {
    v.push_back(c1_subsampled(gram, {0.05, s}));
    w.push_back(c1_subsampled(pm, {0.05, s + 1'000'000}));
  }
  const auto mv = oracle::mean_se(v), mw = oracle::mean_se(w);
  CHECK(std::abs(mv.mean - exact) <= 3.0 * mv.se);
  CHECK(std::abs(mw.mean - exact) <= 3.0 * mw.se);
}

TEST_CASE("Monte Carlo unbiasedness of A1, A2, C1 and C1*") {
  for (std::size_t d : {2u, 3u, 5u}) {
    CAPTURE(d);
    const Matrix sigma = oracle::ar(d, 0.6);
    const Matrix chol = sigma.llt().matrixL();
    const Matrix ts = oracle::centering(d);
    const TraceSet truth = trace_powers(ts, sigma);
    std::vector<double> e1, e2, e3, e4;
    const int reps = 3000;
    for (int r = 0; r < reps; ++r) {
      const DataSet ds = oracle::random_dataset({7, 6}, d, 9000 + r + 100000 * d, &chol);
      const GramCache gram(ds, ts);
      e1.push_back(a1(gram));
      e2.push_back(a2(gram));
      e3.push_back(c1_exact(gram));
      e4.push_back(c1_subsampled(gram, {0.5, static_cast<std::uint64_t>(r)}));
    }
    const auto m1 = oracle::mean_se(e1), m2 = oracle::mean_se(e2), m3 = oracle::mean_se(e3), m4 = oracle::mean_se(e4);
    CHECK(std::abs(m1.mean - truth.t1) <= 3.0 * m1.se);
    CHECK(std::abs(m2.mean - truth.t2) <= 3.0 * m2.se);
    CHECK(std::abs(m3.mean - truth.t3) <= 3.0 * m3.se);
    CHECK(std::abs(m4.mean - truth.t3) <= 3.0 * m4.se);
  }
}

TEST_CASE("estimate_traces bundles the estimators") {
  const DataSet ds = oracle::random_dataset({8, 3, 6}, 3, 12);
  const GramCache gram(ds, Matrix::Identity(3, 3));
  const auto exact = estimate_traces(gram, nullptr);
  CHECK(exact.c1_mode == C1Mode::kExact);
  CHECK(exact.a1 == a1(gram));
  CHECK(exact.a2 == a2(gram));
  CHECK(exact.c1 == c1_exact(gram));
  CHECK(exact.a1_groups == std::vector<std::size_t>{0, 1, 2});
  CHECK(exact.a2_groups == std::vector<std::size_t>{0, 2});
  CHECK(exact.c1_groups == std::vector<std::size_t>{0, 2});

  const SubsampleConfig cfg{0.05, 7};
  const auto sub = estimate_traces(gram, &cfg);
  CHECK(sub.c1_mode == C1Mode::kSubsampled);
  CHECK(sub.c1 == c1_subsampled(gram, cfg));
  CHECK(sub.draws == std::vector<std::uint64_t>{2, 0, 1});
}

TEST_CASE("f_hat") {
  CHECK(f_hat(2.5, 2.5, 1.0) == doctest::Approx(2.5));
  CHECK(std::isinf(f_hat(1.0, 0.0, 1.0)));
  const double lambda = 1.3;
  CHECK(f_hat(lambda * lambda, lambda * lambda * lambda, 1.0) == doctest::Approx(1.0));
  CHECK(f_hat(2.0, 1.0, 3.0) == doctest::Approx(24.0));
}
