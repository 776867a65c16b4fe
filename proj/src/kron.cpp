#include "splitplot/kron.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace splitplot {
namespace {

// Eigenvalues of a symmetric matrix with round-off negatives clamped to zero.
Vector clamped_spectrum(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  Vector values = eig.eigenvalues();
  const double scale = values.cwiseAbs().maxCoeff();
  for (auto& v : values) {
    if (v < 0.0 && -v <= 1e-12 * scale) v = 0.0;
  }
  return values;
}

void require_square(const Matrix& m, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != n || static_cast<std::size_t>(m.cols()) != n)
    throw InputError(std::string(what) + " must be " + std::to_string(n) + " x " + std::to_string(n));
}

}  // namespace

Matrix centering_matrix(std::size_t k) {
  if (k == 0) throw InputError("centering matrix needs k >= 1");
  const auto n = static_cast<Eigen::Index>(k);
  Matrix p = Matrix::Identity(n, n);
  p.array() -= 1.0 / static_cast<double>(k);
  return p;
}

CovarianceModel CovarianceModel::identity(std::size_t d) {
  if (d == 0) throw InputError("covariance dimension must be >= 1");
  return CovarianceModel(Form::kIdentity, d, 0.0, Matrix());
}

CovarianceModel CovarianceModel::autoregressive(std::size_t d, double rho) {
  if (d == 0) throw InputError("covariance dimension must be >= 1");
  if (!(std::abs(rho) < 1.0)) throw InputError("autoregressive parameter must satisfy |rho| < 1");
  return CovarianceModel(Form::kAutoregressive, d, rho, Matrix());
}

CovarianceModel CovarianceModel::compound_symmetry(std::size_t d, double rho) {
  if (d == 0) throw InputError("covariance dimension must be >= 1");
  const double lower = d > 1 ? -1.0 / static_cast<double>(d - 1) : -1.0;
  if (!(rho < 1.0 && rho > lower)) throw InputError("compound-symmetry parameter out of range");
  return CovarianceModel(Form::kCompoundSymmetry, d, rho, Matrix());
}

CovarianceModel CovarianceModel::from_matrix(Matrix sigma) {
  if (sigma.rows() == 0 || sigma.rows() != sigma.cols()) throw InputError("covariance matrix must be square");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * sigma.cwiseAbs().maxCoeff())
    throw InputError("covariance matrix must be symmetric");
  const auto d = static_cast<std::size_t>(sigma.rows());
  return CovarianceModel(Form::kExplicit, d, 0.0, std::move(sigma));
}

std::string CovarianceModel::describe() const {
  std::ostringstream os;
  switch (form_) {
    case Form::kIdentity: os << "identity"; break;
    case Form::kAutoregressive: os << "ar:" << rho_; break;
    case Form::kCompoundSymmetry: os << "cs:" << rho_; break;
    case Form::kExplicit: os << "explicit"; break;
  }
  return os.str();
}

Matrix CovarianceModel::materialize() const {
  const auto d = static_cast<Eigen::Index>(dim_);
  Matrix sigma;
  switch (form_) {
    case Form::kIdentity:
      sigma = Matrix::Identity(d, d);
      break;
    case Form::kAutoregressive:
      sigma.resize(d, d);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) sigma(i, j) = std::pow(rho_, static_cast<double>(std::abs(i - j)));
      break;
    case Form::kCompoundSymmetry:
      sigma = Matrix::Constant(d, d, rho_);
      sigma.diagonal().setOnes();
      break;
    case Form::kExplicit:
      sigma = sigma_;
      break;
  }
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(sigma, Eigen::EigenvaluesOnly).eigenvalues();
  if (!(ev.minCoeff() > 1e-10 * ev.maxCoeff())) throw InputError("covariance matrix is not positive definite");
  return sigma;
}

TraceSet trace_powers(const Matrix& sub_projection, const Matrix& sigma) {
  const auto d = static_cast<std::size_t>(sigma.rows());
  require_square(sigma, d, "covariance");
  require_square(sub_projection, d, "sub-plot projection");
  const Matrix m = sub_projection * sigma;
  const Matrix m2 = m * m;
  // tr(AB) = sum_ij A_ij B_ji, so the cube never needs a third product.
  return {m.trace(), m2.trace(), m2.cwiseProduct(m.transpose()).sum()};
}

Vector inverse_fractions(const std::vector<std::size_t>& sizes) {
  if (sizes.empty()) throw InputError("no groups");
  double total = 0.0;
  for (auto n : sizes) {
    if (n == 0) throw InputError("group sizes must be >= 1");
    total += static_cast<double>(n);
  }
  Vector dvec(static_cast<Eigen::Index>(sizes.size()));
  for (std::size_t i = 0; i < sizes.size(); ++i) dvec(static_cast<Eigen::Index>(i)) = total / static_cast<double>(sizes[i]);
  return dvec;
}

double eta(const Matrix& whole_projection, const std::vector<std::size_t>& sizes) {
  require_square(whole_projection, sizes.size(), "whole-plot projection");
  const Matrix m = inverse_fractions(sizes).asDiagonal() * whole_projection;
  const Matrix m2 = m * m;
  const double tr2 = m2.trace();
  const double tr3 = m2.cwiseProduct(m.transpose()).sum();
  if (tr3 == 0.0 || std::abs(tr3) <= 1e-14 * std::pow(std::abs(tr2), 1.5))
    throw InputError("degenerate whole-plot factor: tr((D T_W)^3) = 0");
  return tr2 * tr2 * tr2 / (tr3 * tr3);
}

BetaSpectrum spectrum_tvt(const Matrix& whole_projection, const Matrix& sub_projection, const Matrix& sigma,
                          const std::vector<std::size_t>& sizes) {
  const auto d = static_cast<std::size_t>(sigma.rows());
  require_square(sigma, d, "covariance");
  require_square(sub_projection, d, "sub-plot projection");
  require_square(whole_projection, sizes.size(), "whole-plot projection");

  const Vector dvec = inverse_fractions(sizes);
  const Vector whole = clamped_spectrum(whole_projection * dvec.asDiagonal() * whole_projection);
  const Vector sub = clamped_spectrum(sub_projection * sigma * sub_projection);

  BetaSpectrum out;
  out.lambdas.reserve(static_cast<std::size_t>(whole.size() * sub.size()));
  for (double w : whole)
    for (double s : sub) out.lambdas.push_back(w * s);
  std::sort(out.lambdas.begin(), out.lambdas.end(), std::greater<>());

  double norm2 = 0.0;
  for (double l : out.lambdas) norm2 += l * l;
  if (!(norm2 > 0.0)) throw InputError("null hypothesis matrix annihilates covariance: all eigenvalues are zero");
  const double norm = std::sqrt(norm2);
  out.betas.reserve(out.lambdas.size());
  for (double l : out.lambdas) out.betas.push_back(l / norm);
  return out;
}

DegreesOfFreedom f_p_exact(const Matrix& whole_projection, const Matrix& sub_projection, const Matrix& sigma,
                           const std::vector<std::size_t>& sizes) {
  const TraceSet t = trace_powers(sub_projection, sigma);
  if (t.t3 == 0.0) throw InputError("degenerate sub-plot factor: tr((T_S Sigma)^3) = 0");
  const double f = t.t2 * t.t2 * t.t2 / (t.t3 * t.t3) * eta(whole_projection, sizes);
  return {f, 1.0 / f};
}

}  // namespace splitplot
