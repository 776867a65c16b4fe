#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "splitplot/common.hpp"

namespace splitplot {

/// P_k = I_k - J_k / k.
Matrix centering_matrix(std::size_t k);

/// Common covariance matrix Sigma of the model, materialized on demand.
class CovarianceModel {
 public:
  enum class Form { kExplicit, kAutoregressive, kIdentity, kCompoundSymmetry };

  static CovarianceModel identity(std::size_t d);
  /// Sigma_ij = rho^|i-j|, |rho| < 1.
  static CovarianceModel autoregressive(std::size_t d, double rho);
  /// Unit diagonal, rho off the diagonal; -1/(d-1) < rho < 1.
  static CovarianceModel compound_symmetry(std::size_t d, double rho);
  static CovarianceModel from_matrix(Matrix sigma);

  Form form() const noexcept { return form_; }
  std::size_t dim() const noexcept { return dim_; }
  double rho() const noexcept { return rho_; }
  /// Short text form: "identity", "ar:<rho>", "cs:<rho>", "explicit".
  std::string describe() const;

  /// Materialized d x d matrix; throws InputError unless positive definite
  /// (smallest eigenvalue > 1e-10 * largest).
  Matrix materialize() const;

 private:
  CovarianceModel(Form form, std::size_t d, double rho, Matrix sigma)
      : form_(form), dim_(d), rho_(rho), sigma_(std::move(sigma)) {}

  Form form_;
  std::size_t dim_;
  double rho_;
  Matrix sigma_;  // kExplicit only
};

/// tr((T_S Sigma)^k) for k = 1, 2, 3.
struct TraceSet {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
};

TraceSet trace_powers(const Matrix& sub_projection, const Matrix& sigma);

/// D = diag(N / n_i); the whole-plot part of the moments.
Vector inverse_fractions(const std::vector<std::size_t>& sizes);

/// tr^3((D T_W)^2) / tr^2((D T_W)^3).
double eta(const Matrix& whole_projection, const std::vector<std::size_t>& sizes);

/// Eigenvalues of T V_N T with V_N = (+)_i (N / n_i) Sigma, decreasing, and
/// their normalization beta_s = lambda_s / ||lambda||_2.
struct BetaSpectrum {
  std::vector<double> lambdas;
  std::vector<double> betas;
};

/// Uses T V_N T = (T_W D T_W) (x) (T_S Sigma T_S): two small eigensolves and
/// all pairwise products. Never forms the ad x ad matrix.
BetaSpectrum spectrum_tvt(const Matrix& whole_projection, const Matrix& sub_projection, const Matrix& sigma,
                          const std::vector<std::size_t>& sizes);

/// Third-moment degrees of freedom for K_f and its reciprocal.
struct DegreesOfFreedom {
  double f = 1.0;
  double tau = 1.0;  // 1 / f
};

/// f_P = [t2^3 / t3^2] * eta for known Sigma.
DegreesOfFreedom f_p_exact(const Matrix& whole_projection, const Matrix& sub_projection, const Matrix& sigma,
                           const std::vector<std::size_t>& sizes);

}  // namespace splitplot
