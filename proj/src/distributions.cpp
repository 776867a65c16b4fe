#include "splitplot/distributions.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <limits>

#include "splitplot/common.hpp"

namespace splitplot {
namespace {

void require_probability(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) throw InputError(std::string(what) + " must lie strictly between 0 and 1");
}

bool normal_regime(double f) { return std::isinf(f) || f > kNormalLimitDf; }

}  // namespace

double normal_quantile(double p) {
  require_probability(p, "probability");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double chi2_quantile(double f, double p) {
  require_probability(p, "probability");
  if (!(f > 0.0) || !std::isfinite(f)) throw InputError("chi-square degrees of freedom must be positive and finite");
  const double shape = 0.5 * f;
  // Solve on the tail that keeps the residual well conditioned.
  const bool upper = p > 0.5;
  const double target = upper ? 1.0 - p : p;
  const auto residual = [&](double x) {
    return upper ? target - boost::math::gamma_q(shape, 0.5 * x) : boost::math::gamma_p(shape, 0.5 * x) - target;
  };

  const double z = normal_quantile(p);
  const double c = 2.0 / (9.0 * f);
  double x = f * std::pow(std::max(1.0 - c + z * std::sqrt(c), 0.0), 3);
  if (!(x > 0.0)) x = f * 1e-3;

  // Residual is increasing in x; grow a bracket around the root.
  double lo = x, hi = x;
  while (residual(lo) > 0.0) {
    lo *= 0.5;
    if (lo < std::numeric_limits<double>::min()) return 0.0;
  }
  while (residual(hi) < 0.0) hi = hi * 2.0 + 1.0;

  x = std::clamp(x, lo, hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double r = residual(x);
    if (r == 0.0) return x;
    if (r < 0.0) lo = x; else hi = x;
    const double density = 0.5 * boost::math::gamma_p_derivative(shape, 0.5 * x);
    double next = density > 0.0 ? x - r / density : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x) || hi - lo <= 4e-16 * hi) return next;
    x = next;
  }
  return x;
}

double kf_quantile(double f, double alpha) {
  require_probability(alpha, "alpha");
  if (std::isnan(f) || !(f > 0.0)) throw InputError("K_f degrees of freedom must be positive");
  if (normal_regime(f)) return normal_quantile(1.0 - alpha);
  return (chi2_quantile(f, 1.0 - alpha) - f) / std::sqrt(2.0 * f);
}

double kf_survival(double f, double w) {
  if (std::isnan(f) || !(f > 0.0)) throw InputError("K_f degrees of freedom must be positive");
  if (std::isnan(w)) throw InputError("statistic is not a number");
  if (normal_regime(f)) return 0.5 * std::erfc(w / std::sqrt(2.0));
  const double x = f + w * std::sqrt(2.0 * f);
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * f, 0.5 * x);
}

}  // namespace splitplot
