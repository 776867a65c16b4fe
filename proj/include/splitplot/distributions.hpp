#pragma once

namespace splitplot {

/// Degrees of freedom above which K_f is replaced by its normal limit.
inline constexpr double kNormalLimitDf = 1e7;

/// z_p, the p-quantile of the standard normal.
double normal_quantile(double p);

/// p-quantile of chi^2_f (f > 0, p in (0, 1)): bracketed Newton on the
/// regularized incomplete gamma, started from the Wilson-Hilferty value.
double chi2_quantile(double f, double p);

/// (1 - alpha)-quantile of K_f = (chi^2_f - f) / sqrt(2 f). f may be
/// +infinity; f > 1e7 uses z_{1-alpha}.
double kf_quantile(double f, double alpha);

/// P(K_f > w), consistent with kf_quantile.
double kf_survival(double f, double w);

}  // namespace splitplot
