#pragma once

namespace fdisim {

/// P(X <= x) for X ~ χ²(dof).
double chi2_cdf(double x, int dof);

/// (1 - alpha) quantile of χ²(dof), found by bisection on the regularized
/// lower incomplete gamma function until |CDF(γ) - (1 - alpha)| <= 1e-10.
/// Throws std::invalid_argument unless dof >= 1 and 0 < alpha < 1.
double chi2_threshold(int dof, double alpha);

}  // namespace fdisim
