#include "fdisim/chi2.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

namespace fdisim {

double chi2_cdf(double x, int dof) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_threshold(int dof, double alpha) {
  if (dof < 1) throw std::invalid_argument("chi2_threshold: dof must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("chi2_threshold: alpha must be in (0, 1)");

  const double target = 1.0 - alpha;
  double lo = 0.0;
  double hi = std::max(1.0, 2.0 * dof);
  while (chi2_cdf(hi, dof) < target) {
    lo = hi;
    hi *= 2.0;
  }
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 300; ++i) {
    mid = 0.5 * (lo + hi);
    const double f = chi2_cdf(mid, dof) - target;
    if (std::abs(f) <= 1e-12) break;
    if (f < 0.0) lo = mid; else hi = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  if (std::abs(chi2_cdf(mid, dof) - target) > 1e-10) {
    throw std::runtime_error("chi2_threshold: root-find did not converge");
  }
  return mid;
}

}  // namespace fdisim
