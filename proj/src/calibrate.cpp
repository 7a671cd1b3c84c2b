#include "fdisim/calibrate.hpp"

#include <sstream>

#include "fdisim/chi2.hpp"

namespace fdisim {

CalibrationResult calibrate_stealth_rate(const ScenarioConfig& cfg, double gamma_on, double margin, int iters) {
  if (!(margin > 0.0 && margin < 1.0)) throw std::invalid_argument("calibration margin must be in (0, 1)");
  if (iters < 1) throw std::invalid_argument("calibration needs at least one iteration");
  if (cfg.attack.spec.mode != AttackMode::Meaconing) {
    throw std::invalid_argument("calibration needs attack.mode = meaconing");
  }

  ScenarioConfig c = cfg;
  c.attack.auto_rate = false;
  c.mitigation.enabled = false;
  const std::uint64_t seed = cfg.attack.calibration_seed.value_or(cfg.seed);

  CalibrationResult res;
  res.gamma_on = gamma_on;
  res.bound = (1.0 - margin) * gamma_on;

  auto max_q = [&](double rate) {
    c.attack.spec.ramp_rate = rate;
    ++res.simulations;
    return simulate(c, seed).metrics.max_q_during_attack;
  };

  const double q0 = max_q(0.0);
  if (q0 > res.bound) {
    std::ostringstream os;
    os << "even a zero ramp rate gives max residual energy " << q0 << " above the bound " << res.bound
       << " (gamma_on " << gamma_on << ", margin " << margin << ")";
    throw CalibrationError(os.str());
  }
  const double q_hi = max_q(cfg.attack.r_max);
  if (q_hi <= res.bound) {
    res.ramp_rate = cfg.attack.r_max;
    res.max_q_at_rate = q_hi;
    res.r_max_stealthy = true;
    return res;
  }

  double lo = 0.0, hi = cfg.attack.r_max, q_lo = q0;
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double q = max_q(mid);
    if (q <= res.bound) {
      lo = mid;
      q_lo = q;
    } else {
      hi = mid;
    }
  }
  res.ramp_rate = lo;
  res.max_q_at_rate = q_lo;
  return res;
}

CalibrationResult calibrate_stealth_rate(const ScenarioConfig& cfg) {
  const double gamma_on = chi2_threshold(3 * cfg.monitor.window, cfg.monitor.alpha);
  return calibrate_stealth_rate(cfg, gamma_on, cfg.attack.margin, cfg.attack.iters);
}

}  // namespace fdisim
