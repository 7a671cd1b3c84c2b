#pragma once

#include <stdexcept>

#include "fdisim/scenario.hpp"

namespace fdisim {

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest ramp rate in [0, r_max] whose closed-loop run at the calibration
/// seed keeps every onboard GNSS residual energy during the attack at or
/// below (1 - margin)·gamma_on. Mitigation is disabled for these runs.
/// Throws CalibrationError when even a zero ramp breaks the bound.
CalibrationResult calibrate_stealth_rate(const ScenarioConfig& cfg, double gamma_on, double margin, int iters);

/// gamma_on taken from the configured monitor.
CalibrationResult calibrate_stealth_rate(const ScenarioConfig& cfg);

}  // namespace fdisim
