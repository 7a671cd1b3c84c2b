#pragma once

#include "fdisim/linalg.hpp"
#include "fdisim/rng.hpp"
#include "fdisim/sensor_emu.hpp"
#include "fdisim/sim_core.hpp"

namespace fdisim {

enum class AttackMode { Off, Meaconing };

struct AttackSpec {
  AttackMode mode = AttackMode::Off;
  double t_on = 0.0;                   // s
  Vec3 direction = Vec3::UnitX();      // unit
  double ramp_rate = 0.0;              // m/s

  void validate() const;
};

struct SpooferState {
  Vec3 anchor = Vec3::Zero();  // victim true position at first injection
  bool active = false;
};

/// Reference trajectory of the victim plus a linearly growing offset. The
/// victim's estimator sees a nominal mission while the vehicle is steered off.
Vec3 spoofer_position(double t, const AttackSpec& spec, const SpooferState& sp,
                      const Vec3& p_ref_victim);

/// Replaces the GNSS value with the spoofer broadcast (plus receiver-level
/// noise N(0, R) from rng) once m.stamp >= t_on. Only value and provenance
/// change. The first replacement latches sp.active and records the anchor.
Measurement apply_meaconing(const Measurement& m, const AttackSpec& spec, SpooferState& sp,
                            const WaypointPlan& plan, const Mat3& R, Rng& rng,
                            const Vec3& victim_true_p);

}  // namespace fdisim
