#include "fdisim/attack.hpp"

#include <cmath>
#include <stdexcept>

namespace fdisim {

void AttackSpec::validate() const {
  if (!(t_on >= 0.0)) throw std::invalid_argument("attack: t_on must be >= 0");
  if (!(ramp_rate >= 0.0)) throw std::invalid_argument("attack: ramp_rate must be >= 0");
  if (std::abs(direction.norm() - 1.0) > 1e-9) throw std::invalid_argument("attack: direction must be a unit vector");
}

Vec3 spoofer_position(double t, const AttackSpec& spec, const SpooferState& /*sp*/,
                      const Vec3& p_ref_victim) {
  return p_ref_victim + (t - spec.t_on) * spec.ramp_rate * spec.direction;
}

Measurement apply_meaconing(const Measurement& m, const AttackSpec& spec, SpooferState& sp,
                            const WaypointPlan& plan, const Mat3& R, Rng& rng,
                            const Vec3& victim_true_p) {
  if (spec.mode == AttackMode::Off || m.stamp < spec.t_on) return m;
  if (!sp.active) {
    sp.active = true;
    sp.anchor = victim_true_p;
  }
  const Vec3 n(rng.normal(), rng.normal(), rng.normal());
  Measurement out = m;
  out.value = spoofer_position(m.stamp, spec, sp, reference_at(m.stamp, plan).p) + psd_factor(R) * n;
  out.provenance = Provenance::Spoofed;
  return out;
}

}  // namespace fdisim
