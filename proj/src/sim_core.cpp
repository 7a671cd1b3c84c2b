#include "fdisim/sim_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fdisim {

DynamicsModel DynamicsModel::double_integrator(double dt, double accel_noise_std) {
  DynamicsModel m;
  m.dt = dt;
  m.A = Mat6::Identity();
  m.A.topRightCorner<3, 3>() = dt * Mat3::Identity();
  m.B.topRows<3>() = 0.5 * dt * dt * Mat3::Identity();
  m.B.bottomRows<3>() = dt * Mat3::Identity();
  m.Q = accel_noise_std * accel_noise_std * m.B * m.B.transpose();
  m.noise_factor = psd_factor(m.Q);
  m.validate();
  return m;
}

void DynamicsModel::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dynamics: dt must be > 0");
  if (!is_symmetric(Q, 1e-12)) throw std::invalid_argument("dynamics: Q must be symmetric");
  if (min_eigenvalue(Q) < -1e-15) throw std::invalid_argument("dynamics: Q must be PSD");
  if (!A.allFinite() || !B.allFinite()) throw std::invalid_argument("dynamics: non-finite A or B");
}

Vec6 VehicleState::stacked() const {
  Vec6 x;
  x << p, v;
  return x;
}

VehicleState VehicleState::from_stacked(double t, const Vec6& x) {
  return VehicleState{t, x.head<3>(), x.tail<3>()};
}

void WaypointPlan::validate() const {
  if (waypoints.size() < 2) throw std::invalid_argument("waypoint plan needs at least 2 waypoints");
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    if (!(waypoints[i].t > waypoints[i - 1].t)) {
      throw std::invalid_argument("waypoint arrival times must be strictly increasing");
    }
  }
  for (const auto& w : waypoints) {
    if (!w.p.allFinite() || !std::isfinite(w.t)) throw std::invalid_argument("non-finite waypoint");
  }
}

Reference reference_at(double t, const WaypointPlan& plan) {
  const auto& wps = plan.waypoints;
  const double t0 = wps.front().t;
  const double t1 = wps.back().t;
  if (t <= t0) return {wps.front().p, Vec3::Zero()};
  if (t >= t1) {
    if (!plan.loop) return {wps.back().p, Vec3::Zero()};
    t = t0 + std::fmod(t - t0, t1 - t0);
  }
  auto it = std::upper_bound(wps.begin(), wps.end(), t,
                             [](double tv, const Waypoint& w) { return tv < w.t; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double span = b.t - a.t;
  const Vec3 vel = (b.p - a.p) / span;
  const double s = (t - a.t) / span;
  return {a.p + s * (b.p - a.p), vel};
}

ControlCommand controller_cmd(const Vec3& est_p, const Vec3& est_v, const Vec3& p_ref,
                              const Vec3& v_ref, const ControllerGains& gains, double a_max) {
  Vec3 u = gains.kp * (p_ref - est_p) + gains.kd * (v_ref - est_v);
  return {u.cwiseMax(-a_max).cwiseMin(a_max), a_max};
}

VehicleState step_dynamics(const VehicleState& s, const ControlCommand& cmd,
                           const DynamicsModel& model, Rng& rng) {
  Vec6 n;
  for (int i = 0; i < 6; ++i) n(i) = rng.normal();
  const Vec6 x = model.A * s.stacked() + model.B * cmd.u + model.noise_factor * n;
  if (!x.allFinite()) {
    std::ostringstream os;
    os << "non-finite vehicle state at step " << std::llround(s.t / model.dt) + 1;
    throw SimulationError(os.str());
  }
  return VehicleState::from_stacked(s.t + model.dt, x);
}

void EventQueue::push(const SimEvent& e) {
  if (!events_.insert(e).second) {
    throw std::logic_error("event queue: duplicate event key");
  }
}

std::optional<SimEvent> EventQueue::next_event() {
  if (events_.empty()) return std::nullopt;
  SimEvent e = *events_.begin();
  events_.erase(events_.begin());
  return e;
}

}  // namespace fdisim
