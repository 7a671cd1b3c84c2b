#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdisim/linalg.hpp"
#include "fdisim/rng.hpp"

namespace fdisim {

/// Raised when the simulation reaches a state it cannot continue from
/// (non-finite plant state, indefinite covariance, ...).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-axis double integrator x = [p; v], discretized with zero-order-hold
/// acceleration: p' = p + v dt + ½ u dt², v' = v + u dt.
struct DynamicsModel {
  double dt = 0.01;
  Mat6 A = Mat6::Identity();
  Mat63 B = Mat63::Zero();
  Mat6 Q = Mat6::Zero();
  Mat6 noise_factor = Mat6::Zero();  // F Fᵀ = Q

  /// Q = σ² B Bᵀ: white acceleration disturbance held over each step.
  static DynamicsModel double_integrator(double dt, double accel_noise_std);

  void validate() const;
};

struct VehicleState {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();

  Vec6 stacked() const;
  static VehicleState from_stacked(double t, const Vec6& x);
};

struct Waypoint {
  Vec3 p;
  double t;
};

struct WaypointPlan {
  std::vector<Waypoint> waypoints;
  bool loop = false;

  void validate() const;
  double period() const { return waypoints.back().t - waypoints.front().t; }
};

struct Reference {
  Vec3 p;
  Vec3 v;
};

/// Piecewise-linear reference. Holds the first waypoint before the plan
/// starts and the last one after it ends, unless the plan loops.
Reference reference_at(double t, const WaypointPlan& plan);

struct ControlCommand {
  Vec3 u = Vec3::Zero();
  double a_max = 0.0;
};

struct ControllerGains {
  double kp = 2.0;
  double kd = 3.0;
};

/// PD tracking law on the *estimated* state, saturated componentwise.
ControlCommand controller_cmd(const Vec3& est_p, const Vec3& est_v, const Vec3& p_ref,
                              const Vec3& v_ref, const ControllerGains& gains, double a_max);

/// x' = A x + B u + w, w ~ N(0, Q). Always draws six normals from rng.
VehicleState step_dynamics(const VehicleState& s, const ControlCommand& cmd,
                           const DynamicsModel& model, Rng& rng);

enum class EventClass : int {
  DynamicsTick = 0,
  MeasurementDelivery = 1,
  DetectorTick = 2,
  Logging = 3,
};

struct SimEvent {
  double deliver_time = 0.0;
  EventClass cls = EventClass::DynamicsTick;
  int sensor_id = 0;
  std::int64_t seq = 0;
  std::size_t payload = 0;  // not part of the ordering

  auto key() const { return std::tuple(deliver_time, static_cast<int>(cls), sensor_id, seq); }
  friend bool operator<(const SimEvent& a, const SimEvent& b) { return a.key() < b.key(); }
};

/// Min-queue under the (deliver_time, class, sensor_id, seq) total order.
class EventQueue {
 public:
  /// Rejects an event whose ordering key is already queued.
  void push(const SimEvent& e);

  /// nullopt signals end of simulation.
  std::optional<SimEvent> next_event();

  bool empty() const { return events_.empty(); }
  std::size_t size() const { return events_.size(); }

 private:
  std::set<SimEvent> events_;
};

}  // namespace fdisim
