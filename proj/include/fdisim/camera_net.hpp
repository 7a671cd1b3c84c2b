#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fdisim/linalg.hpp"
#include "fdisim/rng.hpp"
#include "fdisim/sensor_emu.hpp"

namespace fdisim {

struct CameraModel {
  int id = 0;
  Vec3 position = Vec3::Zero();
  double bearing_std = 0.005;  // rad
  double rate = 5.0;           // Hz
  double p_miss = 0.05;
  std::optional<double> fov_half_angle;  // rad, gates on the boresight
  Vec3 boresight = Vec3::UnitX();

  void validate() const;
};

struct BearingDetection {
  int camera_id = 0;
  double stamp = 0.0;
  Vec3 bearing = Vec3::UnitX();  // unit, camera -> target
};

/// Synthetic detector: misses with probability p_miss, otherwise returns the
/// true bearing rotated by N(0, σ_b²) about a uniformly drawn perpendicular
/// axis. Consumes four uniforms per call regardless of outcome.
std::optional<BearingDetection> detect(const CameraModel& cam, const Vec3& true_p, double stamp, Rng& rng);

struct Particle {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

struct ParticleSet {
  std::vector<Particle> particles;
  std::vector<double> weights;
  double ess = 0.0;

  std::size_t size() const { return particles.size(); }
};

/// Uniform positions in [box_min, box_max], velocities N(0, vel_std² I).
ParticleSet pf_init(const Vec3& box_min, const Vec3& box_max, std::size_t n, double vel_std, Rng& rng);

/// Constant-velocity propagation over dt with white acceleration jitter.
struct PfMotionModel {
  double dt = 0.2;
  double accel_std = 2.0;
};

struct TrackEstimate {
  double stamp = 0.0;
  Vec3 p_mean = Vec3::Zero();
  Mat3 p_cov = Mat3::Zero();
  int n_detections_used = 0;
};

struct PfStepResult {
  TrackEstimate estimate;
  bool resampled = false;
  bool diverged = false;
};

/// Offspring index per output slot; one uniform from rng.
std::vector<std::size_t> systematic_resample(std::span<const double> weights, Rng& rng);

/// Propagate, weight by bearing likelihoods, normalize, resample when
/// ESS < N/2, then report weighted mean and covariance of positions.
PfStepResult pf_step(ParticleSet& ps, std::span<const BearingDetection> detections,
                     std::span<const CameraModel> cams, const PfMotionModel& motion, double stamp,
                     Rng& rng);

struct TrackPublishConfig {
  double cov_inflation = 2.0;  // β
  double cov_floor_std = 0.1;  // m
};

/// External position measurement: cov = β·p_cov with eigenvalues floored at
/// σ_min², delivered after the network latency.
Measurement publish_track(const TrackEstimate& est, const LatencyBudget& budget,
                          const TrackPublishConfig& cfg, Rng& latency_rng, int sensor_id,
                          std::int64_t seq);

/// Angle between two directions, robust near 0 and π.
double angle_between(const Vec3& a, const Vec3& b);

}  // namespace fdisim
