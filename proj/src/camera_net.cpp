#include "fdisim/camera_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace fdisim {

void CameraModel::validate() const {
  if (!(p_miss >= 0.0 && p_miss < 1.0)) throw std::invalid_argument("camera: p_miss must be in [0, 1)");
  if (!(bearing_std > 0.0)) throw std::invalid_argument("camera: bearing_std must be > 0");
  if (!(rate > 0.0)) throw std::invalid_argument("camera: rate must be > 0");
  if (fov_half_angle && !(*fov_half_angle > 0.0)) throw std::invalid_argument("camera: fov half-angle must be > 0");
  if (fov_half_angle && boresight.norm() < 1e-12) throw std::invalid_argument("camera: boresight must be nonzero");
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

namespace {

// Orthonormal pair spanning the plane perpendicular to unit vector b.
std::pair<Vec3, Vec3> perpendicular_basis(const Vec3& b) {
  const Vec3 helper = std::abs(b.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = b.cross(helper).normalized();
  return {e1, b.cross(e1)};
}

}  // namespace

std::optional<BearingDetection> detect(const CameraModel& cam, const Vec3& true_p, double stamp, Rng& rng) {
  const double miss_draw = rng.uniform();
  const double axis_draw = rng.uniform();
  const double angle = rng.normal(0.0, cam.bearing_std);

  const Vec3 d = true_p - cam.position;
  const double range = d.norm();
  if (miss_draw < cam.p_miss || range <= 1e-9) return std::nullopt;
  const Vec3 b = d / range;
  if (cam.fov_half_angle && angle_between(cam.boresight, b) > *cam.fov_half_angle) return std::nullopt;

  const auto [e1, e2] = perpendicular_basis(b);
  const double phi = 2.0 * std::numbers::pi * axis_draw;
  const Vec3 axis = std::cos(phi) * e1 + std::sin(phi) * e2;
  // Rotation about an axis perpendicular to b.
  const Vec3 rotated = std::cos(angle) * b + std::sin(angle) * axis.cross(b);
  return BearingDetection{cam.id, stamp, rotated.normalized()};
}

ParticleSet pf_init(const Vec3& box_min, const Vec3& box_max, std::size_t n, double vel_std, Rng& rng) {
  if (n == 0) throw std::invalid_argument("pf_init: need at least one particle");
  if ((box_max - box_min).minCoeff() < 0.0) throw std::invalid_argument("pf_init: box max below min");
  ParticleSet ps;
  ps.particles.resize(n);
  for (auto& part : ps.particles) {
    for (int a = 0; a < 3; ++a) part.p(a) = rng.uniform(box_min(a), box_max(a));
    for (int a = 0; a < 3; ++a) part.v(a) = rng.normal(0.0, vel_std);
  }
  ps.weights.assign(n, 1.0 / static_cast<double>(n));
  ps.ess = static_cast<double>(n);
  return ps;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, Rng& rng) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> idx(n);
  const double step = 1.0 / static_cast<double>(n);
  double u = rng.uniform() * step;
  double cumulative = weights[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (u > cumulative && j + 1 < n) cumulative += weights[++j];
    idx[i] = j;
    u += step;
  }
  return idx;
}

namespace {

double effective_sample_size(const std::vector<double>& w) {
  double s = 0.0;
  for (double x : w) s += x * x;
  return 1.0 / s;
}

TrackEstimate weighted_moments(const ParticleSet& ps, double stamp, int n_used) {
  TrackEstimate est;
  est.stamp = stamp;
  est.n_detections_used = n_used;
  for (std::size_t i = 0; i < ps.size(); ++i) est.p_mean += ps.weights[i] * ps.particles[i].p;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Vec3 d = ps.particles[i].p - est.p_mean;
    est.p_cov += ps.weights[i] * d * d.transpose();
  }
  est.p_cov = 0.5 * (est.p_cov + est.p_cov.transpose()).eval();
  return est;
}

}  // namespace

PfStepResult pf_step(ParticleSet& ps, std::span<const BearingDetection> detections,
                     std::span<const CameraModel> cams, const PfMotionModel& motion, double stamp,
                     Rng& rng) {
  const std::size_t n = ps.size();
  const double dt = motion.dt;

  if (dt > 0.0) {
    std::vector<double> jitter((3 * n + 1) / 2 * 2);
    for (std::size_t j = 0; j < jitter.size(); j += 2) std::tie(jitter[j], jitter[j + 1]) = rng.normal_pair();
    for (std::size_t i = 0; i < n; ++i) {
      auto& part = ps.particles[i];
      const Vec3 a(jitter[3 * i], jitter[3 * i + 1], jitter[3 * i + 2]);
      part.p += part.v * dt + 0.5 * dt * dt * motion.accel_std * a;
      part.v += dt * motion.accel_std * a;
    }
  }

  PfStepResult result;
  if (!detections.empty()) {
    struct Ray {
      Vec3 origin;
      Vec3 bearing;
      double inv_two_var;
    };
    std::vector<Ray> rays;
    rays.reserve(detections.size());
    for (const auto& det : detections) {
      const auto cam = std::find_if(cams.begin(), cams.end(), [&](const CameraModel& c) { return c.id == det.camera_id; });
      if (cam == cams.end()) throw std::invalid_argument("pf_step: detection from unknown camera");
      rays.push_back({cam->position, det.bearing, 1.0 / (2.0 * cam->bearing_std * cam->bearing_std)});
    }
    std::vector<double> logw(n);
    for (std::size_t i = 0; i < n; ++i) {
      double lw = std::log(ps.weights[i]);
      for (const auto& ray : rays) {
        const double theta = angle_between(ps.particles[i].p - ray.origin, ray.bearing);
        lw -= theta * theta * ray.inv_two_var;
      }
      logw[i] = lw;
    }
    const double max_lw = *std::max_element(logw.begin(), logw.end());
    double sum = 0.0;
    if (std::isfinite(max_lw)) {
      for (std::size_t i = 0; i < n; ++i) {
        ps.weights[i] = std::exp(logw[i] - max_lw);
        sum += ps.weights[i];
      }
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) {
      ps.weights.assign(n, 1.0 / static_cast<double>(n));
      result.diverged = true;
    } else {
      for (double& w : ps.weights) w /= sum;
    }
  }

  ps.ess = effective_sample_size(ps.weights);
  // Report the posterior before resampling adds sampling noise.
  result.estimate = weighted_moments(ps, stamp, static_cast<int>(detections.size()));

  if (ps.ess < 0.5 * static_cast<double>(n)) {
    const auto idx = systematic_resample(ps.weights, rng);
    std::vector<Particle> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = ps.particles[idx[i]];
    ps.particles = std::move(next);
    ps.weights.assign(n, 1.0 / static_cast<double>(n));
    ps.ess = static_cast<double>(n);
    result.resampled = true;
  }
  return result;
}

Measurement publish_track(const TrackEstimate& est, const LatencyBudget& budget,
                          const TrackPublishConfig& cfg, Rng& latency_rng, int sensor_id,
                          std::int64_t seq) {
  Mat3 cov = cfg.cov_inflation * est.p_cov;
  cov = 0.5 * (cov + cov.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  const double floor = cfg.cov_floor_std * cfg.cov_floor_std;
  const Vec3 lam = es.eigenvalues().cwiseMax(floor);
  cov = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();

  Measurement m;
  m.sensor_id = sensor_id;
  m.seq = seq;
  m.stamp = est.stamp;
  m.deliver_time = est.stamp + sample_latency(budget, latency_rng);
  m.value = est.p_mean;
  m.cov = cov;
  m.provenance = Provenance::Genuine;
  return m;
}

}  // namespace fdisim
