#include "fdisim/scenario.hpp"

#include <cmath>
#include <sstream>

#include "fdisim/attack.hpp"
#include "fdisim/calibrate.hpp"
#include "fdisim/camera_net.hpp"
#include "fdisim/detector.hpp"
#include "fdisim/estimator.hpp"

namespace fdisim {

namespace {

constexpr int kGnssId = 0;
constexpr int kTrackId = 1;

std::int64_t steps_of(double seconds, double dt) { return std::llround(seconds / dt); }

// Written out so a script summing in the same order reproduces it bit for bit.
double norm3(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

RunResult simulate(const ScenarioConfig& cfg, std::uint64_t seed) {
  const DynamicsModel model = cfg.dynamics();
  const double dt = cfg.dt;
  const std::int64_t K = cfg.duration > 0.0 ? steps_of(cfg.duration, dt) : 0;
  const std::int64_t gnss_period = steps_of(1.0 / cfg.gnss.rate, dt);
  const std::int64_t cam_period = steps_of(1.0 / cfg.camera_net.rate, dt);

  RunResult out;
  out.seed = seed;
  out.ramp_rate = cfg.attack.spec.mode == AttackMode::Off ? 0.0 : cfg.attack.spec.ramp_rate;
  if (K == 0) {
    out.metrics = compute_metrics(out.trace, cfg);
    return out;
  }

  Rng dyn_rng = Rng::substream(seed, "dynamics");
  Rng gnss_noise_rng = Rng::substream(seed, "gnss-noise");
  Rng gnss_latency_rng = Rng::substream(seed, "gnss-latency");
  Rng camera_rng = Rng::substream(seed, "camera");
  Rng pf_rng = Rng::substream(seed, "pf");
  Rng camera_latency_rng = Rng::substream(seed, "camera-latency");
  Rng attack_rng = Rng::substream(seed, "attack");

  const Reference ref0 = reference_at(0.0, cfg.plan);
  VehicleState truth;
  truth.t = 0.0;
  truth.p = ref0.p;
  truth.v = Vec3::Zero();

  EstimatorConfig ecfg;
  ecfg.model = model;
  ecfg.x0 = truth.stacked();
  Vec6 p0diag;
  const double sp = cfg.estimator.init_pos_std, sv = cfg.estimator.init_vel_std;
  p0diag << sp * sp, sp * sp, sp * sp, sv * sv, sv * sv, sv * sv;
  ecfg.P0 = p0diag.asDiagonal();
  ecfg.buffer_len = static_cast<std::size_t>(std::ceil(cfg.estimator.buffer_horizon / dt - 1e-9)) + 1;
  ecfg.external_sensor_id = kTrackId;
  ecfg.gnss_r_inflation = cfg.mitigation.gnss_r_inflation;
  ecfg.monitor = MonitorConfig::make(cfg.monitor.alpha, 3, cfg.monitor.window);
  OnboardEstimator estimator(ecfg);

  OffboardDetector detector(cfg.detector, model);

  const Vec3 half = Vec3::Constant(cfg.pf.init_half_extent);
  ParticleSet particles = pf_init(ref0.p - half, ref0.p + half, cfg.pf.particles, cfg.pf.init_vel_std, pf_rng);
  PfMotionModel motion;
  motion.accel_std = cfg.pf.accel_std;

  const AttackSpec& spec = cfg.attack.spec;
  SpooferState spoofer;
  MeasurementHook hook;
  Vec3 hook_true_p = Vec3::Zero();
  if (spec.mode == AttackMode::Meaconing) {
    hook = [&](const Measurement& m) {
      return apply_meaconing(m, spec, spoofer, cfg.plan, cfg.gnss.R, attack_rng, hook_true_p);
    };
  }

  std::vector<Measurement> inbox;
  EventQueue queue;
  queue.push({0.0, EventClass::DynamicsTick, 0, 0, 0});
  std::int64_t gnss_seq = 0;
  std::int64_t track_seq = 0;
  bool first_camera_tick = true;
  Trace& tr = out.trace;

  try {
    while (auto ev = queue.next_event()) {
      if (ev->deliver_time > cfg.duration + 1e-9) break;
      switch (ev->cls) {
        case EventClass::DynamicsTick: {
          const std::int64_t k = ev->seq;
          const double t = static_cast<double>(k) * dt;
          truth.t = t;
          const Reference ref = reference_at(t, cfg.plan);
          tr.truth.push_back({t, truth.p, truth.v, ref.p});
          if (k == K) break;

          if (k % gnss_period == 0) {
            hook_true_p = truth.p;
            Measurement m = emulate_gnss(truth, cfg.gnss, cfg.gnss_latency, hook, gnss_noise_rng,
                                         gnss_latency_rng, kGnssId, gnss_seq++);
            tr.gnss.push_back({m.stamp, m.deliver_time, m.value, m.provenance});
            queue.push({m.deliver_time, EventClass::MeasurementDelivery, m.sensor_id, m.seq, inbox.size()});
            inbox.push_back(std::move(m));
          }

          if (k % cam_period == 0) {
            std::vector<BearingDetection> dets;
            for (const auto& cam : cfg.camera_net.cameras) {
              if (auto d = detect(cam, truth.p, t, camera_rng)) dets.push_back(*d);
            }
            motion.dt = first_camera_tick ? 0.0 : static_cast<double>(cam_period) * dt;
            first_camera_tick = false;
            const PfStepResult r = pf_step(particles, dets, cfg.camera_net.cameras, motion, t, pf_rng);
            if (r.diverged) ++out.pf_divergences;
            tr.track.push_back({t, r.estimate.p_mean, r.estimate.p_cov.trace(), r.estimate.n_detections_used});
            if (r.estimate.n_detections_used > 0) {
              Measurement m = publish_track(r.estimate, cfg.camera_net.latency, cfg.pf.publish,
                                            camera_latency_rng, kTrackId, track_seq++);
              queue.push({m.deliver_time, EventClass::MeasurementDelivery, m.sensor_id, m.seq, inbox.size()});
              inbox.push_back(std::move(m));
            }
          }

          const Vec6& xhat = estimator.mean();
          const ControlCommand cmd = controller_cmd(xhat.head<3>(), xhat.tail<3>(), ref.p, ref.v, cfg.gains, cfg.a_max);
          detector.record_input(k, cmd.u);
          truth = step_dynamics(truth, cmd, model, dyn_rng);
          estimator.predict(cmd.u);

          queue.push({static_cast<double>(k + 1) * dt, EventClass::DynamicsTick, 0, k + 1, 0});
          if (detector.is_window_end(k + 1)) {
            queue.push({static_cast<double>(k + 1) * dt, EventClass::DetectorTick, 0, k + 1, 0});
          }
          break;
        }
        case EventClass::MeasurementDelivery: {
          const Measurement& m = inbox[ev->payload];
          if (auto rec = estimator.fuse(m)) tr.residuals.push_back(*rec);
          detector.deliver(m);
          break;
        }
        case EventClass::DetectorTick: {
          if (auto d = detector.evaluate(ev->seq)) {
            tr.detector.push_back(*d);
            if (d->flag && cfg.mitigation.enabled) estimator.reconfigure(true);
          }
          break;
        }
        case EventClass::Logging:
          break;
      }
    }
  } catch (const SimulationError& e) {
    std::ostringstream os;
    os << "seed " << seed << ", t=" << truth.t << ": " << e.what();
    throw SimulationError(os.str());
  }

  out.dropped_measurements = estimator.dropped();
  out.skipped_windows = detector.skipped_windows();
  out.metrics = compute_metrics(tr, cfg);
  return out;
}

RunResult run_scenario(const ScenarioConfig& cfg, std::optional<std::uint64_t> seed) {
  const std::uint64_t s = seed.value_or(cfg.seed);
  if (cfg.attack.spec.mode == AttackMode::Meaconing && cfg.attack.auto_rate) {
    ScenarioConfig resolved = cfg;
    const CalibrationResult cal = calibrate_stealth_rate(cfg);
    resolved.attack.spec.ramp_rate = cal.ramp_rate;
    resolved.attack.auto_rate = false;
    RunResult r = simulate(resolved, s);
    r.calibration = cal;
    return r;
  }
  return simulate(cfg, s);
}

RunMetrics compute_metrics(const Trace& trace, const ScenarioConfig& cfg) {
  RunMetrics m;
  const bool attack = cfg.attack.spec.mode != AttackMode::Off;
  const double t_on = cfg.attack.spec.t_on;

  for (const auto& row : trace.truth) {
    const double d = norm3(row.p, row.p_ref);
    if (d > m.max_deviation) m.max_deviation = d;
    if (row.t >= cfg.duration - 10.0 && d > m.post_mitigation_error) m.post_mitigation_error = d;
  }

  for (const auto& r : trace.residuals) {
    if (r.flagged) ++m.onboard_flags;
    const bool during = attack && r.t >= t_on;
    if (r.flagged && during) ++m.onboard_flags_during_attack;
    if (r.sensor_id == kGnssId) {
      ++m.gnss_fusions;
      if (during && r.q > m.max_q_during_attack) m.max_q_during_attack = r.q;
    }
  }

  for (const auto& d : trace.detector) {
    if (!d.flag) continue;
    m.first_flag_time = d.t;
    if (!attack || d.t < t_on) m.offboard_false_alarm = true;
    else m.time_to_detect = d.t - t_on;
    break;
  }

  if (!trace.track.empty()) {
    // Track rows sit on the dynamics grid.
    double sum = 0.0;
    for (const auto& row : trace.track) {
      const auto k = static_cast<std::size_t>(std::llround(row.t / cfg.dt));
      const double e = norm3(row.p, trace.truth.at(k).p);
      sum += e * e;
    }
    m.rms_track_error = std::sqrt(sum / static_cast<double>(trace.track.size()));
  }
  return m;
}

}  // namespace fdisim
