#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fdisim/config.hpp"

namespace fdisim {

struct TruthRow {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 p_ref = Vec3::Zero();
};

struct GnssRow {
  double stamp = 0.0;
  double deliver = 0.0;
  Vec3 z = Vec3::Zero();
  Provenance provenance = Provenance::Genuine;
};

struct TrackRow {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  double cov_trace = 0.0;
  int n_detections_used = 0;
};

struct Trace {
  std::vector<TruthRow> truth;
  std::vector<GnssRow> gnss;
  std::vector<ResidualRecord> residuals;
  std::vector<OffboardDecision> detector;
  std::vector<TrackRow> track;
};

struct RunMetrics {
  double max_deviation = 0.0;
  std::optional<double> time_to_detect;
  std::size_t onboard_flags = 0;
  bool offboard_false_alarm = false;
  double post_mitigation_error = 0.0;
  double rms_track_error = 0.0;

  // Diagnostics, also recomputable from the traces.
  std::size_t onboard_flags_during_attack = 0;
  std::size_t gnss_fusions = 0;
  double max_q_during_attack = 0.0;
  std::optional<double> first_flag_time;
};

/// Bisection outcome for the stealthy ramp rate.
struct CalibrationResult {
  double ramp_rate = 0.0;
  double gamma_on = 0.0;
  double bound = 0.0;              // (1 - margin)·gamma_on
  double max_q_at_rate = 0.0;
  bool r_max_stealthy = false;     // warning: bracket too small
  int simulations = 0;
};

struct RunResult {
  Trace trace;
  RunMetrics metrics;
  std::uint64_t seed = 0;
  double ramp_rate = 0.0;  // rate actually flown
  std::optional<CalibrationResult> calibration;
  std::size_t dropped_measurements = 0;
  std::size_t skipped_windows = 0;
  std::size_t pf_divergences = 0;
};

/// Runs the closed loop for cfg.duration. A "auto" ramp rate is calibrated
/// first. Numerical failures surface as SimulationError.
RunResult run_scenario(const ScenarioConfig& cfg, std::optional<std::uint64_t> seed = {});

/// Same as run_scenario but never calibrates; uses cfg.attack.spec as is.
RunResult simulate(const ScenarioConfig& cfg, std::uint64_t seed);

/// Everything here is derived from the trace rows, so an external script
/// reading the CSV files gets the same numbers.
RunMetrics compute_metrics(const Trace& trace, const ScenarioConfig& cfg);

}  // namespace fdisim
