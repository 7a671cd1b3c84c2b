#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdisim/attack.hpp"
#include "fdisim/camera_net.hpp"
#include "fdisim/detector.hpp"
#include "fdisim/estimator.hpp"
#include "fdisim/sensor_emu.hpp"
#include "fdisim/sim_core.hpp"

namespace fdisim {

/// Schema or parse failure. The message names the key path and, where it can
/// be located, the line in the source document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EstimatorSettings {
  double init_pos_std = 0.1;  // m
  double init_vel_std = 0.1;  // m/s
  double buffer_horizon = 0.5;  // s
};

struct CameraNetworkConfig {
  double rate = 5.0;  // Hz, also the particle filter rate
  std::vector<CameraModel> cameras;
  LatencyBudget latency;
};

struct ParticleFilterConfig {
  std::size_t particles = 1000;
  double accel_std = 2.0;          // m/s²
  double init_half_extent = 1.0;   // m, box around the first waypoint
  double init_vel_std = 0.5;       // m/s
  TrackPublishConfig publish;
};

struct AttackConfig {
  AttackSpec spec;
  bool auto_rate = false;  // calibrate ramp_rate before running
  double margin = 0.1;
  int iters = 20;
  double r_max = 1.0;  // m/s
  std::optional<std::uint64_t> calibration_seed;
};

struct MonitorSettings {
  double alpha = 1e-5;
  int window = 1;
};

struct MitigationConfig {
  bool enabled = true;
  double gnss_r_inflation = 1.0;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  double duration = 120.0;  // s
  double dt = 0.01;
  double accel_noise_std = 0.5;  // m/s², plant disturbance
  WaypointPlan plan;
  ControllerGains gains;
  double a_max = 5.0;
  EstimatorSettings estimator;
  GnssConfig gnss;
  LatencyBudget gnss_latency;
  CameraNetworkConfig camera_net;
  ParticleFilterConfig pf;
  AttackConfig attack;
  MonitorSettings monitor;
  DetectorConfig detector;
  MitigationConfig mitigation;

  static ScenarioConfig defaults();
  DynamicsModel dynamics() const { return DynamicsModel::double_integrator(dt, accel_noise_std); }
  /// Throws ConfigError on cross-field inconsistencies.
  void validate() const;
};

ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<config>");
nlohmann::json to_json(const ScenarioConfig& cfg);

/// Closest candidate by edit distance, empty if none is reasonably close.
std::string nearest_key(const std::string& key, const std::vector<std::string>& candidates);

}  // namespace fdisim
