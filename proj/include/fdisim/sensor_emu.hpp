#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fdisim/linalg.hpp"
#include "fdisim/rng.hpp"
#include "fdisim/sim_core.hpp"

namespace fdisim {

struct LatencyComponent {
  std::string name;
  double mean = 0.0;  // s
  double std = 0.0;   // s
};

/// Stochastic per-component delays plus a deterministic pad.
struct LatencyBudget {
  std::vector<LatencyComponent> components;
  double pad = 0.0;                // s
  double target_end_to_end = 0.0;  // s, informational

  void validate() const;
  /// pad + Σ mean_i
  double nominal() const;
};

/// Measured GNSS-emulation path: mocap 6.02±0.88 ms, simulator processing
/// 16.01±4.45 ms, wifi one-way 4.62±0.98 ms; 73 ms pad to the 100 ms receiver
/// delay configured in the autopilot.
LatencyBudget default_gnss_latency();

struct LatencySample {
  std::vector<double> components;  // s, one per budget component
  double total = 0.0;              // s, pad included
};

/// L = pad + Σ max(0, N(mean_i, std_i²)). Draws one normal per component.
double sample_latency(const LatencyBudget& budget, Rng& rng);
LatencySample sample_latency_detailed(const LatencyBudget& budget, Rng& rng);

struct LatencyStats {
  double mean = 0.0;
  double std = 0.0;  // n-1 denominator
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// p-quantile of ascending data, linear between order statistics.
double quantile_sorted(const std::vector<double>& x, double p);

/// Throws std::invalid_argument for fewer than two samples. Quartiles use
/// linear interpolation between order statistics.
LatencyStats latency_stats(std::vector<double> samples);

enum class Provenance { Genuine, Spoofed };

struct Measurement {
  int sensor_id = 0;
  std::int64_t seq = 0;
  double stamp = 0.0;
  double deliver_time = 0.0;
  Vec3 value = Vec3::Zero();
  Mat3 cov = Mat3::Identity();
  Provenance provenance = Provenance::Genuine;
};

struct GnssConfig {
  double rate = 10.0;  // Hz
  Mat3 R = Vec3(0.25, 0.25, 0.64).asDiagonal();
  Vec3 bias = Vec3::Zero();
  Mat36 H = position_selector();

  void validate() const;
};

/// Optional value-replacing hook applied after noise. An empty function
/// leaves the measurement genuine.
using MeasurementHook = std::function<Measurement(const Measurement&)>;

/// Samples H·x + bias + n, n ~ N(0, R), at true_state.t. The hook may replace
/// the value; the reported covariance stays R regardless.
Measurement emulate_gnss(const VehicleState& true_state, const GnssConfig& cfg,
                         const LatencyBudget& budget, const MeasurementHook& injector,
                         Rng& noise_rng, Rng& latency_rng, int sensor_id, std::int64_t seq);

}  // namespace fdisim
