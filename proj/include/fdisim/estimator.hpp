#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "fdisim/linalg.hpp"
#include "fdisim/sensor_emu.hpp"
#include "fdisim/sim_core.hpp"

namespace fdisim {

enum class FusionMode { GnssOnly, GnssPlusExternal };

/// Residual-energy gate. With window w > 1 the statistic is the sum of the
/// last w energies of a sensor and the threshold is the χ²(w·m) quantile.
struct MonitorConfig {
  double alpha = 1e-5;
  int m = 3;
  int window = 1;
  double gamma = 0.0;

  static MonitorConfig make(double alpha, int m, int window = 1);
};

struct ResidualRecord {
  double t = 0.0;      // fusion (delivery) time
  double stamp = 0.0;  // sample time
  int sensor_id = 0;
  Vec3 nu = Vec3::Zero();
  Mat3 S = Mat3::Identity();
  double q = 0.0;
  double gamma = 0.0;
  bool flagged = false;
  FusionMode mode = FusionMode::GnssOnly;
};

struct EstimatorConfig {
  DynamicsModel model;
  Vec6 x0 = Vec6::Zero();
  Mat6 P0 = Mat6::Identity();
  std::size_t buffer_len = 51;   // steps kept for rewinding
  int external_sensor_id = 1;    // everything else is treated as onboard
  double gnss_r_inflation = 1.0; // onboard R multiplier once reconfigured
  MonitorConfig monitor;
};

/// Linear Kalman filter on the base dt grid with out-of-sequence fusion.
///
/// Each grid step keeps its prior, its posterior, the input applied after it
/// and the measurements fused at it (kept in (sensor_id, seq) order). A late
/// measurement is inserted at its stamp's step and every later step is
/// re-filtered, so the final estimate depends only on the set of fused
/// measurements, not on the order they arrived in.
class OnboardEstimator {
 public:
  explicit OnboardEstimator(EstimatorConfig cfg);

  /// Time update with the input applied over the latest step; appends a step.
  /// Throws SimulationError if the covariance stops being positive definite.
  void predict(const Vec3& u);

  /// Measurement update. Returns the residual record, or nullopt when the
  /// measurement was dropped (older than the buffer) or ignored (external
  /// measurement before reconfiguration).
  std::optional<ResidualRecord> fuse(const Measurement& z);

  /// Latches gnss_plus_external on the first true flag.
  void reconfigure(bool offboard_flag);

  double time() const { return static_cast<double>(steps_.back().k) * cfg_.model.dt; }
  std::int64_t step() const { return steps_.back().k; }
  const Vec6& mean() const { return steps_.back().x_post; }
  const Mat6& covariance() const { return steps_.back().P_post; }
  FusionMode mode() const { return mode_; }
  std::size_t dropped() const { return dropped_; }
  std::size_t ignored_external() const { return ignored_external_; }
  const EstimatorConfig& config() const { return cfg_; }

 private:
  struct Step {
    std::int64_t k = 0;
    Vec6 x_prior;
    Mat6 P_prior;
    Vec6 x_post;
    Mat6 P_post;
    Vec3 u = Vec3::Zero();  // applied from this step to the next
    std::vector<Measurement> fused;
  };

  // Applies step.fused in order starting from the prior. If `fresh` points at
  // one of them, its innovation statistics are written to `record`.
  void refilter_step(Step& step, const Measurement* fresh, ResidualRecord* record) const;
  void propagate(const Step& from, Step& to) const;

  EstimatorConfig cfg_;
  Mat36 H_;
  std::deque<Step> steps_;
  FusionMode mode_ = FusionMode::GnssOnly;
  std::size_t dropped_ = 0;
  std::size_t ignored_external_ = 0;
  std::map<int, std::deque<double>> window_q_;
};

}  // namespace fdisim
