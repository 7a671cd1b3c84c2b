#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdisim/scenario.hpp"

namespace fdisim {

struct MonteCarloOptions {
  std::size_t runs = 1;
  std::optional<std::size_t> control_runs;  // defaults to runs
  bool attack = true;       // false: control runs only
  unsigned threads = 0;     // 0: hardware concurrency
};

struct RunSummary {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunMetrics metrics;
};

struct QuantileSummary {
  std::size_t n = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

struct MonteCarloReport {
  std::uint64_t base_seed = 0;
  double ramp_rate = 0.0;
  std::optional<CalibrationResult> calibration;
  std::vector<RunSummary> attack_runs;   // seeds base..base+runs-1
  std::vector<RunSummary> control_runs;  // same seeds, attack off

  std::size_t detected = 0;
  double detection_rate = 0.0;
  QuantileSummary time_to_detect;
  std::size_t mitigated = 0;  // detected runs with post_mitigation_error < 1 m
  std::size_t control_false_alarms = 0;
  double false_alarm_rate = 0.0;
  std::size_t attack_false_alarms = 0;
  QuantileSummary max_deviation;
  double max_deviation_mean = 0.0;
  std::size_t failures = 0;
};

/// Independent runs over consecutive seeds. Runs may execute on several
/// threads; results are aggregated in seed order, so the report depends only
/// on (cfg, options). An "auto" ramp rate is calibrated once, up front.
MonteCarloReport monte_carlo(const ScenarioConfig& cfg, const MonteCarloOptions& opt);

/// Runs `n` configurations on a pool; result i belongs to seed base + i.
std::vector<RunSummary> run_batch(const ScenarioConfig& cfg, std::uint64_t base, std::size_t n, unsigned threads);

nlohmann::json to_json(const MonteCarloReport& r);
nlohmann::json to_json(const RunMetrics& m);

}  // namespace fdisim
