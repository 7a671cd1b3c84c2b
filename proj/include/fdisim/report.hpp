#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdisim/scenario.hpp"
#include "fdisim/sensor_emu.hpp"

namespace fdisim {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LatencyReportRow {
  std::string component;  // "end_to_end" for the total
  LatencyStats stats;     // milliseconds
};

/// Samples the budget n times (n >= 100) and summarizes each component and
/// the end-to-end total, pad included.
std::vector<LatencyReportRow> latency_report(const LatencyBudget& budget, std::size_t n, Rng& rng);

/// component,mean_ms,std_ms,q1_ms,median_ms,q3_ms
void write_latency_csv(std::ostream& os, const std::vector<LatencyReportRow>& rows);

/// truth.csv, gnss.csv, residuals.csv, detector.csv, track.csv, metrics.json.
/// Throws IoError naming the path on failure.
void emit_traces(const RunResult& run, const std::filesystem::path& out_dir);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fdisim
