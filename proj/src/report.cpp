#include "fdisim/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fdisim/monte_carlo.hpp"

namespace fdisim {

namespace {

// Round-trip exact, locale independent.
std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* mode_name(FusionMode m) { return m == FusionMode::GnssOnly ? "gnss_only" : "gnss_plus_external"; }

}  // namespace

std::vector<LatencyReportRow> latency_report(const LatencyBudget& budget, std::size_t n, Rng& rng) {
  if (n < 100) throw std::invalid_argument("latency report needs at least 100 samples");
  budget.validate();
  std::vector<std::vector<double>> comp(budget.components.size());
  std::vector<double> total;
  total.reserve(n);
  for (auto& c : comp) c.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const LatencySample s = sample_latency_detailed(budget, rng);
    for (std::size_t j = 0; j < comp.size(); ++j) comp[j].push_back(s.components[j] * 1e3);
    total.push_back(s.total * 1e3);
  }
  std::vector<LatencyReportRow> rows;
  for (std::size_t j = 0; j < comp.size(); ++j) rows.push_back({budget.components[j].name, latency_stats(comp[j])});
  rows.push_back({"end_to_end", latency_stats(total)});
  return rows;
}

void write_latency_csv(std::ostream& os, const std::vector<LatencyReportRow>& rows) {
  os << "component,mean_ms,std_ms,q1_ms,median_ms,q3_ms\n";
  for (const auto& r : rows) {
    os << r.component << ',' << num(r.stats.mean) << ',' << num(r.stats.std) << ',' << num(r.stats.q1) << ','
       << num(r.stats.median) << ',' << num(r.stats.q3) << '\n';
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(path.string() + ": cannot open for writing");
  f << text;
  f.close();
  if (!f) throw IoError(path.string() + ": write failed");
}

void emit_traces(const RunResult& run, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string() + ": " + ec.message());
  const Trace& tr = run.trace;

  std::ostringstream os;
  os << "t,px,py,pz,vx,vy,vz,prx,pry,prz\n";
  for (const auto& r : tr.truth) {
    os << num(r.t);
    for (const Vec3* v : {&r.p, &r.v, &r.p_ref}) os << ',' << num(v->x()) << ',' << num(v->y()) << ',' << num(v->z());
    os << '\n';
  }
  write_text(out_dir / "truth.csv", os.str());

  os.str("");
  os << "stamp,deliver,zx,zy,zz,provenance\n";
  for (const auto& r : tr.gnss) {
    os << num(r.stamp) << ',' << num(r.deliver) << ',' << num(r.z.x()) << ',' << num(r.z.y()) << ',' << num(r.z.z())
       << ',' << (r.provenance == Provenance::Genuine ? "genuine" : "spoofed") << '\n';
  }
  write_text(out_dir / "gnss.csv", os.str());

  os.str("");
  os << "t,sensor_id,nu_x,nu_y,nu_z,q,gamma,flagged,mode\n";
  for (const auto& r : tr.residuals) {
    os << num(r.t) << ',' << r.sensor_id << ',' << num(r.nu.x()) << ',' << num(r.nu.y()) << ',' << num(r.nu.z())
       << ',' << num(r.q) << ',' << num(r.gamma) << ',' << (r.flagged ? 1 : 0) << ',' << mode_name(r.mode) << '\n';
  }
  write_text(out_dir / "residuals.csv", os.str());

  os.str("");
  os << "t_window_end,q_off,dof,gamma_off,exceed,flag\n";
  for (const auto& r : tr.detector) {
    os << num(r.t) << ',' << num(r.q_off) << ',' << r.dof << ',' << num(r.gamma_off) << ',' << (r.exceed ? 1 : 0)
       << ',' << (r.flag ? 1 : 0) << '\n';
  }
  write_text(out_dir / "detector.csv", os.str());

  os.str("");
  os << "t,px,py,pz,cov_trace,n_detections_used\n";
  for (const auto& r : tr.track) {
    os << num(r.t) << ',' << num(r.p.x()) << ',' << num(r.p.y()) << ',' << num(r.p.z()) << ',' << num(r.cov_trace)
       << ',' << r.n_detections_used << '\n';
  }
  write_text(out_dir / "track.csv", os.str());

  nlohmann::json m = to_json(run.metrics);
  m["seed"] = run.seed;
  m["ramp_rate"] = run.ramp_rate;
  m["dropped_measurements"] = run.dropped_measurements;
  m["skipped_windows"] = run.skipped_windows;
  m["pf_divergences"] = run.pf_divergences;
  write_text(out_dir / "metrics.json", m.dump(2) + "\n");
}

}  // namespace fdisim
