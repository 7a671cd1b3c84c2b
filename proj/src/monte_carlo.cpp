#include "fdisim/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "fdisim/calibrate.hpp"

namespace fdisim {

using nlohmann::json;

namespace {

QuantileSummary summarize(std::vector<double> x) {
  QuantileSummary q;
  q.n = x.size();
  if (x.empty()) return q;
  std::sort(x.begin(), x.end());
  q.q1 = quantile_sorted(x, 0.25);
  q.median = quantile_sorted(x, 0.5);
  q.q3 = quantile_sorted(x, 0.75);
  return q;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json quantile_json(const QuantileSummary& q) {
  if (q.n == 0) return {{"n", 0}, {"median", nullptr}, {"q1", nullptr}, {"q3", nullptr}};
  return {{"n", q.n}, {"median", q.median}, {"q1", q.q1}, {"q3", q.q3}};
}

json runs_json(const std::vector<RunSummary>& runs) {
  json a = json::array();
  for (const auto& r : runs) {
    json e = {{"seed", r.seed}, {"ok", r.ok}};
    if (r.ok) e["metrics"] = to_json(r.metrics);
    else e["error"] = r.error;
    a.push_back(e);
  }
  return a;
}

}  // namespace

std::vector<RunSummary> run_batch(const ScenarioConfig& cfg, std::uint64_t base, std::size_t n, unsigned threads) {
  std::vector<RunSummary> out(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      RunSummary& s = out[i];
      s.seed = base + i;
      try {
        s.metrics = simulate(cfg, s.seed).metrics;
        s.ok = true;
      } catch (const std::exception& e) {
        s.error = e.what();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

MonteCarloReport monte_carlo(const ScenarioConfig& cfg, const MonteCarloOptions& opt) {
  if (opt.runs < 1) throw std::invalid_argument("monte carlo needs at least one run");
  MonteCarloReport rep;
  rep.base_seed = cfg.seed;

  ScenarioConfig control = cfg;
  control.attack.spec.mode = AttackMode::Off;
  control.attack.auto_rate = false;

  if (opt.attack && cfg.attack.spec.mode != AttackMode::Off) {
    ScenarioConfig attack = cfg;
    if (cfg.attack.auto_rate) {
      rep.calibration = calibrate_stealth_rate(cfg);
      attack.attack.spec.ramp_rate = rep.calibration->ramp_rate;
      attack.attack.auto_rate = false;
    }
    rep.ramp_rate = attack.attack.spec.ramp_rate;
    rep.attack_runs = run_batch(attack, cfg.seed, opt.runs, opt.threads);
    rep.control_runs = run_batch(control, cfg.seed, opt.control_runs.value_or(opt.runs), opt.threads);
  } else {
    rep.control_runs = run_batch(control, cfg.seed, opt.control_runs.value_or(opt.runs), opt.threads);
  }

  std::vector<double> ttd, dev;
  std::size_t attack_ok = 0;
  for (const auto& r : rep.attack_runs) {
    if (!r.ok) {
      ++rep.failures;
      continue;
    }
    ++attack_ok;
    dev.push_back(r.metrics.max_deviation);
    if (r.metrics.offboard_false_alarm) ++rep.attack_false_alarms;
    if (r.metrics.time_to_detect) {
      ++rep.detected;
      ttd.push_back(*r.metrics.time_to_detect);
      if (r.metrics.post_mitigation_error < 1.0) ++rep.mitigated;
    }
  }
  std::size_t control_ok = 0;
  for (const auto& r : rep.control_runs) {
    if (!r.ok) {
      ++rep.failures;
      continue;
    }
    ++control_ok;
    if (r.metrics.offboard_false_alarm) ++rep.control_false_alarms;
    if (rep.attack_runs.empty()) dev.push_back(r.metrics.max_deviation);
  }
  if (attack_ok > 0) rep.detection_rate = static_cast<double>(rep.detected) / static_cast<double>(attack_ok);
  if (control_ok > 0) rep.false_alarm_rate = static_cast<double>(rep.control_false_alarms) / static_cast<double>(control_ok);
  rep.time_to_detect = summarize(ttd);
  rep.max_deviation = summarize(dev);
  double sum = 0.0;
  for (double d : dev) sum += d;
  if (!dev.empty()) rep.max_deviation_mean = sum / static_cast<double>(dev.size());
  return rep;
}

json to_json(const RunMetrics& m) {
  return {{"max_deviation", m.max_deviation},
          {"time_to_detect", opt_json(m.time_to_detect)},
          {"onboard_flags", m.onboard_flags},
          {"offboard_false_alarm", m.offboard_false_alarm},
          {"post_mitigation_error", m.post_mitigation_error},
          {"rms_track_error", m.rms_track_error},
          {"onboard_flags_during_attack", m.onboard_flags_during_attack},
          {"gnss_fusions", m.gnss_fusions},
          {"max_q_during_attack", m.max_q_during_attack},
          {"first_flag_time", opt_json(m.first_flag_time)}};
}

json to_json(const MonteCarloReport& r) {
  json j = {{"base_seed", r.base_seed},
            {"ramp_rate", r.ramp_rate},
            {"attack_runs", r.attack_runs.size()},
            {"control_runs", r.control_runs.size()},
            {"failures", r.failures},
            {"detected", r.detected},
            {"detection_rate", r.detection_rate},
            {"time_to_detect", quantile_json(r.time_to_detect)},
            {"mitigated_below_1m", r.mitigated},
            {"attack_false_alarms", r.attack_false_alarms},
            {"control_false_alarms", r.control_false_alarms},
            {"false_alarm_rate", r.false_alarm_rate},
            {"max_deviation", quantile_json(r.max_deviation)},
            {"max_deviation_mean", r.max_deviation_mean}};
  if (r.calibration) {
    const auto& c = *r.calibration;
    j["calibration"] = {{"ramp_rate", c.ramp_rate}, {"gamma_on", c.gamma_on}, {"bound", c.bound},
                        {"max_q_at_rate", c.max_q_at_rate}, {"r_max_stealthy", c.r_max_stealthy},
                        {"simulations", c.simulations}};
  }
  json failed = json::array();
  for (const auto* runs : {&r.attack_runs, &r.control_runs}) {
    for (const auto& s : *runs) {
      if (!s.ok) failed.push_back({{"seed", s.seed}, {"attack", runs == &r.attack_runs}, {"error", s.error}});
    }
  }
  j["failed_runs"] = failed;
  j["runs"] = {{"attack", runs_json(r.attack_runs)}, {"control", runs_json(r.control_runs)}};
  return j;
}

}  // namespace fdisim
