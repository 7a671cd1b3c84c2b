#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fdisim/calibrate.hpp"
#include "fdisim/config.hpp"
#include "fdisim/monte_carlo.hpp"
#include "fdisim/report.hpp"
#include "fdisim/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

using namespace fdisim;

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out) {
  const ScenarioConfig cfg = load_config(config);
  const RunResult r = run_scenario(cfg, seed);
  emit_traces(r, out);
  ScenarioConfig resolved = cfg;
  resolved.seed = r.seed;
  if (cfg.attack.spec.mode != AttackMode::Off) {
    resolved.attack.spec.ramp_rate = r.ramp_rate;
    resolved.attack.auto_rate = false;
  }
  write_text(std::filesystem::path(out) / "config.json", to_json(resolved).dump(2) + "\n");
  std::cout << to_json(r.metrics).dump(2) << "\n";
  if (r.calibration && r.calibration->r_max_stealthy) {
    std::cerr << "warning: attack stays stealthy up to r_max; rate is capped at " << r.ramp_rate << " m/s\n";
  }
  return kOk;
}

int cmd_bench(const std::string& config, std::size_t runs, std::optional<std::size_t> control, const std::string& attack,
              unsigned threads, const std::string& out) {
  const ScenarioConfig cfg = load_config(config);
  MonteCarloOptions opt;
  opt.runs = runs;
  opt.control_runs = control;
  opt.attack = attack != "off";
  opt.threads = threads;
  const MonteCarloReport rep = monte_carlo(cfg, opt);
  std::filesystem::create_directories(out);
  const auto j = to_json(rep);
  write_text(std::filesystem::path(out) / "report.json", j.dump(2) + "\n");
  auto brief = j;
  brief.erase("runs");
  std::cout << brief.dump(2) << "\n";
  return rep.failures == 0 ? kOk : kRuntimeError;
}

int cmd_latency(const std::string& config, std::size_t samples, std::optional<double> pad_ms, const std::string& out) {
  if (samples < 100) throw ConfigError("--samples: need at least 100");
  const ScenarioConfig cfg = load_config(config);
  LatencyBudget budget = cfg.gnss_latency;
  if (pad_ms) budget.pad = *pad_ms * 1e-3;
  Rng rng = Rng::substream(cfg.seed, "latency-report");
  const auto rows = latency_report(budget, samples, rng);
  std::ostringstream os;
  write_latency_csv(os, rows);
  if (!out.empty()) write_text(out, os.str());
  std::cout << os.str();
  return kOk;
}

int cmd_calibrate(const std::string& config, std::optional<double> margin) {
  ScenarioConfig cfg = load_config(config);
  if (margin) {
    if (!(*margin > 0.0 && *margin < 1.0)) throw ConfigError("--margin: must be in (0, 1)");
    cfg.attack.margin = *margin;
  }
  if (cfg.attack.spec.mode != AttackMode::Meaconing) throw ConfigError("attack.mode: calibration needs \"meaconing\"");
  const CalibrationResult c = calibrate_stealth_rate(cfg);
  nlohmann::json j = {{"ramp_rate_mps", c.ramp_rate}, {"gamma_on", c.gamma_on}, {"bound", c.bound},
                      {"max_q_at_rate", c.max_q_at_rate}, {"r_max_stealthy", c.r_max_stealthy},
                      {"simulations", c.simulations},
                      {"seed", cfg.attack.calibration_seed.value_or(cfg.seed)}};
  std::cout << j.dump(2) << "\n";
  if (c.r_max_stealthy) std::cerr << "warning: r_max is still stealthy; widen attack.r_max_mps\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GNSS spoofing / offboard detection simulator"};
  app.require_subcommand(1);

  std::string config, out;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "simulate one scenario and write traces");
  run->add_option("--config", config, "scenario file")->required();
  run->add_option("--seed", seed, "override the configured seed");
  run->add_option("--out", out, "output directory")->required();

  std::size_t runs = 1;
  std::optional<std::size_t> control_runs;
  std::string attack = "on";
  unsigned threads = 0;
  auto* bench = app.add_subcommand("bench", "Monte Carlo over consecutive seeds");
  bench->add_option("--config", config, "scenario file")->required();
  bench->add_option("--runs", runs, "number of seeds")->required()->check(CLI::PositiveNumber);
  bench->add_option("--control-runs", control_runs, "attack-free runs (default: --runs)");
  bench->add_option("--attack", attack, "on|off")->check(CLI::IsMember({"on", "off"}));
  bench->add_option("--threads", threads, "worker threads (0: all cores)");
  bench->add_option("--out", out, "output directory")->required();

  std::size_t samples = 10000;
  std::optional<double> pad_ms;
  std::string latency_out;
  auto* lat = app.add_subcommand("latency-report", "sample the GNSS latency budget");
  lat->add_option("--config", config, "scenario file")->required();
  lat->add_option("--samples", samples, "sample count (>= 100)")->required();
  lat->add_option("--pad-ms", pad_ms, "override the deterministic pad");
  lat->add_option("--out", latency_out, "also write the CSV here");

  std::optional<double> margin;
  auto* cal = app.add_subcommand("calibrate-attack", "find the largest stealthy ramp rate");
  cal->add_option("--config", config, "scenario file")->required();
  cal->add_option("--margin", margin, "fraction of the gate kept free");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config, seed, out);
    if (*bench) return cmd_bench(config, runs, control_runs, attack, threads, out);
    if (*lat) return cmd_latency(config, samples, pad_ms, latency_out);
    if (*cal) return cmd_calibrate(config, margin);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kConfigError;
}
