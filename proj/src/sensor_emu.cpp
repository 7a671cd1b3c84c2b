#include "fdisim/sensor_emu.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fdisim {

void LatencyBudget::validate() const {
  if (components.empty()) throw std::invalid_argument("latency budget: no components");
  if (!(pad >= 0.0)) throw std::invalid_argument("latency budget: pad must be >= 0");
  for (const auto& c : components) {
    if (!(c.mean > 0.0)) throw std::invalid_argument("latency component '" + c.name + "': mean must be > 0");
    if (!(c.std >= 0.0)) throw std::invalid_argument("latency component '" + c.name + "': std must be >= 0");
  }
}

double LatencyBudget::nominal() const {
  double total = pad;
  for (const auto& c : components) total += c.mean;
  return total;
}

LatencyBudget default_gnss_latency() {
  return LatencyBudget{
      {{"mocap", 6.02e-3, 0.88e-3}, {"sim_processing", 16.01e-3, 4.45e-3}, {"network", 4.62e-3, 0.98e-3}},
      73e-3,
      100e-3};
}

LatencySample sample_latency_detailed(const LatencyBudget& budget, Rng& rng) {
  LatencySample s;
  s.components.reserve(budget.components.size());
  s.total = budget.pad;
  for (const auto& c : budget.components) {
    const double d = std::max(0.0, rng.normal(c.mean, c.std));
    s.components.push_back(d);
    s.total += d;
  }
  return s;
}

double sample_latency(const LatencyBudget& budget, Rng& rng) {
  return sample_latency_detailed(budget, rng).total;
}

double quantile_sorted(const std::vector<double>& x, double p) {
  if (x.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= x.size()) return x.back();
  return x[lo] + (h - static_cast<double>(lo)) * (x[lo + 1] - x[lo]);
}

LatencyStats latency_stats(std::vector<double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("latency_stats: need at least 2 samples");
  const auto n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  std::sort(samples.begin(), samples.end());
  return {mean, std::sqrt(ss / (n - 1.0)), quantile_sorted(samples, 0.25),
          quantile_sorted(samples, 0.5), quantile_sorted(samples, 0.75)};
}

void GnssConfig::validate() const {
  if (!(rate > 0.0)) throw std::invalid_argument("gnss: rate must be > 0");
  if (!is_symmetric(R)) throw std::invalid_argument("gnss: R must be symmetric");
  if (!(min_eigenvalue(R) > 0.0)) throw std::invalid_argument("gnss: R must be positive definite");
  if (!bias.allFinite()) throw std::invalid_argument("gnss: non-finite bias");
}

Measurement emulate_gnss(const VehicleState& true_state, const GnssConfig& cfg,
                         const LatencyBudget& budget, const MeasurementHook& injector,
                         Rng& noise_rng, Rng& latency_rng, int sensor_id, std::int64_t seq) {
  const Mat3 factor = psd_factor(cfg.R);
  const Vec3 n(noise_rng.normal(), noise_rng.normal(), noise_rng.normal());

  Measurement m;
  m.sensor_id = sensor_id;
  m.seq = seq;
  m.stamp = true_state.t;
  m.value = cfg.H * true_state.stacked() + cfg.bias + factor * n;
  m.cov = cfg.R;
  m.provenance = Provenance::Genuine;
  m.deliver_time = m.stamp + sample_latency(budget, latency_rng);

  if (injector) {
    try {
      Measurement out = injector(m);
      // The hook may only touch value and provenance.
      out.sensor_id = m.sensor_id;
      out.seq = m.seq;
      out.stamp = m.stamp;
      out.deliver_time = m.deliver_time;
      out.cov = m.cov;
      return out;
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "gnss injector failed at stamp " << m.stamp << " (seq " << seq << "): " << e.what();
      throw SimulationError(os.str());
    }
  }
  return m;
}

}  // namespace fdisim
