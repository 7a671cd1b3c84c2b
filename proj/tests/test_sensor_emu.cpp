#include <gtest/gtest.h>

#include <cmath>

#include "fdisim/report.hpp"
#include "fdisim/sensor_emu.hpp"

using namespace fdisim;

namespace {

LatencyBudget measured_budget(double pad, bool with_noise) {
  LatencyBudget b = default_gnss_latency();
  b.pad = pad;
  if (!with_noise) {
    for (auto& c : b.components) c.std = 0.0;
  }
  return b;
}

GnssConfig noiseless_gnss() {
  GnssConfig g;
  g.R = Mat3::Zero();
  return g;
}

}  // namespace

TEST(SampleLatency, DeterministicComponentsSum) {
  Rng rng(1);
  EXPECT_NEAR(sample_latency(measured_budget(0.0, false), rng), 26.65e-3, 1e-15);
}

TEST(SampleLatency, PadReachesReceiverTarget) {
  Rng rng(1);
  const LatencyBudget b = measured_budget(73e-3, false);
  EXPECT_NEAR(sample_latency(b, rng), 99.65e-3, 1e-15);
  EXPECT_NEAR(b.nominal(), 99.65e-3, 1e-15);
  EXPECT_NEAR(b.target_end_to_end, 0.1, 1e-15);
}

TEST(SampleLatency, SingleDeterministicComponent) {
  Rng rng(1);
  LatencyBudget b{{{"only", 0.001, 0.0}}, 0.0, 0.0};
  EXPECT_EQ(sample_latency(b, rng), 0.001);
}

TEST(SampleLatency, MonteCarloMeanWithinThreeStandardErrors) {
  Rng rng = Rng::substream(5, "gnss-latency");
  const LatencyBudget b = measured_budget(0.0, true);
  std::vector<double> x;
  for (int i = 0; i < 10000; ++i) x.push_back(sample_latency(b, rng));
  const LatencyStats s = latency_stats(x);
  const double se = s.std / std::sqrt(static_cast<double>(x.size()));
  EXPECT_NEAR(s.mean, b.nominal(), 3.0 * se);
  EXPECT_NEAR(s.mean * 1e3, 26.65, 0.5);
}

TEST(SampleLatency, NeverNegativePerComponent) {
  Rng rng(3);
  LatencyBudget b{{{"wide", 1e-3, 5e-3}}, 0.0, 0.0};
  for (int i = 0; i < 10000; ++i) {
    const auto s = sample_latency_detailed(b, rng);
    ASSERT_GE(s.components[0], 0.0);
    ASSERT_EQ(s.total, s.components[0]);
  }
}

TEST(SampleLatency, DeliveryInversionsOccurWhenJitterExceedsPeriod) {
  // 100 Hz samples with the measured jitter: consecutive deliveries swap
  // often enough that a run of 10⁴ samples is never monotone.
  Rng rng(17);
  const LatencyBudget b = measured_budget(73e-3, true);
  double prev = -1.0;
  int inversions = 0;
  for (int k = 0; k < 10000; ++k) {
    const double deliver = k * 0.01 + sample_latency(b, rng);
    if (deliver < prev) ++inversions;
    prev = deliver;
  }
  EXPECT_GT(inversions, 0);
}

TEST(EmulateGnss, NoiselessPassthrough) {
  Rng n(1), l(2);
  VehicleState s{0.3, Vec3(1, 2, 3), Vec3(4, 5, 6)};
  const Measurement m = emulate_gnss(s, noiseless_gnss(), measured_budget(0.0, false), {}, n, l, 0, 7);
  EXPECT_EQ(m.value, Vec3(1, 2, 3));
  EXPECT_EQ(m.provenance, Provenance::Genuine);
  EXPECT_EQ(m.stamp, 0.3);
  EXPECT_EQ(m.seq, 7);
  EXPECT_NEAR(m.deliver_time, 0.3 + 26.65e-3, 1e-15);
}

TEST(EmulateGnss, AdditiveBias) {
  Rng n(1), l(2);
  GnssConfig g = noiseless_gnss();
  g.bias = Vec3(0.5, 0, 0);
  VehicleState s{0.0, Vec3(1, 2, 3), Vec3::Zero()};
  const Measurement m = emulate_gnss(s, g, measured_budget(0.0, false), {}, n, l, 0, 0);
  EXPECT_EQ(m.value, Vec3(1.5, 2, 3));
}

TEST(EmulateGnss, TenHertzForSixtySeconds) {
  // Schedule oracle: samples at k·0.1 s for k = 0 … 599.
  Rng n(1), l(2);
  const GnssConfig g;
  const LatencyBudget b = default_gnss_latency();
  const double dt = 0.01;
  std::vector<Measurement> out;
  for (int k = 0; k < 6000; ++k) {
    if (k % 10 != 0) continue;
    VehicleState s{k * dt, Vec3::Zero(), Vec3::Zero()};
    out.push_back(emulate_gnss(s, g, b, {}, n, l, 0, static_cast<std::int64_t>(out.size())));
  }
  ASSERT_EQ(out.size(), 600u);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_NEAR(out[i].stamp, 0.1 * static_cast<double>(i), 1e-9);
    EXPECT_GE(out[i].deliver_time, out[i].stamp);
    EXPECT_EQ(out[i].cov, g.R);
  }
}

TEST(EmulateGnss, ProvenanceSpoofedOnlyWhenHookReplacesValue) {
  Rng n(1), l(2);
  VehicleState s{1.0, Vec3(1, 2, 3), Vec3::Zero()};
  MeasurementHook passthrough = [](const Measurement& m) { return m; };
  MeasurementHook replace = [](const Measurement& m) {
    Measurement o = m;
    o.value = Vec3(9, 9, 9);
    o.provenance = Provenance::Spoofed;
    o.stamp = 123.0;  // ignored
    o.cov = Mat3::Identity() * 50.0;
    return o;
  };
  const auto a = emulate_gnss(s, noiseless_gnss(), measured_budget(0.0, false), passthrough, n, l, 0, 0);
  EXPECT_EQ(a.provenance, Provenance::Genuine);
  const auto b = emulate_gnss(s, noiseless_gnss(), measured_budget(0.0, false), replace, n, l, 0, 1);
  EXPECT_EQ(b.provenance, Provenance::Spoofed);
  EXPECT_EQ(b.value, Vec3(9, 9, 9));
  EXPECT_EQ(b.stamp, 1.0);
  EXPECT_EQ(b.cov, Mat3::Zero());
}

TEST(EmulateGnss, HookFailureAbortsWithContext) {
  Rng n(1), l(2);
  VehicleState s{2.5, Vec3::Zero(), Vec3::Zero()};
  MeasurementHook bad = [](const Measurement&) -> Measurement { throw std::runtime_error("boom"); };
  try {
    emulate_gnss(s, GnssConfig{}, default_gnss_latency(), bad, n, l, 0, 0);
    FAIL() << "expected SimulationError";
  } catch (const SimulationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2.5"), std::string::npos) << msg;
    EXPECT_NE(msg.find("boom"), std::string::npos) << msg;
  }
}

TEST(EmulateGnss, NoiseCovarianceMatchesR) {
  Rng n(4), l(5);
  const GnssConfig g;
  VehicleState s;
  Mat3 acc = Mat3::Zero();
  const int count = 50000;
  for (int i = 0; i < count; ++i) {
    const Vec3 e = emulate_gnss(s, g, default_gnss_latency(), {}, n, l, 0, i).value;
    acc += e * e.transpose();
  }
  acc /= count;
  EXPECT_LT((acc - g.R).norm() / g.R.norm(), 0.03);
}

TEST(LatencyStats, ConstantSamples) {
  const auto s = latency_stats({1, 1, 1, 1});
  EXPECT_EQ(s.mean, 1.0);
  EXPECT_EQ(s.std, 0.0);
  EXPECT_EQ(s.q1, 1.0);
  EXPECT_EQ(s.q3, 1.0);
}

TEST(LatencyStats, HandComputed) {
  // mean 3, Σ(x-3)² = 10, s = √(10/4)
  const auto s = latency_stats({5, 3, 1, 4, 2});
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_NEAR(s.std, std::sqrt(2.5), 1e-15);
  EXPECT_NEAR(s.std, 1.5811, 1e-4);
  EXPECT_DOUBLE_EQ(s.q1, 2.0);
  EXPECT_DOUBLE_EQ(s.median, 3.0);
  EXPECT_DOUBLE_EQ(s.q3, 4.0);
}

TEST(LatencyStats, InterpolatedQuartiles) {
  // h = p (n-1): q1 at 0.75 → 1.75, median at 1.5 → 2.5, q3 at 2.25 → 3.25
  const auto s = latency_stats({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.q1, 1.75);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.q3, 3.25);
}

TEST(LatencyStats, RejectsTooFewSamples) {
  EXPECT_THROW(latency_stats({1.0}), std::invalid_argument);
  EXPECT_THROW(latency_stats({}), std::invalid_argument);
}

TEST(LatencyReport, DegenerateDistributionQuartilesEqualMean) {
  Rng rng(1);
  const auto rows = latency_report(measured_budget(0.0, false), 200, rng);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows.back().component, "end_to_end");
  for (const auto& r : rows) {
    EXPECT_NEAR(r.stats.q1, r.stats.mean, 1e-9);
    EXPECT_NEAR(r.stats.median, r.stats.mean, 1e-9);
    EXPECT_NEAR(r.stats.q3, r.stats.mean, 1e-9);
    EXPECT_NEAR(r.stats.std, 0.0, 1e-9);
  }
  EXPECT_NEAR(rows.back().stats.mean, 26.65, 1e-9);
}

TEST(LatencyReport, CsvLayout) {
  Rng rng(1);
  std::ostringstream os;
  write_latency_csv(os, latency_report(default_gnss_latency(), 100, rng));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "component,mean_ms,std_ms,q1_ms,median_ms,q3_ms");
  std::vector<std::string> names;
  while (std::getline(is, line)) names.push_back(line.substr(0, line.find(',')));
  EXPECT_EQ(names, (std::vector<std::string>{"mocap", "sim_processing", "network", "end_to_end"}));
}

TEST(LatencyReport, RejectsSmallSampleCounts) {
  Rng rng(1);
  EXPECT_THROW(latency_report(default_gnss_latency(), 99, rng), std::invalid_argument);
}
