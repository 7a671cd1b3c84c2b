#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fdisim/camera_net.hpp"

using namespace fdisim;

namespace {

CameraModel camera(int id, const Vec3& pos, double sigma = 0.005, double p_miss = 0.0) {
  CameraModel c;
  c.id = id;
  c.position = pos;
  c.bearing_std = sigma;
  c.p_miss = p_miss;
  return c;
}

BearingDetection exact(const CameraModel& c, const Vec3& target, double stamp) {
  return {c.id, stamp, (target - c.position).normalized()};
}

}  // namespace

TEST(Detect, NoiselessBearing) {
  // σ_b = 0 is below the model's validity range, but detect itself must
  // return the exact direction.
  CameraModel c = camera(0, Vec3::Zero(), 0.0);
  Rng rng(1);
  const auto d = detect(c, Vec3(1, 0, 0), 0.0, rng);
  ASSERT_TRUE(d);
  EXPECT_NEAR((d->bearing - Vec3(1, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(Detect, CertainMissAlwaysMisses) {
  CameraModel c = camera(0, Vec3::Zero(), 0.01);
  c.p_miss = 1.0;
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) ASSERT_FALSE(detect(c, Vec3(3, 4, 5), 0.0, rng));
}

TEST(Detect, CoincidentTargetMisses) {
  Rng rng(1);
  EXPECT_FALSE(detect(camera(0, Vec3(1, 1, 1)), Vec3(1, 1, 1), 0.0, rng));
}

TEST(Detect, FieldOfViewGate) {
  CameraModel c = camera(0, Vec3::Zero());
  c.fov_half_angle = 0.5;
  c.boresight = Vec3::UnitX();
  Rng rng(1);
  EXPECT_TRUE(detect(c, Vec3(10, 1, 0), 0.0, rng));
  EXPECT_FALSE(detect(c, Vec3(0, 10, 0), 0.0, rng));
}

TEST(Detect, MeanAngularErrorIsHalfNormal) {
  // E|θ| = σ √(2/π) for θ ~ N(0, σ²)
  const double sigma = 0.01;
  const CameraModel c = camera(0, Vec3(-5, -5, 4), sigma);
  const Vec3 target(3, 2, 1);
  const Vec3 truth = (target - c.position).normalized();
  Rng rng(13);
  const int n = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto d = detect(c, target, 0.0, rng);
    ASSERT_TRUE(d);
    ASSERT_NEAR(d->bearing.norm(), 1.0, 1e-9);
    const double th = angle_between(d->bearing, truth);
    sum += th;
    sum2 += th * th;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  const double expected = sigma * std::sqrt(2.0 / std::numbers::pi);
  EXPECT_NEAR(expected, 0.00798, 1e-5);
  EXPECT_NEAR(mean, expected, 3.0 * se);
}

TEST(Detect, MissRateMatchesProbability) {
  const CameraModel c = camera(0, Vec3::Zero(), 0.01, 0.2);
  Rng rng(2);
  int misses = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) misses += detect(c, Vec3(5, 0, 0), 0.0, rng) ? 0 : 1;
  const double se = std::sqrt(0.2 * 0.8 / n);
  EXPECT_NEAR(static_cast<double>(misses) / n, 0.2, 4.0 * se);
}

TEST(AngleBetween, RobustNearZeroAndPi) {
  EXPECT_NEAR(angle_between(Vec3(1, 0, 0), Vec3(1, 1e-9, 0)), 1e-9, 1e-20);
  EXPECT_NEAR(angle_between(Vec3(1, 0, 0), Vec3(-1, 1e-9, 0)), std::numbers::pi - 1e-9, 1e-15);
}

TEST(PfInit, UniformWeights) {
  Rng rng(1);
  const ParticleSet ps = pf_init(Vec3::Zero(), Vec3::Ones(), 1000, 0.5, rng);
  ASSERT_EQ(ps.size(), 1000u);
  for (double w : ps.weights) EXPECT_EQ(w, 0.001);
  EXPECT_EQ(ps.ess, 1000.0);
}

TEST(PfInit, CollapsedBox) {
  Rng rng(1);
  const ParticleSet ps = pf_init(Vec3(1, 2, 3), Vec3(1, 2, 3), 100, 0.5, rng);
  for (const auto& p : ps.particles) EXPECT_EQ(p.p, Vec3(1, 2, 3));
}

TEST(PfInit, PositionMeanIsBoxCenter) {
  Rng rng(3);
  const Vec3 lo(-1, 0, 2), hi(3, 10, 2.5);
  const std::size_t n = 100000;
  const ParticleSet ps = pf_init(lo, hi, n, 0.5, rng);
  Vec3 mean = Vec3::Zero();
  for (const auto& p : ps.particles) mean += p.p;
  mean /= static_cast<double>(n);
  const Vec3 center = 0.5 * (lo + hi);
  for (int a = 0; a < 3; ++a) {
    const double se = (hi(a) - lo(a)) / std::sqrt(12.0 * static_cast<double>(n));
    EXPECT_NEAR(mean(a), center(a), 3.0 * se) << "axis " << a;
  }
}

TEST(Resample, OffspringCountsAreUnbiased) {
  Rng wrng(4);
  const std::size_t n = 50;
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& x : w) s += (x = wrng.uniform() * wrng.uniform());
  for (auto& x : w) x /= s;

  Rng rng(8);
  const int trials = 20000;
  std::vector<double> count(n, 0.0), count2(n, 0.0);
  for (int t = 0; t < trials; ++t) {
    std::vector<double> c(n, 0.0);
    for (auto i : systematic_resample(w, rng)) c[i] += 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      count[i] += c[i];
      count2[i] += c[i] * c[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = count[i] / trials;
    const double var = count2[i] / trials - mean * mean;
    const double se = std::sqrt(std::max(var, 1e-12) / trials);
    EXPECT_NEAR(mean, static_cast<double>(n) * w[i], 3.0 * se + 1e-9) << "particle " << i;
  }
}

TEST(PfStep, NoDetectionsIsPurePredict) {
  Rng rng(1);
  ParticleSet ps = pf_init(Vec3::Zero(), Vec3::Ones(), 500, 0.5, rng);
  // Skew the weights so a resample would be visible.
  for (std::size_t i = 0; i < ps.size(); ++i) ps.weights[i] = (i % 2 ? 1.5 : 0.5) / 500.0;
  const auto before = ps.weights;
  const std::vector<CameraModel> cams{camera(0, Vec3::Zero())};
  const auto r = pf_step(ps, {}, cams, {0.2, 2.0}, 1.0, rng);
  EXPECT_EQ(ps.weights, before);
  EXPECT_EQ(r.estimate.n_detections_used, 0);
  EXPECT_FALSE(r.resampled);
}

TEST(PfStep, EqualLikelihoodsKeepEqualWeights) {
  // Every particle on the detected ray: identical likelihoods.
  Rng rng(1);
  const CameraModel c = camera(0, Vec3::Zero());
  ParticleSet ps;
  for (int i = 1; i <= 100; ++i) ps.particles.push_back({Vec3(i * 0.1, 0, 0), Vec3::Zero()});
  ps.weights.assign(100, 0.01);
  const std::vector<BearingDetection> dets{{0, 0.0, Vec3::UnitX()}};
  const std::vector<CameraModel> cams{c};
  pf_step(ps, dets, cams, {0.0, 0.0}, 0.0, rng);
  for (double w : ps.weights) EXPECT_NEAR(w, 0.01, 1e-15);
}

TEST(PfStep, WeightsStayNormalized) {
  Rng rng(2);
  const std::vector<CameraModel> cams{camera(0, Vec3(-5, -5, 4)), camera(1, Vec3(15, -5, 4))};
  ParticleSet ps = pf_init(Vec3(-1, -1, 1), Vec3(1, 1, 3), 1000, 0.5, rng);
  const Vec3 target(0.3, -0.2, 2.0);
  for (int k = 0; k < 30; ++k) {
    std::vector<BearingDetection> dets;
    for (const auto& c : cams) {
      if (auto d = detect(c, target, k * 0.2, rng)) dets.push_back(*d);
    }
    pf_step(ps, dets, cams, {k == 0 ? 0.0 : 0.2, 2.0}, k * 0.2, rng);
    double s = 0.0;
    for (double w : ps.weights) s += w;
    ASSERT_NEAR(s, 1.0, 1e-9);
    ASSERT_GE(ps.ess, 1.0 - 1e-9);
    ASSERT_LE(ps.ess, 1000.0 + 1e-9);
  }
}

TEST(PfStep, UnderflowResetsWeightsAndCountsDivergence) {
  Rng rng(1);
  ParticleSet ps = pf_init(Vec3::Zero(), Vec3::Ones(), 10, 0.5, rng);
  ps.weights.assign(10, 0.0);
  const std::vector<CameraModel> cams{camera(0, Vec3(-5, 0, 0))};
  const std::vector<BearingDetection> dets{{0, 0.0, Vec3::UnitX()}};
  const auto r = pf_step(ps, dets, cams, {0.0, 0.0}, 0.0, rng);
  EXPECT_TRUE(r.diverged);
  for (double w : ps.weights) EXPECT_DOUBLE_EQ(w, 0.1);
}

TEST(PfStep, TwoRayTriangulation) {
  // Rays from (0,0,0) and (10,0,0) toward (5,5,0) meet only at (5,5,0).
  const Vec3 target(5, 5, 0);
  const std::vector<CameraModel> cams{camera(0, Vec3(0, 0, 0)), camera(1, Vec3(10, 0, 0))};
  Rng rng(6);
  ParticleSet ps = pf_init(Vec3(2, 2, -2), Vec3(8, 8, 2), 5000, 0.5, rng);
  PfStepResult r;
  for (int k = 0; k < 20; ++k) {
    const double t = 0.2 * k;
    const std::vector<BearingDetection> dets{exact(cams[0], target, t), exact(cams[1], target, t)};
    r = pf_step(ps, dets, cams, {k == 0 ? 0.0 : 0.2, 2.0}, t, rng);
  }
  EXPECT_LT((r.estimate.p_mean - target).norm(), 0.1);
  EXPECT_EQ(r.estimate.n_detections_used, 2);
}

TEST(PublishTrack, FloorAppliesToZeroCovariance) {
  Rng rng(1);
  TrackEstimate est;
  est.stamp = 3.0;
  est.p_mean = Vec3(1, 2, 3);
  const LatencyBudget zero{{}, 0.0, 0.0};
  const Measurement m = publish_track(est, zero, {}, rng, 1, 0);
  EXPECT_LT((m.cov - 0.01 * Mat3::Identity()).norm(), 1e-15);
  EXPECT_EQ(m.value, Vec3(1, 2, 3));
  EXPECT_EQ(m.deliver_time, m.stamp);
  EXPECT_EQ(m.provenance, Provenance::Genuine);
}

TEST(PublishTrack, InflationWithoutFloor) {
  Rng rng(1);
  TrackEstimate est;
  est.p_cov = 0.25 * Mat3::Identity();
  const Measurement m = publish_track(est, {{}, 0.0, 0.0}, {}, rng, 1, 0);
  EXPECT_LT((m.cov - 0.5 * Mat3::Identity()).norm(), 1e-15);
}

TEST(PublishTrack, FloorIsPerEigenvalue) {
  Rng rng(1);
  TrackEstimate est;
  est.p_cov = Vec3(1.0, 1e-4, 0.0).asDiagonal();
  const Measurement m = publish_track(est, {{}, 0.0, 0.0}, {}, rng, 1, 0);
  EXPECT_LT((m.cov - Mat3(Vec3(2.0, 0.01, 0.01).asDiagonal())).norm(), 1e-15);
}
