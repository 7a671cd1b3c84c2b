#include <gtest/gtest.h>

#include <cmath>

#include "fdisim/chi2.hpp"
#include "fdisim/config.hpp"
#include "fdisim/detector.hpp"
#include "fdisim/scenario.hpp"
#include "oracles.hpp"

using namespace fdisim;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace fdisim::oracle;

namespace {

LiftEntry position_entry(int k, const Vec3& z, const Mat3& R, int sensor, std::int64_t seq) {
  return {k, MatrixXd(position_selector()), MatrixXd(R), VectorXd(z), sensor, seq};
}

}  // namespace

TEST(BuildLifted, AllAtWindowStart) {
  Rng rng(1);
  const LinearModel m = random_stable_model(4, 2, rng);
  LiftWindow w = random_window(m, 10, 3, rng);
  for (auto& e : w.entries) e.k = 0;
  for (std::size_t i = 0; i < w.entries.size(); ++i) w.entries[i].seq = static_cast<std::int64_t>(i);
  const LiftedSystem ls = build_lifted_system(w, m);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < w.entries.size(); ++i) {
    const auto& e = w.entries[i];
    const auto mi = e.z.size();
    EXPECT_EQ(ls.O.middleRows(r, mi), e.H);
    EXPECT_EQ(ls.z_tilde.segment(r, mi), e.z);
    EXPECT_EQ(ls.Sigma.block(r, r, mi, mi), e.R);
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < w.entries.size(); ++j) {
      const auto mj = w.entries[j].z.size();
      if (j != i) {
        EXPECT_EQ(ls.Sigma.block(r, c, mi, mj).norm(), 0.0);
      }
      c += mj;
    }
    r += mi;
  }
}

TEST(BuildLifted, DimensionArithmeticForGnssGnssCamera) {
  const DynamicsModel dm = DynamicsModel::double_integrator(0.01, 0.5);
  LiftWindow w;
  w.N = 100;
  w.inputs.assign(100, VectorXd::Zero(3));
  const Mat3 R = Vec3(0.25, 0.25, 0.64).asDiagonal();
  w.entries = {position_entry(0, Vec3::Zero(), R, 0, 0), position_entry(20, Vec3::Zero(), 0.01 * Mat3::Identity(), 1, 0),
               position_entry(40, Vec3::Zero(), R, 0, 1)};
  const LiftedSystem ls = build_lifted_system(w, LinearModel::from(dm));
  EXPECT_EQ(ls.O.rows(), 9);
  EXPECT_EQ(ls.rank, 6);
  EXPECT_EQ(ls.dof, 3);
}

TEST(BuildLifted, InputCompensation) {
  // A single entry at step k sees H Σ A^{k-1-l} B u_l subtracted.
  const DynamicsModel dm = DynamicsModel::double_integrator(0.1, 0.0);
  LiftWindow w;
  w.N = 10;
  w.inputs.assign(10, VectorXd(Vec3(1, 0, 0)));
  w.entries = {position_entry(10 - 1, Vec3::Zero(), Mat3::Identity(), 0, 0)};
  const LiftedSystem ls = build_lifted_system(w, LinearModel::from(dm));
  // 9 steps of unit acceleration from rest: ½ a t² with t = 0.9
  EXPECT_NEAR(ls.z_tilde(0), -0.5 * 0.81, 1e-12);
}

TEST(ParityResidual, ConsistentNoiselessDataGivesZero) {
  Rng rng(2);
  const LinearModel m = random_stable_model(4, 2, rng);
  LiftWindow w = random_window(m, 20, 6, rng);
  // z̃ = O x0 exactly: put z_i = H_i (A^{k_i} x0 + drift)
  LiftedSystem ls = build_lifted_system(w, m);
  const VectorXd x0 = random_matrix(4, 1, rng).col(0);
  ls.z_tilde = ls.O * x0;
  ASSERT_GE(ls.dof, 1);
  EXPECT_NEAR(parity_residual(ls).q_off, 0.0, 1e-18 + 1e-12 * x0.squaredNorm());
}

TEST(ParityResidual, EqualsWeightedLeastSquaresMinimum) {
  EXPECT_LT(oracle::parity_vs_wls(3, 100), 1e-9);
}

TEST(ParityResidual, ScaleConsistency) {
  Rng rng(4);
  const LinearModel m = random_stable_model(3, 1, rng);
  const LiftWindow w = random_window(m, 15, 8, rng);
  LiftedSystem ls = build_lifted_system(w, m);
  const double q = parity_residual(ls).q_off;
  ls.Sigma *= 7.5;
  EXPECT_NEAR(parity_residual(ls).q_off, q / 7.5, 1e-10 * q);
}

TEST(ParityResidual, RejectsNoRedundancyAndIndefiniteSigma) {
  LiftedSystem ls;
  ls.O = MatrixXd::Identity(3, 3);
  ls.z_tilde = VectorXd::Zero(3);
  ls.Sigma = MatrixXd::Identity(3, 3);
  ls.rank = 3;
  ls.dof = 0;
  EXPECT_THROW(parity_residual(ls), std::invalid_argument);
  ls.O = MatrixXd::Ones(3, 1);
  ls.dof = 2;
  ls.Sigma(2, 2) = -1.0;
  EXPECT_THROW(parity_residual(ls), std::invalid_argument);
}

TEST(BuildLifted, StackedCovarianceMatchesMonteCarlo) {
  EXPECT_LT(oracle::stacked_covariance_error(5, 100000), 0.05);
}

TEST(DecisionRule, ZeroEnergyNeverExceeds) {
  DecisionRule r(0.01, 3);
  const auto d = r.decide(1.0, 0.0, 5);
  EXPECT_FALSE(d.exceed);
  EXPECT_FALSE(d.flag);
  EXPECT_NEAR(d.gamma_off, chi2_threshold(5, 0.01), 1e-12);
}

TEST(DecisionRule, PersistenceCounting) {
  DecisionRule r(0.01, 3);
  const std::vector<bool> pattern{true, true, false, true, true, true};
  std::vector<bool> flags;
  for (std::size_t i = 0; i < pattern.size(); ++i) flags.push_back(r.decide(i * 0.5, pattern[i] ? 1e6 : 0.0, 3).flag);
  EXPECT_EQ(flags, (std::vector<bool>{false, false, false, false, false, true}));
}

TEST(DecisionRule, PersistenceOneFlagsOnFirstExceedance) {
  DecisionRule r(0.01, 1);
  EXPECT_FALSE(r.decide(0.0, 0.0, 3).flag);
  EXPECT_FALSE(r.decide(0.5, 1.0, 3).flag);
  const auto d = r.decide(1.0, 1e3, 3);
  EXPECT_TRUE(d.exceed);
  EXPECT_TRUE(d.flag);
}

TEST(DecisionRule, FlagLatches) {
  DecisionRule r(0.01, 2);
  r.decide(0.0, 1e3, 3);
  r.decide(0.5, 1e3, 3);
  const auto d = r.decide(1.0, 0.0, 3);
  EXPECT_FALSE(d.exceed);
  EXPECT_TRUE(d.flag);
}

TEST(OffboardDetector, WindowEndsOnSlideGrid) {
  OffboardDetector det({100, 50, 0.01, 3}, DynamicsModel::double_integrator(0.01, 0.5));
  EXPECT_FALSE(det.is_window_end(50));
  EXPECT_TRUE(det.is_window_end(100));
  EXPECT_FALSE(det.is_window_end(120));
  EXPECT_TRUE(det.is_window_end(150));
}

TEST(OffboardDetector, EmptyWindowIsSkippedWithoutTouchingCounter) {
  OffboardDetector det({10, 10, 0.01, 2}, DynamicsModel::double_integrator(0.01, 0.5));
  const Mat3 R = Mat3::Identity();
  std::int64_t seq = 0;
  auto feed = [&](std::int64_t k0, bool with_data, double offset) {
    for (std::int64_t k = k0; k < k0 + 10; ++k) {
      det.record_input(k, Vec3::Zero());
      if (with_data && k % 3 == 0) {
        Measurement m;
        m.sensor_id = 0;
        m.seq = seq++;
        m.stamp = k * 0.01;
        m.value = Vec3(offset * (k % 2 ? 1 : -1), 0, 0);
        m.cov = R;
        det.deliver(m);
      }
    }
  };
  feed(0, true, 100.0);
  ASSERT_TRUE(det.evaluate(10));  // exceed #1
  feed(10, false, 0.0);
  EXPECT_FALSE(det.evaluate(20).has_value());
  EXPECT_EQ(det.skipped_windows(), 1u);
  feed(20, true, 100.0);
  const auto d = det.evaluate(30);  // exceed #2: counter survived the skip
  ASSERT_TRUE(d);
  EXPECT_TRUE(d->exceed);
  EXPECT_TRUE(d->flag);
}

TEST(OffboardDetector, WindowUsesOnlyDeliveredStampsInRange) {
  OffboardDetector det({10, 5, 0.01, 3}, DynamicsModel::double_integrator(0.01, 0.5));
  for (int k = 0; k < 20; ++k) det.record_input(k, Vec3::Zero());
  for (int k : {3, 9, 10, 12, 19}) {
    Measurement m;
    m.seq = k;
    m.stamp = k * 0.01;
    m.cov = Mat3::Identity();
    det.deliver(m);
  }
  const LiftWindow w = det.window_ending_at(20);
  ASSERT_EQ(w.entries.size(), 3u);
  EXPECT_EQ(w.entries[0].k, 0);
  EXPECT_EQ(w.entries[2].k, 9);
}

TEST(OffboardDetector, NominalWindowsAreChiSquared) {
  // Exact covariances: the parity energy is χ²(dof), so E[q] = dof.
  ScenarioConfig c = ScenarioConfig::defaults();
  c.duration = 1100.0;
  const auto windows = ideal_detector_run(c, 0.01 * Mat3::Identity(), 77, false);
  ASSERT_GE(windows.size(), 2000u);
  double q = 0.0, dof = 0.0;
  for (const auto& d : windows) {
    q += d.q_off;
    dof += d.dof;
  }
  EXPECT_NEAR(q / dof, 1.0, 0.05);
}

TEST(OffboardDetector, ClosedLoopWindowsAreConservative) {
  // The published camera covariance overstates the track error, so closed
  // loop energy sits below dof and exceedances below alpha_off.
  ScenarioConfig c = ScenarioConfig::defaults();
  c.duration = 1100.0;
  const RunResult r = simulate(c, 77);
  ASSERT_GE(r.trace.detector.size(), 2000u);
  double q = 0.0, dof = 0.0;
  std::size_t exceed = 0;
  for (const auto& d : r.trace.detector) {
    q += d.q_off;
    dof += d.dof;
    exceed += d.exceed ? 1 : 0;
  }
  EXPECT_LT(q / dof, 1.0);
  EXPECT_LE(static_cast<double>(exceed) / r.trace.detector.size(), c.detector.alpha_off);
}

TEST(OffboardDetector, EnergyGrowsWithRampRate) {
  // Averaged over the first 20 s of the attack, while the vehicle is still
  // inside the camera coverage. r is the calibrated rate for attack.json.
  ScenarioConfig c = load_config(FDISIM_CONFIG_DIR "/attack.json");
  c.attack.auto_rate = false;
  c.mitigation.enabled = false;
  c.duration = 80.0;
  const double r = 0.0356;
  double prev = -1.0;
  for (double rate : {0.0, r / 2, r, 2 * r}) {
    c.attack.spec.ramp_rate = rate;
    double sum = 0.0;
    int count = 0;
    for (std::uint64_t seed = 1; seed <= 16; ++seed) {
      const RunResult run = simulate(c, seed);
      for (const auto& d : run.trace.detector) {
        if (d.t > c.attack.spec.t_on && d.t <= c.attack.spec.t_on + 20.0) {
          sum += d.q_off;
          ++count;
        }
      }
    }
    const double mean = sum / count;
    EXPECT_GE(mean, prev) << "rate " << rate;
    prev = mean;
  }
}
