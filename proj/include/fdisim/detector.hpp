#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fdisim/sensor_emu.hpp"
#include "fdisim/sim_core.hpp"

namespace fdisim {

/// x_{k+1} = A x_k + B u_k + w_k, w_k ~ N(0, Q). Any state dimension.
struct LinearModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Q;

  static LinearModel from(const DynamicsModel& m);
  Eigen::Index states() const { return A.rows(); }
};

struct LiftEntry {
  int k = 0;  // step within the window, [0, N)
  Eigen::MatrixXd H;
  Eigen::MatrixXd R;
  Eigen::VectorXd z;
  int sensor_id = 0;
  std::int64_t seq = 0;
};

/// Measurements and known inputs over N base steps starting at t0.
struct LiftWindow {
  int N = 0;
  double t0 = 0.0;
  std::vector<LiftEntry> entries;      // ordered by (k, sensor_id, seq)
  std::vector<Eigen::VectorXd> inputs; // u_0 .. u_{N-1}

  void validate() const;
};

/// Batch model z̃ = O x_0 + e, e ~ N(0, Σ), with x_0 the state at window start.
struct LiftedSystem {
  Eigen::MatrixXd O;
  Eigen::VectorXd z_tilde;
  Eigen::MatrixXd Sigma;
  int rank = 0;
  int dof = 0;  // Σm_i - rank(O)
};

/// Stacks every entry against the window-start state:
///   O_i  = H_i A^{k_i}
///   z̃_i  = z_i - H_i Σ_{l<k_i} A^{k_i-1-l} B u_l
///   Σ_ij = H_i [Σ_{l<min(k_i,k_j)} A^{k_i-1-l} Q (A^{k_j-1-l})ᵀ] H_jᵀ + δ_ij R_i
/// Rank counts singular values above 1e-10·σ_max.
LiftedSystem build_lifted_system(const LiftWindow& w, const LinearModel& model);

struct ParityResult {
  double q_off = 0.0;
  int dof = 0;
};

/// Energy of the whitened measurement projected on the left null space of the
/// whitened observation operator; equals min_x (z̃ - O x)ᵀ Σ⁻¹ (z̃ - O x).
/// Throws std::invalid_argument if dof < 1 or Σ is not positive definite.
ParityResult parity_residual(const LiftedSystem& ls);

struct DetectorConfig {
  int window_steps = 100;
  int slide_steps = 50;
  double alpha_off = 0.01;
  int persistence = 3;

  void validate() const;
};

struct OffboardDecision {
  double t = 0.0;
  double q_off = 0.0;
  int dof = 0;
  double gamma_off = 0.0;
  bool exceed = false;
  bool flag = false;
};

/// χ² exceedance with a consecutive-window persistence requirement. Once the
/// flag is raised it stays raised.
class DecisionRule {
 public:
  DecisionRule(double alpha_off, int persistence);

  OffboardDecision decide(double t, double q_off, int dof);
  bool flagged() const { return latched_; }

 private:
  double alpha_;
  int persistence_;
  int run_ = 0;
  bool latched_ = false;
  std::map<int, double> thresholds_;
};

/// Sliding-window lifted detector fed with delivered measurements and the
/// commanded inputs. Stamps are snapped to the nearest base step.
class OffboardDetector {
 public:
  OffboardDetector(DetectorConfig cfg, const DynamicsModel& model);

  void record_input(std::int64_t k, const Vec3& u);
  void deliver(const Measurement& m);

  /// True if a window ends at step k (k = N + j·slide).
  bool is_window_end(std::int64_t k) const;

  /// Window [k_end - N, k_end) built from what has been delivered so far.
  LiftWindow window_ending_at(std::int64_t k_end) const;

  /// Builds, scores and decides the window ending at k_end. nullopt when the
  /// window has no analytic redundancy (dof < 1); such windows are counted
  /// and leave the persistence counter untouched.
  std::optional<OffboardDecision> evaluate(std::int64_t k_end);

  std::size_t skipped_windows() const { return skipped_; }
  bool flagged() const { return rule_.flagged(); }

 private:
  DetectorConfig cfg_;
  LinearModel model_;
  double dt_;
  DecisionRule rule_;
  std::deque<std::pair<std::int64_t, Vec3>> inputs_;
  std::deque<std::pair<std::int64_t, Measurement>> measurements_;
  std::size_t skipped_ = 0;
};

}  // namespace fdisim
