#include "fdisim/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fdisim/chi2.hpp"

namespace fdisim {

LinearModel LinearModel::from(const DynamicsModel& m) {
  return LinearModel{m.A, m.B, m.Q};
}

void LiftWindow::validate() const {
  if (N < 1) throw std::invalid_argument("lift window: N must be >= 1");
  if (static_cast<int>(inputs.size()) != N) throw std::invalid_argument("lift window: need exactly N inputs");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.k < 0 || e.k >= N) throw std::invalid_argument("lift window: entry step outside [0, N)");
    if (e.H.rows() != e.z.size() || e.R.rows() != e.z.size() || e.R.cols() != e.z.size()) {
      throw std::invalid_argument("lift window: entry dimension mismatch");
    }
    if (i > 0) {
      const auto& p = entries[i - 1];
      if (std::tie(p.k, p.sensor_id, p.seq) >= std::tie(e.k, e.sensor_id, e.seq)) {
        throw std::invalid_argument("lift window: entries not ordered by (k, sensor_id, seq)");
      }
    }
  }
}

LiftedSystem build_lifted_system(const LiftWindow& w, const LinearModel& model) {
  w.validate();
  const Eigen::Index n = model.states();
  int max_k = 0;
  Eigen::Index rows = 0;
  for (const auto& e : w.entries) {
    max_k = std::max(max_k, e.k);
    rows += e.z.size();
  }

  // powers[k] = A^k, drift[k] = Σ_{l<k} A^{k-1-l} B u_l, accum[k] = Σ_{l<k} A^{k-1-l} Q A^{k-1-l}ᵀ
  std::vector<Eigen::MatrixXd> powers(max_k + 1), accum(max_k + 1);
  std::vector<Eigen::VectorXd> drift(max_k + 1);
  powers[0] = Eigen::MatrixXd::Identity(n, n);
  accum[0] = Eigen::MatrixXd::Zero(n, n);
  drift[0] = Eigen::VectorXd::Zero(n);
  for (int k = 1; k <= max_k; ++k) {
    powers[k] = model.A * powers[k - 1];
    accum[k] = model.A * accum[k - 1] * model.A.transpose() + model.Q;
    drift[k] = model.A * drift[k - 1] + model.B * w.inputs[k - 1];
  }

  LiftedSystem ls;
  ls.O.resize(rows, n);
  ls.z_tilde.resize(rows);
  ls.Sigma = Eigen::MatrixXd::Zero(rows, rows);

  std::vector<Eigen::Index> offset(w.entries.size());
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < w.entries.size(); ++i) {
    const auto& e = w.entries[i];
    offset[i] = r;
    const Eigen::Index m = e.z.size();
    ls.O.middleRows(r, m) = e.H * powers[e.k];
    ls.z_tilde.segment(r, m) = e.z - e.H * drift[e.k];
    r += m;
  }
  // Entries are sorted by k, so for j >= i the shared horizon is k_i:
  // Σ_ij = (H_i C(k_i)) (H_j A^{k_j-k_i})ᵀ
  for (std::size_t i = 0; i < w.entries.size(); ++i) {
    const auto& ei = w.entries[i];
    const Eigen::MatrixXd HC = ei.H * accum[ei.k];
    for (std::size_t j = i; j < w.entries.size(); ++j) {
      const auto& ej = w.entries[j];
      Eigen::MatrixXd block = HC * (ej.H * powers[ej.k - ei.k]).transpose();
      if (i == j) block += ei.R;
      ls.Sigma.block(offset[i], offset[j], ei.z.size(), ej.z.size()) = block;
      if (i != j) ls.Sigma.block(offset[j], offset[i], ej.z.size(), ei.z.size()) = block.transpose();
    }
  }
  ls.Sigma = 0.5 * (ls.Sigma + ls.Sigma.transpose()).eval();

  if (rows > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ls.O);
    const auto& sv = svd.singularValues();
    const double tol = 1e-10 * (sv.size() > 0 ? sv(0) : 0.0);
    ls.rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > tol) ++ls.rank;
    }
  }
  ls.dof = static_cast<int>(rows) - ls.rank;
  return ls;
}

ParityResult parity_residual(const LiftedSystem& ls) {
  if (ls.dof < 1) throw std::invalid_argument("parity_residual: window has no redundancy (dof < 1)");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ls.Sigma);
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0)) {
    throw std::invalid_argument("parity_residual: stacked covariance is not positive definite");
  }
  const Eigen::MatrixXd inv_sqrt =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  const Eigen::MatrixXd O_w = inv_sqrt * ls.O;
  const Eigen::VectorXd z_w = inv_sqrt * ls.z_tilde;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(O_w, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double tol = 1e-10 * (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  const Eigen::MatrixXd W = svd.matrixU().rightCols(O_w.rows() - rank);
  return {(W.transpose() * z_w).squaredNorm(), static_cast<int>(O_w.rows() - rank)};
}

void DetectorConfig::validate() const {
  if (window_steps < 1) throw std::invalid_argument("detector: window_steps must be >= 1");
  if (slide_steps < 1) throw std::invalid_argument("detector: slide_steps must be >= 1");
  if (!(alpha_off > 0.0 && alpha_off < 1.0)) throw std::invalid_argument("detector: alpha_off must be in (0, 1)");
  if (persistence < 1) throw std::invalid_argument("detector: persistence must be >= 1");
}

DecisionRule::DecisionRule(double alpha_off, int persistence) : alpha_(alpha_off), persistence_(persistence) {
  if (persistence < 1) throw std::invalid_argument("decision rule: persistence must be >= 1");
}

OffboardDecision DecisionRule::decide(double t, double q_off, int dof) {
  auto it = thresholds_.find(dof);
  if (it == thresholds_.end()) it = thresholds_.emplace(dof, chi2_threshold(dof, alpha_)).first;
  OffboardDecision d;
  d.t = t;
  d.q_off = q_off;
  d.dof = dof;
  d.gamma_off = it->second;
  d.exceed = q_off > d.gamma_off;
  run_ = d.exceed ? run_ + 1 : 0;
  if (run_ >= persistence_) latched_ = true;
  d.flag = latched_;
  return d;
}

OffboardDetector::OffboardDetector(DetectorConfig cfg, const DynamicsModel& model)
    : cfg_(cfg), model_(LinearModel::from(model)), dt_(model.dt), rule_(cfg.alpha_off, cfg.persistence) {
  cfg_.validate();
}

void OffboardDetector::record_input(std::int64_t k, const Vec3& u) {
  inputs_.emplace_back(k, u);
}

void OffboardDetector::deliver(const Measurement& m) {
  measurements_.emplace_back(std::llround(m.stamp / dt_), m);
}

bool OffboardDetector::is_window_end(std::int64_t k) const {
  return k >= cfg_.window_steps && (k - cfg_.window_steps) % cfg_.slide_steps == 0;
}

LiftWindow OffboardDetector::window_ending_at(std::int64_t k_end) const {
  const std::int64_t k0 = k_end - cfg_.window_steps;
  LiftWindow w;
  w.N = cfg_.window_steps;
  w.t0 = static_cast<double>(k0) * dt_;

  w.inputs.reserve(static_cast<std::size_t>(w.N));
  for (const auto& [k, u] : inputs_) {
    if (k >= k0 && k < k_end) w.inputs.emplace_back(u);
  }
  if (static_cast<int>(w.inputs.size()) != w.N) {
    throw std::logic_error("offboard detector: inputs missing for window");
  }

  const Eigen::MatrixXd H = position_selector();
  for (const auto& [k, m] : measurements_) {
    if (k < k0 || k >= k_end) continue;
    w.entries.push_back(LiftEntry{static_cast<int>(k - k0), H, m.cov, m.value, m.sensor_id, m.seq});
  }
  std::sort(w.entries.begin(), w.entries.end(), [](const LiftEntry& a, const LiftEntry& b) {
    return std::tie(a.k, a.sensor_id, a.seq) < std::tie(b.k, b.sensor_id, b.seq);
  });
  return w;
}

std::optional<OffboardDecision> OffboardDetector::evaluate(std::int64_t k_end) {
  const LiftWindow w = window_ending_at(k_end);
  const LiftedSystem ls = build_lifted_system(w, model_);

  // Nothing older than the next window's start is needed again.
  const std::int64_t keep_from = k_end + cfg_.slide_steps - cfg_.window_steps;
  while (!inputs_.empty() && inputs_.front().first < keep_from) inputs_.pop_front();
  std::erase_if(measurements_, [&](const auto& km) { return km.first < keep_from; });

  if (ls.dof < 1) {
    ++skipped_;
    return std::nullopt;
  }
  const ParityResult pr = parity_residual(ls);
  return rule_.decide(static_cast<double>(k_end) * dt_, pr.q_off, pr.dof);
}

}  // namespace fdisim
