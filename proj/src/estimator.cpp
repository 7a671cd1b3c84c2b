#include "fdisim/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fdisim/chi2.hpp"

namespace fdisim {

MonitorConfig MonitorConfig::make(double alpha, int m, int window) {
  if (window < 1) throw std::invalid_argument("monitor: window must be >= 1");
  MonitorConfig c;
  c.alpha = alpha;
  c.m = m;
  c.window = window;
  c.gamma = chi2_threshold(window * m, alpha);
  return c;
}

namespace {

void symmetrize(Mat6& P) { P = 0.5 * (P + P.transpose()).eval(); }

}  // namespace

OnboardEstimator::OnboardEstimator(EstimatorConfig cfg) : cfg_(std::move(cfg)), H_(position_selector()) {
  if (cfg_.buffer_len < 2) throw std::invalid_argument("estimator: buffer must hold at least 2 steps");
  if (cfg_.monitor.gamma <= 0.0) cfg_.monitor = MonitorConfig::make(cfg_.monitor.alpha, cfg_.monitor.m, cfg_.monitor.window);
  Step s;
  s.k = 0;
  s.x_prior = s.x_post = cfg_.x0;
  s.P_prior = s.P_post = cfg_.P0;
  steps_.push_back(std::move(s));
}

void OnboardEstimator::propagate(const Step& from, Step& to) const {
  const auto& m = cfg_.model;
  to.x_prior = m.A * from.x_post + m.B * from.u;
  to.P_prior = m.A * from.P_post * m.A.transpose() + m.Q;
  symmetrize(to.P_prior);
}

void OnboardEstimator::refilter_step(Step& step, const Measurement* fresh, ResidualRecord* record) const {
  Vec6 x = step.x_prior;
  Mat6 P = step.P_prior;
  for (const Measurement& z : step.fused) {
    const Vec3 nu = z.value - H_ * x;
    const Mat3 S = H_ * P * H_.transpose() + z.cov;
    Eigen::LLT<Mat3> llt(S);
    if (llt.info() != Eigen::Success) {
      std::ostringstream os;
      os << "innovation covariance not invertible at step " << step.k;
      throw SimulationError(os.str());
    }
    if (&z == fresh && record != nullptr) {
      record->nu = nu;
      record->S = S;
      record->q = nu.dot(llt.solve(nu));
    }
    const Mat63 K = llt.solve(H_ * P).transpose();  // P Hᵀ S⁻¹, S symmetric
    x += K * nu;
    const Mat6 IKH = Mat6::Identity() - K * H_;
    P = IKH * P * IKH.transpose() + K * z.cov * K.transpose();
    symmetrize(P);
  }
  step.x_post = x;
  step.P_post = P;
}

void OnboardEstimator::predict(const Vec3& u) {
  Step& last = steps_.back();
  last.u = u;
  Step next;
  next.k = last.k + 1;
  propagate(last, next);
  next.x_post = next.x_prior;
  next.P_post = next.P_prior;
  Eigen::LLT<Mat6> llt(next.P_prior);
  if (llt.info() != Eigen::Success || !next.P_prior.allFinite()) {
    std::ostringstream os;
    os << "estimator covariance lost positive definiteness at step " << next.k;
    throw SimulationError(os.str());
  }
  steps_.push_back(std::move(next));
  while (steps_.size() > cfg_.buffer_len) steps_.pop_front();
}

std::optional<ResidualRecord> OnboardEstimator::fuse(const Measurement& z) {
  const bool external = z.sensor_id == cfg_.external_sensor_id;
  if (external && mode_ != FusionMode::GnssPlusExternal) {
    ++ignored_external_;
    return std::nullopt;
  }
  const std::int64_t k = std::llround(z.stamp / cfg_.model.dt);
  if (k < steps_.front().k) {
    ++dropped_;
    return std::nullopt;
  }
  if (k > steps_.back().k) {
    std::ostringstream os;
    os << "measurement stamped " << z.stamp << " is ahead of the estimator (t=" << time() << ")";
    throw std::logic_error(os.str());
  }

  Measurement stored = z;
  if (!external && mode_ == FusionMode::GnssPlusExternal) stored.cov *= cfg_.gnss_r_inflation;

  const auto idx = static_cast<std::size_t>(k - steps_.front().k);
  Step& target = steps_[idx];
  auto pos = std::upper_bound(target.fused.begin(), target.fused.end(), stored,
                              [](const Measurement& a, const Measurement& b) {
                                return std::tie(a.sensor_id, a.seq) < std::tie(b.sensor_id, b.seq);
                              });
  pos = target.fused.insert(pos, std::move(stored));

  ResidualRecord rec;
  rec.t = z.deliver_time;
  rec.stamp = z.stamp;
  rec.sensor_id = z.sensor_id;
  rec.mode = mode_;
  refilter_step(target, &*pos, &rec);
  for (std::size_t i = idx + 1; i < steps_.size(); ++i) {
    propagate(steps_[i - 1], steps_[i]);
    refilter_step(steps_[i], nullptr, nullptr);
  }

  const auto& mon = cfg_.monitor;
  if (mon.window > 1) {
    auto& hist = window_q_[z.sensor_id];
    hist.push_back(rec.q);
    while (hist.size() > static_cast<std::size_t>(mon.window)) hist.pop_front();
    double sum = 0.0;
    for (double q : hist) sum += q;
    rec.q = sum;
  }
  rec.gamma = mon.gamma;
  rec.flagged = rec.q > rec.gamma;
  return rec;
}

void OnboardEstimator::reconfigure(bool offboard_flag) {
  if (offboard_flag) mode_ = FusionMode::GnssPlusExternal;
}

}  // namespace fdisim
