#include "fdisim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fdisim {

using nlohmann::json;

namespace {

std::vector<LatencyComponent> camera_latency_components() {
  return {{"network", 4.62e-3, 0.98e-3}, {"processing", 20e-3, 5e-3}};
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Walks the document; remembers the source text for line lookups.
class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
    std::ostringstream os;
    os << join(path) << ": " << what;
    if (const auto line = line_of(path)) os << " (line " << *line << ")";
    throw ConfigError(os.str());
  }

  static std::string join(const std::vector<std::string>& path) {
    std::string s;
    for (const auto& p : path) {
      if (!p.empty() && p.front() == '[') {
        s += p;
      } else {
        if (!s.empty()) s += '.';
        s += p;
      }
    }
    return s.empty() ? "<root>" : s;
  }

  void expect_object(const json& j, const std::vector<std::string>& path, const std::vector<std::string>& allowed) const {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, _] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
      auto p = path;
      p.push_back(key);
      std::string msg = "unknown key '" + key + "'";
      const std::string hint = nearest_key(key, allowed);
      if (!hint.empty()) msg += "; did you mean '" + hint + "'?";
      fail(p, msg);
    }
  }

  double number(const json& obj, std::vector<std::string> path, const std::string& key, double fallback,
                std::optional<double> min = {}, bool min_exclusive = false, std::optional<double> max = {},
                bool max_exclusive = false) const {
    path.push_back(key);
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    if (min && (min_exclusive ? !(x > *min) : !(x >= *min))) {
      std::ostringstream os;
      os << "must be " << (min_exclusive ? "> " : ">= ") << *min << ", got " << x;
      fail(path, os.str());
    }
    if (max && (max_exclusive ? !(x < *max) : !(x <= *max))) {
      std::ostringstream os;
      os << "must be " << (max_exclusive ? "< " : "<= ") << *max << ", got " << x;
      fail(path, os.str());
    }
    return x;
  }

  std::int64_t integer(const json& obj, std::vector<std::string> path, const std::string& key, std::int64_t fallback,
                       std::int64_t min) const {
    path.push_back(key);
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(path, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < min) fail(path, "must be >= " + std::to_string(min) + ", got " + std::to_string(x));
    return x;
  }

  bool boolean(const json& obj, std::vector<std::string> path, const std::string& key, bool fallback) const {
    path.push_back(key);
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean()) fail(path, "expected true or false");
    return obj.at(key).get<bool>();
  }

  Vec3 vec3(const json& obj, std::vector<std::string> path, const std::string& key, const Vec3& fallback) const {
    path.push_back(key);
    if (!obj.contains(key)) return fallback;
    return vec3_value(obj.at(key), path);
  }

  Vec3 vec3_value(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_array() || v.size() != 3) fail(path, "expected an array of 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) fail(path, "expected an array of 3 numbers");
      out(i) = v[i].get<double>();
      if (!std::isfinite(out(i))) fail(path, "must be finite");
    }
    return out;
  }

  const json* child(const json& obj, const std::string& key) const {
    return obj.contains(key) ? &obj.at(key) : nullptr;
  }

 private:
  // Finds the line of the last path component by scanning for each quoted
  // key in sequence. Array indices are skipped.
  std::optional<int> line_of(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    bool found_any = false;
    for (const auto& p : path) {
      if (p.empty() || p.front() == '[') continue;
      const auto hit = text_.find('"' + p + '"', pos);
      if (hit == std::string::npos) return found_any ? std::optional<int>{} : std::nullopt;
      pos = hit;
      found_any = true;
    }
    if (!found_any) return std::nullopt;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }

  const std::string& text_;
};

LatencyBudget parse_latency(const Parser& ps, const json& j, const std::vector<std::string>& path,
                            const LatencyBudget& fallback) {
  ps.expect_object(j, path, {"components", "pad_s", "target_s"});
  LatencyBudget b = fallback;
  if (const json* comps = ps.child(j, "components")) {
    auto cpath = path;
    cpath.push_back("components");
    if (!comps->is_array() || comps->empty()) ps.fail(cpath, "expected a non-empty array");
    b.components.clear();
    for (std::size_t i = 0; i < comps->size(); ++i) {
      auto ip = cpath;
      ip.push_back("[" + std::to_string(i) + "]");
      const json& c = (*comps)[i];
      ps.expect_object(c, ip, {"name", "mean_s", "std_s"});
      LatencyComponent lc;
      if (!c.contains("name") || !c.at("name").is_string()) {
        auto np = ip;
        np.push_back("name");
        ps.fail(np, "expected a string");
      }
      lc.name = c.at("name").get<std::string>();
      if (!c.contains("mean_s")) {
        auto mp = ip;
        mp.push_back("mean_s");
        ps.fail(mp, "required");
      }
      lc.mean = ps.number(c, ip, "mean_s", 0.0, 0.0, true);
      lc.std = ps.number(c, ip, "std_s", 0.0, 0.0);
      b.components.push_back(lc);
    }
  }
  b.pad = ps.number(j, path, "pad_s", b.pad, 0.0);
  b.target_end_to_end = ps.number(j, path, "target_s", b.target_end_to_end, 0.0);
  return b;
}

ScenarioConfig parse_document(const Parser& ps, const json& root) {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  const std::vector<std::string> R;
  ps.expect_object(root, R,
                   {"seed", "duration_s", "dynamics", "mission", "controller", "estimator", "gnss", "cameras",
                    "particle_filter", "attack", "monitor", "detector", "mitigation", "rng"});

  cfg.seed = static_cast<std::uint64_t>(ps.integer(root, R, "seed", static_cast<std::int64_t>(cfg.seed), 0));
  cfg.duration = ps.number(root, R, "duration_s", cfg.duration, 0.0);

  if (const json* j = ps.child(root, "dynamics")) {
    const std::vector<std::string> P{"dynamics"};
    ps.expect_object(*j, P, {"dt_s", "accel_noise_std_mps2"});
    cfg.dt = ps.number(*j, P, "dt_s", cfg.dt, 0.0, true);
    cfg.accel_noise_std = ps.number(*j, P, "accel_noise_std_mps2", cfg.accel_noise_std, 0.0);
  }

  if (const json* j = ps.child(root, "mission")) {
    const std::vector<std::string> P{"mission"};
    ps.expect_object(*j, P, {"waypoints", "loop"});
    cfg.plan.loop = ps.boolean(*j, P, "loop", cfg.plan.loop);
    if (const json* wps = ps.child(*j, "waypoints")) {
      auto wp_path = P;
      wp_path.push_back("waypoints");
      if (!wps->is_array()) ps.fail(wp_path, "expected an array");
      cfg.plan.waypoints.clear();
      for (std::size_t i = 0; i < wps->size(); ++i) {
        auto ip = wp_path;
        ip.push_back("[" + std::to_string(i) + "]");
        const json& w = (*wps)[i];
        ps.expect_object(w, ip, {"position_m", "time_s"});
        if (!w.contains("position_m") || !w.contains("time_s")) ps.fail(ip, "waypoint needs position_m and time_s");
        cfg.plan.waypoints.push_back({ps.vec3(w, ip, "position_m", Vec3::Zero()), ps.number(w, ip, "time_s", 0.0)});
      }
      if (cfg.plan.waypoints.size() < 2) ps.fail(wp_path, "need at least 2 waypoints");
      for (std::size_t i = 1; i < cfg.plan.waypoints.size(); ++i) {
        if (!(cfg.plan.waypoints[i].t > cfg.plan.waypoints[i - 1].t)) {
          ps.fail(wp_path, "arrival times must be strictly increasing");
        }
      }
    }
  }

  if (const json* j = ps.child(root, "controller")) {
    const std::vector<std::string> P{"controller"};
    ps.expect_object(*j, P, {"kp", "kd", "a_max_mps2"});
    cfg.gains.kp = ps.number(*j, P, "kp", cfg.gains.kp, 0.0, true);
    cfg.gains.kd = ps.number(*j, P, "kd", cfg.gains.kd, 0.0, true);
    cfg.a_max = ps.number(*j, P, "a_max_mps2", cfg.a_max, 0.0, true);
  }

  if (const json* j = ps.child(root, "estimator")) {
    const std::vector<std::string> P{"estimator"};
    ps.expect_object(*j, P, {"init_pos_std_m", "init_vel_std_mps", "buffer_s"});
    cfg.estimator.init_pos_std = ps.number(*j, P, "init_pos_std_m", cfg.estimator.init_pos_std, 0.0, true);
    cfg.estimator.init_vel_std = ps.number(*j, P, "init_vel_std_mps", cfg.estimator.init_vel_std, 0.0, true);
    cfg.estimator.buffer_horizon = ps.number(*j, P, "buffer_s", cfg.estimator.buffer_horizon, 0.0, true);
  }

  if (const json* j = ps.child(root, "gnss")) {
    const std::vector<std::string> P{"gnss"};
    ps.expect_object(*j, P, {"rate_hz", "noise_cov_diag_m2", "bias_m", "latency"});
    cfg.gnss.rate = ps.number(*j, P, "rate_hz", cfg.gnss.rate, 0.0, true);
    const Vec3 diag = ps.vec3(*j, P, "noise_cov_diag_m2", cfg.gnss.R.diagonal());
    if (!(diag.minCoeff() > 0.0)) ps.fail({"gnss", "noise_cov_diag_m2"}, "variances must be > 0");
    cfg.gnss.R = diag.asDiagonal();
    cfg.gnss.bias = ps.vec3(*j, P, "bias_m", cfg.gnss.bias);
    if (const json* lat = ps.child(*j, "latency")) cfg.gnss_latency = parse_latency(ps, *lat, {"gnss", "latency"}, cfg.gnss_latency);
  }

  if (const json* j = ps.child(root, "cameras")) {
    const std::vector<std::string> P{"cameras"};
    ps.expect_object(*j, P, {"rate_hz", "bearing_std_rad", "p_miss", "latency", "nodes"});
    cfg.camera_net.rate = ps.number(*j, P, "rate_hz", cfg.camera_net.rate, 0.0, true);
    const double bstd = ps.number(*j, P, "bearing_std_rad", cfg.camera_net.cameras.front().bearing_std, 0.0, true);
    const double pmiss = ps.number(*j, P, "p_miss", cfg.camera_net.cameras.front().p_miss, 0.0, false, 1.0, true);
    if (const json* lat = ps.child(*j, "latency")) cfg.camera_net.latency = parse_latency(ps, *lat, {"cameras", "latency"}, cfg.camera_net.latency);
    if (const json* nodes = ps.child(*j, "nodes")) {
      auto np = P;
      np.push_back("nodes");
      if (!nodes->is_array() || nodes->empty()) ps.fail(np, "expected a non-empty array");
      cfg.camera_net.cameras.clear();
      for (std::size_t i = 0; i < nodes->size(); ++i) {
        auto ip = np;
        ip.push_back("[" + std::to_string(i) + "]");
        const json& n = (*nodes)[i];
        ps.expect_object(n, ip, {"id", "position_m", "bearing_std_rad", "p_miss", "fov_half_angle_rad", "boresight"});
        CameraModel cam;
        cam.id = static_cast<int>(ps.integer(n, ip, "id", static_cast<std::int64_t>(i), 0));
        if (!n.contains("position_m")) ps.fail(ip, "camera needs position_m");
        cam.position = ps.vec3(n, ip, "position_m", Vec3::Zero());
        cam.bearing_std = ps.number(n, ip, "bearing_std_rad", bstd, 0.0, true);
        cam.p_miss = ps.number(n, ip, "p_miss", pmiss, 0.0, false, 1.0, true);
        if (n.contains("fov_half_angle_rad")) {
          cam.fov_half_angle = ps.number(n, ip, "fov_half_angle_rad", 0.0, 0.0, true);
          if (!n.contains("boresight")) ps.fail(ip, "fov_half_angle_rad requires boresight");
          cam.boresight = ps.vec3(n, ip, "boresight", Vec3::UnitX());
          if (cam.boresight.norm() < 1e-12) {
            auto bp = ip;
            bp.push_back("boresight");
            ps.fail(bp, "must be nonzero");
          }
          cam.boresight.normalize();
        }
        cfg.camera_net.cameras.push_back(cam);
      }
    } else {
      for (auto& cam : cfg.camera_net.cameras) {
        cam.bearing_std = bstd;
        cam.p_miss = pmiss;
      }
    }
    for (auto& cam : cfg.camera_net.cameras) cam.rate = cfg.camera_net.rate;
  }

  if (const json* j = ps.child(root, "particle_filter")) {
    const std::vector<std::string> P{"particle_filter"};
    ps.expect_object(*j, P, {"particles", "accel_std_mps2", "init_half_extent_m", "init_vel_std_mps", "cov_inflation", "cov_floor_std_m"});
    cfg.pf.particles = static_cast<std::size_t>(ps.integer(*j, P, "particles", static_cast<std::int64_t>(cfg.pf.particles), 1));
    cfg.pf.accel_std = ps.number(*j, P, "accel_std_mps2", cfg.pf.accel_std, 0.0);
    cfg.pf.init_half_extent = ps.number(*j, P, "init_half_extent_m", cfg.pf.init_half_extent, 0.0);
    cfg.pf.init_vel_std = ps.number(*j, P, "init_vel_std_mps", cfg.pf.init_vel_std, 0.0);
    cfg.pf.publish.cov_inflation = ps.number(*j, P, "cov_inflation", cfg.pf.publish.cov_inflation, 0.0, true);
    cfg.pf.publish.cov_floor_std = ps.number(*j, P, "cov_floor_std_m", cfg.pf.publish.cov_floor_std, 0.0, true);
  }

  if (const json* j = ps.child(root, "attack")) {
    const std::vector<std::string> P{"attack"};
    ps.expect_object(*j, P, {"mode", "t_on_s", "direction", "ramp_rate_mps", "margin", "iters", "r_max_mps", "calibration_seed"});
    if (const json* mode = ps.child(*j, "mode")) {
      if (!mode->is_string()) ps.fail({"attack", "mode"}, "expected \"off\" or \"meaconing\"");
      const auto m = mode->get<std::string>();
      if (m == "off") cfg.attack.spec.mode = AttackMode::Off;
      else if (m == "meaconing") cfg.attack.spec.mode = AttackMode::Meaconing;
      else ps.fail({"attack", "mode"}, "expected \"off\" or \"meaconing\", got \"" + m + "\"");
    }
    cfg.attack.spec.t_on = ps.number(*j, P, "t_on_s", cfg.attack.spec.t_on, 0.0);
    const Vec3 dir = ps.vec3(*j, P, "direction", cfg.attack.spec.direction);
    if (dir.norm() < 1e-12) ps.fail({"attack", "direction"}, "must be nonzero");
    cfg.attack.spec.direction = dir.normalized();
    if (const json* rr = ps.child(*j, "ramp_rate_mps")) {
      if (rr->is_string()) {
        if (rr->get<std::string>() != "auto") ps.fail({"attack", "ramp_rate_mps"}, "expected a number or \"auto\"");
        cfg.attack.auto_rate = true;
      } else {
        cfg.attack.spec.ramp_rate = ps.number(*j, P, "ramp_rate_mps", 0.0, 0.0);
        cfg.attack.auto_rate = false;
      }
    }
    cfg.attack.margin = ps.number(*j, P, "margin", cfg.attack.margin, 0.0, true, 1.0, true);
    cfg.attack.iters = static_cast<int>(ps.integer(*j, P, "iters", cfg.attack.iters, 1));
    cfg.attack.r_max = ps.number(*j, P, "r_max_mps", cfg.attack.r_max, 0.0, true);
    if (ps.child(*j, "calibration_seed")) {
      cfg.attack.calibration_seed = static_cast<std::uint64_t>(ps.integer(*j, P, "calibration_seed", 0, 0));
    }
  }

  if (const json* j = ps.child(root, "monitor")) {
    const std::vector<std::string> P{"monitor"};
    ps.expect_object(*j, P, {"alpha", "window"});
    cfg.monitor.alpha = ps.number(*j, P, "alpha", cfg.monitor.alpha, 0.0, true, 1.0, true);
    cfg.monitor.window = static_cast<int>(ps.integer(*j, P, "window", cfg.monitor.window, 1));
  }

  if (const json* j = ps.child(root, "detector")) {
    const std::vector<std::string> P{"detector"};
    ps.expect_object(*j, P, {"window_steps", "slide_steps", "alpha_off", "persistence"});
    cfg.detector.window_steps = static_cast<int>(ps.integer(*j, P, "window_steps", cfg.detector.window_steps, 1));
    cfg.detector.slide_steps = static_cast<int>(ps.integer(*j, P, "slide_steps", cfg.detector.slide_steps, 1));
    cfg.detector.alpha_off = ps.number(*j, P, "alpha_off", cfg.detector.alpha_off, 0.0, true, 1.0, true);
    cfg.detector.persistence = static_cast<int>(ps.integer(*j, P, "persistence", cfg.detector.persistence, 1));
  }

  if (const json* j = ps.child(root, "mitigation")) {
    const std::vector<std::string> P{"mitigation"};
    ps.expect_object(*j, P, {"enabled", "gnss_r_inflation"});
    cfg.mitigation.enabled = ps.boolean(*j, P, "enabled", cfg.mitigation.enabled);
    cfg.mitigation.gnss_r_inflation = ps.number(*j, P, "gnss_r_inflation", cfg.mitigation.gnss_r_inflation, 0.0, true);
  }

  if (const json* j = ps.child(root, "rng")) {
    const std::vector<std::string> P{"rng"};
    ps.expect_object(*j, P, {"algorithm"});
    if (const json* a = ps.child(*j, "algorithm")) {
      if (!a->is_string() || a->get<std::string>() != Rng::kAlgorithm) {
        ps.fail({"rng", "algorithm"}, "only \"" + std::string(Rng::kAlgorithm) + "\" is supported");
      }
    }
  }

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    // validate() reports "path: problem"; add the line if we can find it.
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    std::vector<std::string> path;
    std::stringstream ss(msg.substr(0, colon));
    for (std::string part; std::getline(ss, part, '.');) path.push_back(part);
    ps.fail(path, colon == std::string::npos ? msg : msg.substr(colon + 2));
  }
  return cfg;
}

json latency_json(const LatencyBudget& b) {
  json comps = json::array();
  for (const auto& c : b.components) comps.push_back({{"name", c.name}, {"mean_s", c.mean}, {"std_s", c.std}});
  return {{"components", comps}, {"pad_s", b.pad}, {"target_s", b.target_end_to_end}};
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

std::string nearest_key(const std::string& key, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(key, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (best_d == std::string::npos || best_d > std::max<std::size_t>(2, key.size() / 3)) return {};
  return best;
}

ScenarioConfig ScenarioConfig::defaults() {
  ScenarioConfig c;
  c.plan.waypoints = {{Vec3(0, 0, 2), 0.0},
                      {Vec3(10, 0, 2), 10.0},
                      {Vec3(10, 10, 2), 20.0},
                      {Vec3(0, 10, 2), 30.0},
                      {Vec3(0, 0, 2), 40.0}};
  c.plan.loop = true;
  c.gnss_latency = default_gnss_latency();
  c.camera_net.latency = LatencyBudget{camera_latency_components(), 0.0, 0.0};
  const std::vector<Vec3> poses{Vec3(-5, -5, 4), Vec3(15, -5, 4), Vec3(15, 15, 4), Vec3(-5, 15, 4)};
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CameraModel cam;
    cam.id = static_cast<int>(i);
    cam.position = poses[i];
    cam.rate = c.camera_net.rate;
    c.camera_net.cameras.push_back(cam);
  }
  c.attack.spec.mode = AttackMode::Off;
  c.attack.spec.t_on = 60.0;
  c.attack.spec.direction = Vec3::UnitX();
  c.attack.spec.ramp_rate = 0.05;
  return c;
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); };
  auto is_multiple = [&](double period) {
    const double steps = period / dt;
    return std::abs(steps - std::round(steps)) < 1e-9 && std::round(steps) >= 1.0;
  };
  if (!is_multiple(1.0 / gnss.rate)) fail("gnss.rate_hz", "sample period must be a whole number of dynamics steps");
  if (!is_multiple(1.0 / camera_net.rate)) fail("cameras.rate_hz", "sample period must be a whole number of dynamics steps");
  if (duration > 0.0 && std::abs(duration / dt - std::round(duration / dt)) > 1e-9) {
    fail("duration_s", "must be a whole number of dynamics steps");
  }
  try {
    plan.validate();
  } catch (const std::invalid_argument& e) {
    fail("mission.waypoints", e.what());
  }
  try {
    gnss.validate();
    gnss_latency.validate();
  } catch (const std::invalid_argument& e) {
    fail("gnss", e.what());
  }
  try {
    camera_net.latency.validate();
  } catch (const std::invalid_argument& e) {
    fail("cameras.latency", e.what());
  }
  std::vector<int> ids;
  for (const auto& cam : camera_net.cameras) {
    try {
      cam.validate();
    } catch (const std::invalid_argument& e) {
      fail("cameras.nodes", e.what());
    }
    ids.push_back(cam.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) fail("cameras.nodes", "camera ids must be unique");
  try {
    attack.spec.validate();
  } catch (const std::invalid_argument& e) {
    fail("attack", e.what());
  }
  try {
    detector.validate();
  } catch (const std::invalid_argument& e) {
    fail("detector", e.what());
  }
  if (std::ceil(estimator.buffer_horizon / dt) < 1.0) fail("estimator.buffer_s", "must cover at least one step");
}

ScenarioConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  Parser ps(text);
  try {
    return parse_document(ps, root);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

json to_json(const ScenarioConfig& c) {
  json wps = json::array();
  for (const auto& w : c.plan.waypoints) wps.push_back({{"position_m", vec_json(w.p)}, {"time_s", w.t}});
  json nodes = json::array();
  for (const auto& cam : c.camera_net.cameras) {
    json n = {{"id", cam.id}, {"position_m", vec_json(cam.position)}, {"bearing_std_rad", cam.bearing_std}, {"p_miss", cam.p_miss}};
    if (cam.fov_half_angle) {
      n["fov_half_angle_rad"] = *cam.fov_half_angle;
      n["boresight"] = vec_json(cam.boresight);
    }
    nodes.push_back(n);
  }
  json attack = {{"mode", c.attack.spec.mode == AttackMode::Off ? "off" : "meaconing"},
                 {"t_on_s", c.attack.spec.t_on},
                 {"direction", vec_json(c.attack.spec.direction)},
                 {"margin", c.attack.margin},
                 {"iters", c.attack.iters},
                 {"r_max_mps", c.attack.r_max}};
  if (c.attack.auto_rate) attack["ramp_rate_mps"] = "auto";
  else attack["ramp_rate_mps"] = c.attack.spec.ramp_rate;
  if (c.attack.calibration_seed) attack["calibration_seed"] = *c.attack.calibration_seed;

  return {{"seed", c.seed},
          {"duration_s", c.duration},
          {"dynamics", {{"dt_s", c.dt}, {"accel_noise_std_mps2", c.accel_noise_std}}},
          {"mission", {{"waypoints", wps}, {"loop", c.plan.loop}}},
          {"controller", {{"kp", c.gains.kp}, {"kd", c.gains.kd}, {"a_max_mps2", c.a_max}}},
          {"estimator", {{"init_pos_std_m", c.estimator.init_pos_std}, {"init_vel_std_mps", c.estimator.init_vel_std}, {"buffer_s", c.estimator.buffer_horizon}}},
          {"gnss", {{"rate_hz", c.gnss.rate}, {"noise_cov_diag_m2", vec_json(c.gnss.R.diagonal())}, {"bias_m", vec_json(c.gnss.bias)}, {"latency", latency_json(c.gnss_latency)}}},
          {"cameras", {{"rate_hz", c.camera_net.rate}, {"latency", latency_json(c.camera_net.latency)}, {"nodes", nodes}}},
          {"particle_filter", {{"particles", c.pf.particles}, {"accel_std_mps2", c.pf.accel_std}, {"init_half_extent_m", c.pf.init_half_extent},
                               {"init_vel_std_mps", c.pf.init_vel_std}, {"cov_inflation", c.pf.publish.cov_inflation}, {"cov_floor_std_m", c.pf.publish.cov_floor_std}}},
          {"attack", attack},
          {"monitor", {{"alpha", c.monitor.alpha}, {"window", c.monitor.window}}},
          {"detector", {{"window_steps", c.detector.window_steps}, {"slide_steps", c.detector.slide_steps}, {"alpha_off", c.detector.alpha_off}, {"persistence", c.detector.persistence}}},
          {"mitigation", {{"enabled", c.mitigation.enabled}, {"gnss_r_inflation", c.mitigation.gnss_r_inflation}}},
          {"rng", {{"algorithm", std::string(Rng::kAlgorithm)}}}};
}

}  // namespace fdisim
