#include "qse/config.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qse {
namespace {

using nlohmann::json;

// Tracks which keys a section consumed so leftovers can be rejected.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("section '" + name_ + "' must be an object");
  }

  ~Section() = default;

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("unknown key '" + item.key() + "' in section '" + name_ + "'");
      }
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("bad value for '" + name_ + "." + key + "'");
    }
  }

  void getPositive(const char* key, double& out) {
    get(key, out);
    if (out <= 0.0) throw ConfigError("'" + name_ + "." + key + "' must be positive");
  }

  void getNonNegative(const char* key, double& out) {
    get(key, out);
    if (out < 0.0) throw ConfigError("'" + name_ + "." + key + "' must be >= 0");
  }

  void getVec3(const char* key, Vec3& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    const json& a = j_.at(key);
    if (!a.is_array() || a.size() != 3) {
      throw ConfigError("'" + name_ + "." + key + "' must be an array of 3 numbers");
    }
    for (int i = 0; i < 3; ++i) {
      if (!a[i].is_number()) throw ConfigError("'" + name_ + "." + key + "' must be numeric");
      out[i] = a[i].get<double>();
    }
  }

  // Scalar -> isotropic, array of 3 -> diagonal covariance.
  void getCov3(const char* key, Mat3& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    const json& v = j_.at(key);
    if (v.is_number()) {
      const double s = v.get<double>();
      if (s <= 0.0) throw ConfigError("'" + name_ + "." + key + "' must be positive");
      out = s * Mat3::Identity();
    } else if (v.is_array() && v.size() == 3) {
      Vec3 d;
      for (int i = 0; i < 3; ++i) {
        d[i] = v[i].get<double>();
        if (d[i] <= 0.0) throw ConfigError("'" + name_ + "." + key + "' must be positive");
      }
      out = d.asDiagonal();
    } else {
      throw ConfigError("'" + name_ + "." + key + "' must be a number or array of 3");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& sub(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void parseContact(const json& j, ContactConfig& c) {
  Section s(j, "contact");
  s.getNonNegative("f_min", c.f_min);
  s.get("hysteresis", c.hysteresis);
  s.get("release_fraction", c.release_fraction);
  if (c.release_fraction <= 0.0 || c.release_fraction > 1.0) {
    throw ConfigError("'contact.release_fraction' must lie in (0, 1]");
  }
  s.getPositive("sigma_min", c.sigma_min);
  std::string mode = c.dynamics == DynamicsMode::kFull ? "full" : "quasi_static";
  s.get("dynamics", mode);
  if (mode == "quasi_static") {
    c.dynamics = DynamicsMode::kQuasiStatic;
  } else if (mode == "full") {
    c.dynamics = DynamicsMode::kFull;
  } else {
    throw ConfigError("'contact.dynamics' must be 'quasi_static' or 'full'");
  }
  s.finish();
}

void parseSlip(const json& j, LegOdometryConfig& c) {
  Section s(j, "slip");
  s.getPositive("margin", c.slip_margin);
  s.getPositive("eps_v", c.slip_eps_v);
  s.getPositive("eps_p", c.slip_eps_p);
  s.getPositive("pairing_tol", c.pairing_tol);
  s.get("enabled", c.slip_detection);
  s.finish();
}

void parseAttitude(const json& j, AttitudeConfig& c) {
  Section s(j, "attitude");
  s.getNonNegative("k1", c.k1);
  s.getNonNegative("k2", c.k2);
  s.getNonNegative("kb", c.kb);
  s.getPositive("b_max", c.b_max);
  s.getPositive("sigma_gyro", c.sigma_gyro);
  s.getPositive("sigma_bias_rw", c.sigma_bias_rw);
  s.getPositive("sigma_accel_dir", c.sigma_accel_dir);
  s.getPositive("sigma_north", c.sigma_north);
  s.getPositive("p0_att", c.p0_att);
  s.getPositive("p0_bias", c.p0_bias);
  s.getPositive("accel_gate", c.accel_gate);
  s.getPositive("north_staleness", c.north_staleness);
  s.getPositive("gravity", c.gravity);
  s.finish();
}

void parseFusion(const json& j, FusionConfig& c) {
  Section s(j, "fusion");
  s.getNonNegative("q_pos", c.q_pos);
  s.getNonNegative("q_vel", c.q_vel);
  std::string disc = c.discretization == NoiseDiscretization::kExact ? "exact" : "piecewise";
  s.get("discretization", disc);
  if (disc == "piecewise") {
    c.discretization = NoiseDiscretization::kPiecewise;
  } else if (disc == "exact") {
    c.discretization = NoiseDiscretization::kExact;
  } else {
    throw ConfigError("'fusion.discretization' must be 'piecewise' or 'exact'");
  }
  s.getCov3("r_leg_vel", c.r_leg_vel);
  s.getCov3("r_extero_vel", c.r_extero_vel);
  s.getCov3("r_extero_pos", c.r_extero_pos);
  s.get("slip_kappa", c.slip_kappa);
  if (c.slip_kappa < 1.0) throw ConfigError("'fusion.slip_kappa' must be >= 1");
  s.getPositive("p0_pos", c.p0_pos);
  s.getPositive("p0_vel", c.p0_vel);
  s.getPositive("cond_max", c.cond_max);
  s.finish();
}

RigidTransform parseTransform(const json& j, const std::string& name) {
  Section s(j, name);
  Vec3 pos = Vec3::Zero();
  s.getVec3("pos", pos);
  RigidTransform X;
  X.t = pos;
  if (s.has("quat")) {
    const json& a = s.sub("quat");
    if (!a.is_array() || a.size() != 4) {
      throw ConfigError("'" + name + ".quat' must be an array of 4 (w, x, y, z)");
    }
    try {
      X.R = Quat(a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>())
                .toRotationMatrix();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("'" + name + ".quat': " + e.what());
    }
  }
  s.finish();
  return X;
}

void parsePipeline(const json& j, PipelineSettings& c) {
  Section s(j, "pipeline");
  s.get("use_extero", c.use_extero);
  s.get("slip_detection", c.slip_detection);
  s.getPositive("max_out_of_order", c.max_out_of_order);
  s.get("init_from_ground_truth", c.init_from_ground_truth);
  if (s.has("extrinsics")) {
    Section e(s.sub("extrinsics"), "pipeline.extrinsics");
    if (e.has("imu")) c.extrinsics.body_from_imu = parseTransform(e.sub("imu"), "pipeline.extrinsics.imu");
    if (e.has("camera")) {
      c.extrinsics.body_from_camera = parseTransform(e.sub("camera"), "pipeline.extrinsics.camera");
    }
    if (e.has("lidar")) {
      c.extrinsics.body_from_lidar = parseTransform(e.sub("lidar"), "pipeline.extrinsics.lidar");
    }
    e.finish();
  }
  s.finish();
}

void parseScenario(const json& j, ScenarioConfig& c) {
  Section s(j, "scenario");
  s.get("gait", c.gait);
  s.getPositive("duration", c.duration);
  s.getPositive("imu_rate", c.imu_rate);
  s.getPositive("joint_rate", c.joint_rate);
  s.get("extero_rate", c.extero_rate);
  s.getNonNegative("extero_latency", c.extero_latency);
  s.get("extero_twist", c.extero_twist);
  s.get("seed", c.seed);
  s.get("speed", c.speed);
  s.get("yaw_rate", c.yaw_rate);
  s.get("period", c.period);
  s.get("duty", c.duty);
  s.getPositive("step_height", c.step_height);
  s.get("stand_height", c.stand_height);
  s.get("sway_amp", c.sway_amp);
  s.get("bob_amp", c.bob_amp);
  s.get("roll_amp", c.roll_amp);
  s.get("pitch_amp", c.pitch_amp);
  s.getNonNegative("sigma_gyro", c.sigma_gyro);
  s.getNonNegative("sigma_accel", c.sigma_accel);
  s.getVec3("gyro_bias", c.gyro_bias);
  s.getNonNegative("sigma_joint_q", c.sigma_joint_q);
  s.getNonNegative("sigma_joint_qd", c.sigma_joint_qd);
  s.getNonNegative("sigma_tau", c.sigma_tau);
  s.getNonNegative("sigma_extero_pos", c.sigma_extero_pos);
  s.getNonNegative("sigma_extero_att", c.sigma_extero_att);
  s.getNonNegative("sigma_extero_vel", c.sigma_extero_vel);
  s.getNonNegative("extero_drift_pos", c.extero_drift_pos);
  s.getNonNegative("extero_drift_att", c.extero_drift_att);
  s.get("slip_probability", c.slip_probability);
  if (c.slip_probability < 0.0 || c.slip_probability > 1.0) {
    throw ConfigError("'scenario.slip_probability' must lie in [0, 1]");
  }
  s.getPositive("slip_duration", c.slip_duration);
  s.getPositive("slip_speed", c.slip_speed);
  s.finish();
}

}  // namespace

AppConfig parseConfig(const std::string& json_text, const std::string& context) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(context + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(context + ": top level must be an object");

  AppConfig cfg;
  Section top(j, "top-level");
  top.get("model", cfg.model_name);
  RobotModel::byName(cfg.model_name);  // validate early; throws on unknown name

  if (top.has("contact")) parseContact(top.sub("contact"), cfg.pipeline.contact);
  if (top.has("slip")) parseSlip(top.sub("slip"), cfg.pipeline.leg_odometry);
  if (top.has("attitude")) parseAttitude(top.sub("attitude"), cfg.pipeline.attitude);
  if (top.has("fusion")) parseFusion(top.sub("fusion"), cfg.pipeline.fusion);
  if (top.has("pipeline")) parsePipeline(top.sub("pipeline"), cfg.pipeline.settings);
  if (top.has("scenario")) parseScenario(top.sub("scenario"), cfg.scenario);
  top.finish();
  return cfg;
}

AppConfig loadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parseConfig(ss.str(), path);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace qse
