#include "qse/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qse {
namespace {

// Cheap deterministic hash chain for per-(leg, cycle) slip decisions so that
// realizations do not depend on query order.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double hashUniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  const std::uint64_t h = splitmix64(splitmix64(seed ^ (a * 0x51ull + 1)) ^ b);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Eigen::Vector2d rot2(double a, const Eigen::Vector2d& v) {
  const double c = std::cos(a), s = std::sin(a);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

Eigen::Vector2d perp(const Eigen::Vector2d& v) { return {-v.y(), v.x()}; }

// Smooth step and its derivative for swing interpolation.
double smooth5(double s) { return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s); }
double smooth5d(double s) { return 30.0 * s * s * (1.0 - s) * (1.0 - s); }

struct BaseKin {
  Vec3 pos, vel, acc;   // world
  Mat3 R;               // body-to-world
  Quat q;
  Vec3 omega;           // body frame
  double yaw;
};

}  // namespace

// ---------------------------------------------------------------------------

struct BaseTrajParams {
  double speed, yaw_rate, height, T;
  double sway, bob, roll_amp, pitch_amp;
};

static BaseKin evalBase(const BaseTrajParams& p, double t) {
  const double r = p.yaw_rate;
  const double yaw = r * t;

  Eigen::Vector2d xy, vxy, axy;
  if (std::abs(r) < 1e-12) {
    xy = {p.speed * t, 0.0};
    vxy = {p.speed, 0.0};
    axy = {0.0, 0.0};
  } else {
    xy = (p.speed / r) * Eigen::Vector2d(std::sin(yaw), 1.0 - std::cos(yaw));
    vxy = p.speed * Eigen::Vector2d(std::cos(yaw), std::sin(yaw));
    axy = p.speed * r * Eigen::Vector2d(-std::sin(yaw), std::cos(yaw));
  }

  // Lateral sway rides in the heading frame: f = Rz(yaw) u with u = (0, l).
  const double w1 = 2.0 * M_PI / p.T;
  const double w2 = 2.0 * w1;
  const double l = p.sway * std::sin(w1 * t);
  const double ld = p.sway * w1 * std::cos(w1 * t);
  const double ldd = -p.sway * w1 * w1 * std::sin(w1 * t);
  const Eigen::Vector2d u(0.0, l), ud(0.0, ld), udd(0.0, ldd);
  xy += rot2(yaw, u);
  vxy += rot2(yaw, r * perp(u) + ud);
  axy += rot2(yaw, r * r * perp(perp(u)) + 2.0 * r * perp(ud) + udd);

  const double z = p.height + p.bob * std::sin(w2 * t);
  const double zd = p.bob * w2 * std::cos(w2 * t);
  const double zdd = -p.bob * w2 * w2 * std::sin(w2 * t);

  const double roll = p.roll_amp * std::sin(w1 * t + 0.7);
  const double rolld = p.roll_amp * w1 * std::cos(w1 * t + 0.7);
  const double pitch = p.pitch_amp * std::sin(w2 * t + 0.3);
  const double pitchd = p.pitch_amp * w2 * std::cos(w2 * t + 0.3);

  BaseKin k;
  k.pos = Vec3(xy.x(), xy.y(), z);
  k.vel = Vec3(vxy.x(), vxy.y(), zd);
  k.acc = Vec3(axy.x(), axy.y(), zdd);
  k.yaw = yaw;
  k.R = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
         Eigen::AngleAxisd(roll, Vec3::UnitX()))
            .toRotationMatrix();
  k.q = Quat::fromRotationMatrix(k.R).canonical();

  // Body rates from ZYX Euler angle rates.
  const double sp = std::sin(pitch), cp = std::cos(pitch);
  const double sr = std::sin(roll), cr = std::cos(roll);
  k.omega = Vec3(rolld - r * sp, pitchd * cr + r * cp * sr, r * cp * cr - pitchd * sr);
  return k;
}

// ---------------------------------------------------------------------------

Simulator::Simulator(const RobotModel& model, const ScenarioConfig& config)
    : model_(model), cfg_(config) {
  if (cfg_.duration <= 0.0) throw std::invalid_argument("scenario duration must be positive");
  if (cfg_.imu_rate <= 0.0 || cfg_.joint_rate <= 0.0) {
    throw std::invalid_argument("imu_rate and joint_rate must be positive");
  }
  if (cfg_.extero_latency < 0.0) throw std::invalid_argument("negative extero latency");

  if (cfg_.gait == "trot") {
    period_ = cfg_.period > 0 ? cfg_.period : 0.8;
    duty_ = cfg_.duty > 0 ? cfg_.duty : 0.55;
    phase_offset_ = {0.0, 0.5, 0.5, 0.0};  // diagonal pairs
  } else if (cfg_.gait == "crawl") {
    period_ = cfg_.period > 0 ? cfg_.period : 1.2;
    duty_ = cfg_.duty > 0 ? cfg_.duty : 0.8;
    phase_offset_ = {0.0, 0.5, 0.75, 0.25};
  } else if (cfg_.gait == "stand") {
    period_ = cfg_.period > 0 ? cfg_.period : 1.0;
    duty_ = 1.0;
    phase_offset_ = {0.0, 0.0, 0.0, 0.0};
    if (std::abs(cfg_.speed) > 1e-12 || std::abs(cfg_.yaw_rate) > 1e-12) {
      throw InfeasibleGait("stand gait cannot track a nonzero speed or yaw rate");
    }
  } else {
    throw std::invalid_argument("unknown gait: " + cfg_.gait);
  }
  if (duty_ <= 0.0 || duty_ > 1.0) throw InfeasibleGait("stance duty must lie in (0, 1]");

  const bool still = cfg_.gait == "stand";
  height_ = cfg_.stand_height > 0 ? cfg_.stand_height
                                  : 0.8 * (model_.thighLength() + model_.shankLength());
  sway_ = cfg_.sway_amp >= 0 ? cfg_.sway_amp : (still ? 0.0 : 0.015);
  bob_ = cfg_.bob_amp >= 0 ? cfg_.bob_amp : (still ? 0.0 : 0.008);
  roll_amp_ = cfg_.roll_amp >= 0 ? cfg_.roll_amp : (still ? 0.0 : 0.010);
  pitch_amp_ = cfg_.pitch_amp >= 0 ? cfg_.pitch_amp : (still ? 0.0 : 0.006);

  // Reachability sweep over the whole run: every leg must stay inside the
  // closed-form IK workspace (including slip displacement).
  const double sweep_rate = std::min(cfg_.joint_rate, 200.0);
  const long steps = std::lround(cfg_.duration * sweep_rate);
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / sweep_rate;
    const BaseKin kin = evalBase(baseParams(), t);
    for (Leg leg : kAllLegs) {
      const LegMotion lm = legMotion(leg, t);
      const Vec3 p_b = kin.R.transpose() * (lm.pos_w - kin.pos);
      if (!model_.footIK(p_b, leg)) {
        throw InfeasibleGait("foot target unreachable for leg " +
                             std::to_string(legIndex(leg)) + " at t=" + std::to_string(t));
      }
    }
  }
}

BaseTrajParams Simulator::baseParams() const {
  return {cfg_.speed, cfg_.yaw_rate, height_, period_, sway_, bob_, roll_amp_, pitch_amp_};
}

// Nominal foothold of a leg's n-th gait cycle: under the hip at touchdown
// plus half a stance of velocity lead, on the ground plane.
Vec3 Simulator::foothold(Leg leg, long n) const {
  const int i = legIndex(leg);
  const double t_td = (static_cast<double>(n) - phase_offset_[i]) * period_;
  const BaseKin kin = evalBase(baseParams(), t_td);
  const Vec3 hip = model_.hipOffset(leg);
  const Eigen::Vector2d lat(hip.x(), hip.y() + model_.sideSign(leg) * model_.abductionOffset());
  Eigen::Vector2d xy = kin.pos.head<2>() + rot2(kin.yaw, lat);
  xy += 0.5 * duty_ * period_ * kin.vel.head<2>();
  return Vec3(xy.x(), xy.y(), 0.0);
}

Simulator::SlipSegment Simulator::slipSegment(Leg leg, long n) const {
  SlipSegment seg;
  if (cfg_.slip_probability <= 0.0 || duty_ >= 1.0) return seg;
  const double u = hashUniform(cfg_.seed, static_cast<std::uint64_t>(legIndex(leg)),
                               static_cast<std::uint64_t>(n + (1ll << 32)));
  if (u >= cfg_.slip_probability) return seg;

  const int i = legIndex(leg);
  const double t_td = (static_cast<double>(n) - phase_offset_[i]) * period_;
  if (t_td < 0.0) return seg;  // no slip in partially visible first cycles
  const double stance = duty_ * period_;
  seg.active = true;
  seg.t0 = t_td + 0.1 * stance;
  seg.t1 = std::min(seg.t0 + cfg_.slip_duration, t_td + 0.9 * stance);

  // Drag direction: horizontal, from the foothold toward the base, so the
  // body-frame foot distance shrinks while sliding.
  const Vec3 fh = foothold(leg, n);
  const BaseKin kin = evalBase(baseParams(), seg.t0);
  Eigen::Vector2d d = kin.pos.head<2>() - fh.head<2>();
  if (d.norm() < 1e-9) d = rot2(kin.yaw, Eigen::Vector2d(-1.0, 0.0));
  d.normalize();
  seg.vel = cfg_.slip_speed * Vec3(d.x(), d.y(), 0.0);
  return seg;
}

Simulator::LegMotion Simulator::legMotion(Leg leg, double t) const {
  const int i = legIndex(leg);
  LegMotion out;

  double cycles = t / period_ + phase_offset_[i];
  long n = static_cast<long>(std::floor(cycles));
  double phi = cycles - static_cast<double>(n);
  if (duty_ >= 1.0) {  // permanent stance, pinned to the first foothold
    n = 0;
    phi = 0.0;
  }

  const Vec3 fh = foothold(leg, n);
  const SlipSegment seg = slipSegment(leg, n);

  if (phi < duty_) {
    out.stance = true;
    out.des_pos_w = fh;
    out.des_vel_w.setZero();
    out.pos_w = fh;
    out.vel_w.setZero();
    if (seg.active && t >= seg.t0) {
      const double t_end = std::min(t, seg.t1);
      out.pos_w += seg.vel * (t_end - seg.t0);
      if (t < seg.t1) {
        out.vel_w = seg.vel;
        out.slipping = true;
      }
    }
    return out;
  }

  // Swing: actual trajectory starts from the (possibly slipped) stance-end
  // point, the planner reference from the nominal foothold.
  const double s = (phi - duty_) / (1.0 - duty_);
  const double T_sw = (1.0 - duty_) * period_;
  const Vec3 target = foothold(leg, n + 1);

  Vec3 start_actual = fh;
  if (seg.active) start_actual += seg.vel * (seg.t1 - seg.t0);

  const double sig = smooth5(s);
  const double sigd = smooth5d(s) / T_sw;
  const double zs = cfg_.step_height * 16.0 * s * s * (1.0 - s) * (1.0 - s);
  const double zsd = cfg_.step_height * 32.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / T_sw;

  out.pos_w = start_actual + sig * (target - start_actual);
  out.vel_w = sigd * (target - start_actual);
  out.pos_w.z() += zs;
  out.vel_w.z() += zsd;
  out.des_pos_w = fh + sig * (target - fh);
  out.des_vel_w = sigd * (target - fh);
  out.des_pos_w.z() += zs;
  out.des_vel_w.z() += zsd;
  return out;
}

GroundTruthSample Simulator::truth(double t) const {
  const BaseKin kin = evalBase(baseParams(), t);
  GroundTruthSample gt;
  gt.t = t;
  gt.pos = kin.pos;
  gt.att = kin.q;
  gt.vel = kin.vel;
  gt.omega = kin.omega;
  for (Leg leg : kAllLegs) {
    const LegMotion lm = legMotion(leg, t);
    gt.contact[legIndex(leg)] = lm.stance;
    gt.slip[legIndex(leg)] = lm.slipping;
  }
  return gt;
}

void Simulator::run(const std::function<void(const LogEvent&)>& sink) {
  std::mt19937_64 rng(cfg_.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto noise3 = [&]() { return Vec3(normal(rng), normal(rng), normal(rng)); };

  const double g = model_.gravity();
  const double imu_sigma = cfg_.sigma_gyro * std::sqrt(cfg_.imu_rate);
  const double acc_sigma = cfg_.sigma_accel * std::sqrt(cfg_.imu_rate);

  // Exteroceptive world drift state.
  Quat drift_att;
  Vec3 drift_pos = Vec3::Zero();

  const bool have_extero = cfg_.extero_rate > 0.0;
  const long n_imu = std::lround(cfg_.duration * cfg_.imu_rate);
  const long n_joint = std::lround(cfg_.duration * cfg_.joint_rate);
  const long n_ext = have_extero ? std::lround(cfg_.duration * cfg_.extero_rate) : -1;

  long k_imu = 0, k_joint = 0, k_ext = 0;
  long k_truth = -1;
  const double inf = std::numeric_limits<double>::infinity();

  while (true) {
    const double t_imu = k_imu <= n_imu ? static_cast<double>(k_imu) / cfg_.imu_rate : inf;
    const double t_joint = k_joint <= n_joint ? static_cast<double>(k_joint) / cfg_.joint_rate : inf;
    const double t_ext =
        (have_extero && k_ext <= n_ext) ? static_cast<double>(k_ext) / cfg_.extero_rate : inf;
    const double t = std::min({t_imu, t_joint, t_ext});
    if (t == inf) break;

    // Tie order at equal timestamps: truth, planner/joints, extero, IMU.
    if (t == t_imu && k_imu != k_truth) {
      sink(truth(t_imu));
      k_truth = k_imu;
    }
    if (t_joint <= t) {
      emitJointTick(t_joint, rng, normal, sink);
      ++k_joint;
      continue;
    }
    if (t_ext <= t) {
      const double dt_e = 1.0 / cfg_.extero_rate;
      drift_pos += cfg_.extero_drift_pos * std::sqrt(dt_e) * noise3();
      if (cfg_.extero_drift_att > 0.0) {
        drift_att = (drift_att * Quat::exp(cfg_.extero_drift_att * std::sqrt(dt_e) * noise3()))
                        .canonical();
      }

      const double t_eff = std::max(t_ext - cfg_.extero_latency, 0.0);
      const BaseKin kin = evalBase(baseParams(), t_eff);
      const Mat3 Dt = drift_att.toRotationMatrix().transpose();

      ExteroPoseSample pose;
      pose.t = t_ext;
      pose.pos = Dt * (kin.pos - drift_pos);
      if (cfg_.sigma_extero_pos > 0.0) pose.pos += cfg_.sigma_extero_pos * noise3();
      Quat att = Quat::fromRotationMatrix(Dt * kin.R);
      if (cfg_.sigma_extero_att > 0.0) att = att * Quat::exp(cfg_.sigma_extero_att * noise3());
      pose.att = att.canonical();
      sink(pose);

      if (cfg_.extero_twist) {
        ExteroTwistSample tw;
        tw.t = t_ext;
        tw.vel = Dt * kin.vel;
        if (cfg_.sigma_extero_vel > 0.0) tw.vel += cfg_.sigma_extero_vel * noise3();
        sink(tw);
      }
      ++k_ext;
      continue;
    }

    const BaseKin kin = evalBase(baseParams(), t_imu);
    ImuSample imu;
    imu.t = t_imu;
    imu.gyro = kin.omega + cfg_.gyro_bias;
    imu.accel = kin.R.transpose() * (kin.acc + Vec3(0, 0, g));
    if (cfg_.sigma_gyro > 0.0) imu.gyro += imu_sigma * noise3();
    if (cfg_.sigma_accel > 0.0) imu.accel += acc_sigma * noise3();
    sink(imu);
    ++k_imu;
  }
}

void Simulator::emitJointTick(double t, std::mt19937_64& rng,
                              std::normal_distribution<double>& normal,
                              const std::function<void(const LogEvent&)>& sink) {
  const BaseKin kin = evalBase(baseParams(), t);
  const Mat3 Rt = kin.R.transpose();
  const double g = model_.gravity();

  DesiredFootSample des;
  des.t = t;

  JointSample js;
  js.t = t;

  PerLeg<Vec3> p_body{};
  PerLeg<bool> stance{};
  int n_stance = 0;
  for (Leg leg : kAllLegs) {
    const int i = legIndex(leg);
    const LegMotion lm = legMotion(leg, t);
    stance[i] = lm.stance;
    if (lm.stance) ++n_stance;

    des.pos[i] = Rt * (lm.des_pos_w - kin.pos);

    p_body[i] = Rt * (lm.pos_w - kin.pos);
    const auto q_leg = model_.footIK(p_body[i], leg);
    if (!q_leg) {
      throw InfeasibleGait("foot left the workspace at t=" + std::to_string(t));
    }
    js.q.segment<3>(3 * i) = *q_leg;

    const Vec3 v_body = Rt * (lm.vel_w - kin.vel) - kin.omega.cross(p_body[i]);
    js.qd.segment<3>(3 * i) = model_.footRatesFromVelocity(js.q, v_body, leg);
  }

  // Quasi-static ground forces: minimum-norm distribution balancing the
  // required total force and zero moment about the CoM, in the body frame.
  const Vec3 g_body = Rt * Vec3(0, 0, -g);
  const Vec18 h = model_.gravityTorques(js.q, g_body);
  PerLeg<Vec3> grf{};
  if (n_stance > 0) {
    const Vec3 com = model_.comBody(js.q);
    const double mass = model_.totalMass();
    MatX A = MatX::Zero(6, 3 * n_stance);
    Vec6 b;
    b.head<3>() = mass * (Rt * kin.acc - g_body);
    b.tail<3>().setZero();
    int col = 0;
    for (int i = 0; i < kNumLegs; ++i) {
      if (!stance[i]) continue;
      A.block<3, 3>(0, 3 * col) = Mat3::Identity();
      A.block<3, 3>(3, 3 * col) = skew(p_body[i] - com);
      ++col;
    }
    const Mat6 AAt = A * A.transpose() + 1e-9 * Mat6::Identity();
    const VecX F = A.transpose() * AAt.ldlt().solve(b);
    col = 0;
    for (int i = 0; i < kNumLegs; ++i) {
      if (stance[i]) grf[i] = F.segment<3>(3 * col++);
    }
  }

  for (Leg leg : kAllLegs) {
    const int i = legIndex(leg);
    Vec3 tau = h.segment<3>(legDofIndex(leg));
    if (stance[i]) {
      tau -= model_.footJacobian(js.q, leg).transpose() * grf[i];
    }
    js.tau.segment<3>(3 * i) = tau;
  }

  auto noise12 = [&](double sigma, Vec12& v) {
    if (sigma <= 0.0) return;
    for (int k = 0; k < 12; ++k) v[k] += sigma * normal(rng);
  };
  noise12(cfg_.sigma_joint_q, js.q);
  noise12(cfg_.sigma_joint_qd, js.qd);
  noise12(cfg_.sigma_tau, js.tau);

  sink(des);
  sink(js);
}

std::vector<LogEvent> Simulator::runToVector() {
  std::vector<LogEvent> out;
  run([&out](const LogEvent& ev) { out.push_back(ev); });
  return out;
}

}  // namespace qse
