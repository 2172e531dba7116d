// Deterministic synthetic quadruped walking scenarios.
//
// The base follows a closed-form trajectory (constant commanded speed and yaw
// rate plus small periodic sway, bob and rocking), so position, velocity,
// acceleration and body rates are exact analytic expressions, never finite
// differences.  Feet follow a periodic gait schedule: footholds are placed
// under the hip with a half-stance velocity lead, swing legs interpolate with
// a smooth profile, and joint trajectories come from closed-form inverse
// kinematics.  Torques are synthesized from quasi-static force balance, so a
// torque-based contact estimator sees consistent data.
//
// Foot slip can be injected: early in a stance phase the foot drags along the
// ground toward the base at constant speed for a fixed duration, while the
// emitted planner reference keeps the nominal no-slip trajectory.
//
// All randomness (sensor noise, exteroceptive drift, slip decisions) derives
// from the scenario seed; equal configs produce byte-identical logs.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "qse/log.hpp"
#include "qse/measurements.hpp"
#include "qse/robot_model.hpp"

namespace qse {

struct BaseTrajParams;

// Requested gait cannot be realised (workspace violation, bad rates/phasing).
class InfeasibleGait : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  std::string gait = "trot";     // stand | crawl | trot
  double duration = 60.0;        // s
  double imu_rate = 400.0;       // Hz; also the ground-truth record rate
  double joint_rate = 400.0;     // Hz; also the planner-reference rate
  double extero_rate = 10.0;     // Hz; <= 0 disables the exteroceptive sensor
  double extero_latency = 0.0;   // s; record at t carries the pose of t-latency
  bool extero_twist = true;      // camera-like sensors also report velocity
  std::uint64_t seed = 1;

  // Commanded motion and gait shape.  Negative values select per-gait
  // defaults (period, duty, oscillation amplitudes) or a per-model default
  // (stand_height).
  double speed = 0.3;            // m/s forward
  double yaw_rate = 0.0;         // rad/s
  double period = -1.0;          // s per gait cycle
  double duty = -1.0;            // stance fraction of the cycle
  double step_height = 0.06;     // m swing apex
  double stand_height = -1.0;    // m base above ground
  double sway_amp = -1.0;        // m lateral oscillation
  double bob_amp = -1.0;         // m vertical oscillation
  double roll_amp = -1.0;        // rad
  double pitch_amp = -1.0;       // rad

  // Sensor noise (white, per-sample sigma scaled by sqrt(rate) where the
  // value is a density).  Zero everywhere gives noise-free logs.
  double sigma_gyro = 0.0;       // rad/s/sqrt(Hz)
  double sigma_accel = 0.0;      // m/s^2/sqrt(Hz)
  Vec3 gyro_bias = Vec3::Zero(); // rad/s, constant true bias
  double sigma_joint_q = 0.0;    // rad
  double sigma_joint_qd = 0.0;   // rad/s
  double sigma_tau = 0.0;        // Nm
  double sigma_extero_pos = 0.0; // m
  double sigma_extero_att = 0.0; // rad
  double sigma_extero_vel = 0.0; // m/s
  double extero_drift_pos = 0.0; // m/sqrt(s) random-walk density
  double extero_drift_att = 0.0; // rad/sqrt(s)

  // Slip injection.
  double slip_probability = 0.0; // per leg stance
  double slip_duration = 0.12;   // s of sliding
  double slip_speed = 0.3;       // m/s drag speed
};

class Simulator {
 public:
  // Validates the scenario (rates, phasing, reachability sweep over the whole
  // run); throws InfeasibleGait or std::invalid_argument.
  Simulator(const RobotModel& model, const ScenarioConfig& config);

  // Generates the scenario in time order into `sink`.  Events at equal
  // timestamps arrive as truth, planner reference, joints, extero, IMU, so
  // replay consumers that initialize from truth are ready before the first
  // sensor sample of that instant.
  void run(const std::function<void(const LogEvent&)>& sink);

  std::vector<LogEvent> runToVector();

  // True base state at an arbitrary time (closed form); exposed for tests.
  GroundTruthSample truth(double t) const;

 private:
  struct LegMotion {
    Vec3 pos_w = Vec3::Zero();  // actual foot point, world
    Vec3 vel_w = Vec3::Zero();
    Vec3 des_pos_w = Vec3::Zero();  // planner reference (never slips)
    Vec3 des_vel_w = Vec3::Zero();
    bool stance = false;
    bool slipping = false;
  };
  struct SlipSegment {
    bool active = false;
    double t0 = 0.0, t1 = 0.0;
    Vec3 vel = Vec3::Zero();  // world drag velocity while sliding
  };

  BaseTrajParams baseParams() const;
  Vec3 foothold(Leg leg, long n) const;
  SlipSegment slipSegment(Leg leg, long n) const;
  LegMotion legMotion(Leg leg, double t) const;
  void emitJointTick(double t, std::mt19937_64& rng, std::normal_distribution<double>& normal,
                     const std::function<void(const LogEvent&)>& sink);

  const RobotModel& model_;
  ScenarioConfig cfg_;
  double period_ = 0.0, duty_ = 0.0, height_ = 0.0;
  double sway_ = 0.0, bob_ = 0.0, roll_amp_ = 0.0, pitch_amp_ = 0.0;
  PerLeg<double> phase_offset_{};
};

}  // namespace qse
