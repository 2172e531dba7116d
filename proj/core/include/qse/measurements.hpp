// Timestamped sensor samples and record types shared across the estimator,
// the simulator and the log format.  Times are seconds on one monotonic clock.

#pragma once

#include <array>

#include "qse/so3.hpp"
#include "qse/types.hpp"

namespace qse {

// Gyro in rad/s and accelerometer specific force in m/s^2, both in the IMU
// frame.  A resting, level IMU reads accel = (0, 0, +g).
struct ImuSample {
  double t = 0.0;
  Vec3 gyro = Vec3::Zero();
  Vec3 accel = Vec3::Zero();
};

// Joint positions (rad), velocities (rad/s) and actuation torques (Nm) in the
// canonical [LF, RF, LH, RH] x [HAA, HFE, KFE] order.
struct JointSample {
  double t = 0.0;
  Vec12 q = Vec12::Zero();
  Vec12 qd = Vec12::Zero();
  Vec12 tau = Vec12::Zero();
};

// Pose of the sensor body in the sensor's own world frame (VO / LiDAR
// odometries each keep a private world anchor).
struct ExteroPoseSample {
  double t = 0.0;
  Vec3 pos = Vec3::Zero();
  Quat att;
};

// Linear velocity of the sensor body in the sensor's world frame.
struct ExteroTwistSample {
  double t = 0.0;
  Vec3 vel = Vec3::Zero();
};

// Reference foot positions of the gait planner, body frame.
struct DesiredFootSample {
  double t = 0.0;
  PerLeg<Vec3> pos{};
};

// Simulator truth: base pose/velocity plus per-leg contact and slip flags.
struct GroundTruthSample {
  double t = 0.0;
  Vec3 pos = Vec3::Zero();        // world
  Quat att;                       // body-to-world
  Vec3 vel = Vec3::Zero();        // world
  Vec3 omega = Vec3::Zero();      // body frame
  std::array<bool, kNumLegs> contact{};
  std::array<bool, kNumLegs> slip{};
};

// Estimator output at one IMU tick.
struct EstimateSample {
  double t = 0.0;
  Vec3 pos = Vec3::Zero();        // world
  Quat att;                       // body-to-world
  Vec3 vel = Vec3::Zero();        // world
  Vec3 gyro_bias = Vec3::Zero();  // body frame
  std::array<bool, kNumLegs> contact{};
  std::array<bool, kNumLegs> slip{};
};

}  // namespace qse
