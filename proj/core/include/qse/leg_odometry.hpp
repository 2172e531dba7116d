// Base velocity from stance-leg kinematics, plus per-leg slip detection.
//
// A foot that sticks to ground makes the base move at
//   v = -(J(q) qd + w x p_foot)        (body frame, bias-corrected gyro w)
// per stance leg; the base-velocity measurement is the mean over stance legs.
// Slip is flagged by comparing measured foot motion against the planner's
// reference trajectory: a normalized velocity mismatch
//   dV = sqrt(sum_i ((vd_i - v_i) / (|vd_i| + m))^2),  i in {x, y, z}
// and the (signed) mismatch of body-frame foot distances
//   dP = ||p_desired|| - ||p_measured||.
// Leg slips when it is in stance and both exceed their thresholds.

#pragma once

#include <deque>
#include <optional>

#include "qse/measurements.hpp"
#include "qse/robot_model.hpp"
#include "qse/types.hpp"

namespace qse {

struct LegOdometryConfig {
  double slip_margin = 0.1;       // m/s, denominator regularizer in dV
  double slip_eps_v = 0.5;        // dV threshold
  double slip_eps_p = 0.02;       // m, dP threshold
  double pairing_tol = 0.05;      // s, max |t_joint - t_desired| for pairing
  bool slip_detection = true;
};

struct SlipMetrics {
  double dv = 0.0;
  double dp = 0.0;
  bool evaluated = false;  // false when no paired reference was available
};

struct LegOdometryOutput {
  PerLeg<Vec3> foot_vel{};           // -alpha (J qd + w x p), body frame
  PerLeg<bool> slip{};               // beta_i
  PerLeg<SlipMetrics> metrics{};
  std::optional<Vec3> base_velocity; // mean over stance legs; nullopt in flight
  int stance_count = 0;
  int slip_count = 0;
};

class LegOdometry {
 public:
  LegOdometry(const RobotModel& model, const LegOdometryConfig& config);

  // Planner reference stream; samples must arrive in time order.
  void setDesired(const DesiredFootSample& desired);

  LegOdometryOutput update(const JointSample& js, const Vec3& omega_body,
                           const PerLeg<bool>& contact);

  void reset();

 private:
  const RobotModel& model_;
  LegOdometryConfig cfg_;
  std::deque<DesiredFootSample> desired_;  // last two reference samples
};

}  // namespace qse
