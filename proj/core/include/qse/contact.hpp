// Ground-reaction-force and contact estimation from joint torques.
//
// Per leg the foot force (ground on robot, body frame) follows from the
// joint-space rows of the equations of motion:
//   F = J^-T ((M a + h)_leg - tau_leg)
// In quasi-static mode the inertial term M a is dropped and h keeps only
// gravity torques.  A leg is in contact when ||F|| exceeds the force
// threshold (strict), optionally with Schmitt-trigger hysteresis on release.

#pragma once

#include <cstdint>

#include "qse/measurements.hpp"
#include "qse/robot_model.hpp"
#include "qse/types.hpp"

namespace qse {

struct ContactConfig {
  double f_min = 0.0;              // N; <= 0 selects 8% of robot weight
  bool hysteresis = false;         // default: pure threshold comparison
  double release_fraction = 0.6;   // release level as a fraction of f_min
  double sigma_min = 1e-8;         // leg Jacobian singularity guard
  DynamicsMode dynamics = DynamicsMode::kQuasiStatic;
};

struct ContactEstimate {
  PerLeg<Vec3> grf{};       // body frame; stale when valid[i] is false
  PerLeg<bool> valid{};     // false when the leg Jacobian was singular
  PerLeg<bool> contact{};   // alpha_i
};

struct ContactDiagnostics {
  std::uint64_t singular_jacobian = 0;
};

class ContactEstimator {
 public:
  ContactEstimator(const RobotModel& model, const ContactConfig& config);

  // base_att orients gravity; gen_vel/gen_acc feed the inertial terms in
  // kFull mode and may be null (treated as zero).
  ContactEstimate update(const JointSample& js, const Quat& base_att,
                         const Vec18* gen_vel = nullptr, const Vec18* gen_acc = nullptr);

  double forceThreshold() const { return f_min_; }
  const ContactDiagnostics& diagnostics() const { return diag_; }
  void reset();

 private:
  const RobotModel& model_;
  ContactConfig cfg_;
  double f_min_ = 0.0;
  ContactEstimate last_;
  ContactDiagnostics diag_;
};

}  // namespace qse
