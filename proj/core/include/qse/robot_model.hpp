// Kinematic and dynamic model of a 12-DoF point-foot quadruped.
//
// Body frame B: x forward, y left, z up, origin at the trunk geometric centre.
// Legs are ordered LF, RF, LH, RH; each leg has joints [HAA, HFE, KFE] where
// HAA rotates about the body x axis and HFE/KFE about the (rolled) y axis.
// At the zero configuration every leg hangs straight down:
//   foot = hip_offset + (0, side * abduction_offset, -(l_thigh + l_shank)).
//
// The generalized velocity/acceleration layout is
//   [ base linear (B frame); base angular (B frame); 12 joint rates ]
// and the equations of motion read  M(q) a + h(q, v) = tau_gen.

#pragma once

#include <optional>
#include <string>

#include "qse/so3.hpp"
#include "qse/types.hpp"

namespace qse {

inline constexpr int kBaseDof = 6;
inline constexpr int kGenDof = kBaseDof + kNumJoints;

// First generalized-coordinate index of a leg's joint triple.
inline int legDofIndex(Leg leg) { return kBaseDof + 3 * legIndex(leg); }

// Fidelity of the dynamics terms.  kQuasiStatic zeroes the mass matrix and
// keeps only gravity torques in h; kFull runs composite-rigid-body / recursive
// Newton-Euler over the whole branched tree.
enum class DynamicsMode { kQuasiStatic, kFull };

struct DynamicsTerms {
  Mat18 M = Mat18::Zero();  // generalized mass matrix
  Vec18 h = Vec18::Zero();  // Coriolis/centrifugal + gravity bias
};

// Base pose plus full generalized velocity/acceleration, base twist in B.
struct GeneralizedState {
  Vec3 base_pos = Vec3::Zero();   // world frame
  Quat base_att;                  // body-to-world
  Vec12 q = Vec12::Zero();
  Vec18 vel = Vec18::Zero();
  Vec18 acc = Vec18::Zero();
};

// Inertial description of one link, CoM and inertia in the link frame.
struct LinkInertia {
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  Mat3 inertia = Mat3::Zero();  // about the CoM
};

class RobotModel {
 public:
  // ~21.5 kg machine, equal thigh/shank links of 0.25 m.
  static RobotModel aliengoLike();
  // ~30 kg machine, longer 0.33 m shanks and wider stance.
  static RobotModel anymalLike();
  static RobotModel byName(const std::string& name);  // throws on unknown name

  const std::string& name() const { return name_; }
  double totalMass() const;
  double gravity() const { return gravity_; }
  double thighLength() const { return l_thigh_; }
  double shankLength() const { return l_shank_; }
  double abductionOffset() const { return d_abd_; }
  const Vec3& hipOffset(Leg leg) const { return hip_offset_[legIndex(leg)]; }
  // +1 for left legs, -1 for right: sign of the lateral HAA->HFE offset.
  double sideSign(Leg leg) const { return side_sign_[legIndex(leg)]; }

  // Foot point of one leg in B.  q is the full 12-vector.
  Vec3 footPosition(const Vec12& q, Leg leg) const;

  // Geometric Jacobian d(foot)/d(q_leg) in B, 3x3 over the leg's own joints.
  Mat3 footJacobian(const Vec12& q, Leg leg) const;

  // Foot velocity relative to B expressed in B: J(q_leg) qd_leg.
  Vec3 footVelocity(const Vec12& q, const Vec12& qd, Leg leg) const;

  // Closed-form inverse kinematics for the knee-backward branch (KFE <= 0).
  // Returns nullopt when the target lies outside the dexterous workspace
  // (beyond reach, closer to the HAA axis than the abduction offset, or within
  // `ik_margin` of the straight/folded-knee singularities).
  std::optional<Vec3> footIK(const Vec3& p_foot_b, Leg leg) const;

  // Differential IK: joint rates realising a desired foot velocity (in B).
  // Throws std::runtime_error at singular configurations.
  Vec3 footRatesFromVelocity(const Vec12& q, const Vec3& v_foot_b, Leg leg) const;

  // Mass matrix and bias vector in the layout documented above.  gravity_body
  // is the gravity acceleration expressed in B (at rest (0,0,-g) rotated).
  DynamicsTerms dynamicsTerms(const Vec12& q, const Vec18& vel, const Vec3& gravity_body,
                              DynamicsMode mode) const;

  // Gravity-only bias vector (the kQuasiStatic h).
  Vec18 gravityTorques(const Vec12& q, const Vec3& gravity_body) const;

  // Smallest singular value of the leg Jacobian, used for singularity guards.
  double jacobianSmallestSingularValue(const Vec12& q, Leg leg) const;

  // Whole-robot centre of mass in B at the given configuration.
  Vec3 comBody(const Vec12& q) const;

  LinkInertia trunk_;
  LinkInertia hip_link_;    // nominal left-side values; y quantities mirror per side
  LinkInertia thigh_link_;
  LinkInertia shank_link_;

 private:
  RobotModel() = default;

  // Per-leg planar coordinates helper shared by FK and IK.
  Vec3 legForward(const Vec3& q_leg, double side) const;

  std::string name_;
  PerLeg<Vec3> hip_offset_{};
  PerLeg<double> side_sign_{};
  double d_abd_ = 0.0;    // lateral HAA->HFE offset magnitude
  double l_thigh_ = 0.0;
  double l_shank_ = 0.0;
  double gravity_ = 9.81;
  double ik_margin_ = 1e-3;  // rad of knee angle kept away from singularities
};

}  // namespace qse
