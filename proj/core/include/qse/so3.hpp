#pragma once

#include <Eigen/Geometry>

#include "qse/types.hpp"

namespace qse {

// Attitude convention used across the whole library:
//   - Hamilton quaternions, stored (w, x, y, z), right-handed.
//   - A quaternion q denotes the passive body-to-world rotation: for the base
//     it is q_b^n, and toRotationMatrix() returns R_b^n (maps body vectors
//     into the navigation frame).
//   - Angular velocities are body-frame rates (what a strapdown gyro measures),
//     so integration right-multiplies: q <- q (x) exp(w dt).
//   - q and -q are the same rotation; canonical() picks the w >= 0 sheet.

Mat3 skew(const Vec3& v);

class Quat {
 public:
  // Identity rotation.
  Quat() : q_(1.0, 0.0, 0.0, 0.0) {}
  static Quat identity() { return Quat(); }

  // Normalizes on entry; throws std::invalid_argument on a near-zero norm.
  Quat(double w, double x, double y, double z);
  explicit Quat(const Eigen::Quaterniond& q);

  static Quat fromAxisAngle(const Vec3& axis, double angle_rad);
  static Quat fromRotationMatrix(const Mat3& R);
  // Exponential map of a rotation vector (axis * angle).
  static Quat exp(const Vec3& rotvec);

  double w() const { return q_.w(); }
  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  double z() const { return q_.z(); }

  Mat3 toRotationMatrix() const { return q_.toRotationMatrix(); }
  // Rotation vector (axis * angle), angle in [0, pi].
  Vec3 log() const;

  Quat conjugate() const { return Quat(q_.conjugate()); }
  Quat inverse() const { return conjugate(); }

  // Hamilton product, renormalized.
  Quat operator*(const Quat& rhs) const;

  // Rotates a body vector into the parent frame (R * v).
  Vec3 rotate(const Vec3& v) const { return q_ * v; }

  // Sign canonicalization (w >= 0); applied at API output boundaries.
  Quat canonical() const;

  double norm() const { return q_.norm(); }
  double angleTo(const Quat& other) const;

  const Eigen::Quaterniond& eigen() const { return q_; }

 private:
  Eigen::Quaterniond q_;  // unit norm maintained by every constructor
};

Quat quatMultiply(const Quat& a, const Quat& b);

// Exact exponential-map integration of a constant body rate over dt.
// Preserves the unit norm for any (w, dt); dt must be in (0, 0.1].
Quat quatIntegrate(const Quat& q, const Vec3& omega_body, double dt);

// e_q = q_true^-1 (x) q_est, canonicalized. Identity iff q_est == +/-q_true.
Quat multiplicativeError(const Quat& q_true, const Quat& q_est);

bool isRotationMatrix(const Mat3& R, double tol = 1e-9);

struct RigidTransform {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return R * p + t; }
  RigidTransform inverse() const { return {R.transpose(), -(R.transpose() * t)}; }
  RigidTransform operator*(const RigidTransform& rhs) const {
    return {R * rhs.R, R * rhs.t + t};
  }
};

// Fixed sensor mounting: rigid transforms body<-imu, body<-camera, body<-lidar.
struct Extrinsics {
  RigidTransform body_from_imu;
  RigidTransform body_from_camera;
  RigidTransform body_from_lidar;
};

}  // namespace qse
