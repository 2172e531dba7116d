// Minimal 6-D spatial-vector algebra for the floating-base dynamics routines.
// Spatial vectors are ordered [angular; linear].  A motion vector holds the
// angular velocity and the linear velocity of the body-fixed point coincident
// with the frame origin; a force vector holds the moment about the origin and
// the linear force.  Internal to the library, not installed.

#pragma once

#include <Eigen/Dense>

#include "qse/so3.hpp"
#include "qse/types.hpp"

namespace qse::spatial {

using SpVec = Eigen::Matrix<double, 6, 1>;
using SpMat = Eigen::Matrix<double, 6, 6>;

// Pose of a child frame in its parent: axes R (child axes expressed in the
// parent), origin p (child origin in the parent).
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();
};

// Motion transform taking parent-frame motion coordinates to child-frame
// coordinates: w_c = R^T w_p, v_c = R^T (v_p + w_p x p).
inline SpVec xformMotion(const Pose& X, const SpVec& m) {
  const Vec3 w = m.head<3>();
  const Vec3 v = m.tail<3>();
  SpVec out;
  out.head<3>() = X.R.transpose() * w;
  out.tail<3>() = X.R.transpose() * (v + w.cross(X.p));
  return out;
}

// Force transform taking child-frame force coordinates to parent-frame
// coordinates (the dual of xformMotion, i.e. power is preserved).
inline SpVec xformForceToParent(const Pose& X, const SpVec& f) {
  const Vec3 n = f.head<3>();
  const Vec3 fl = f.tail<3>();
  SpVec out;
  out.tail<3>() = X.R * fl;
  out.head<3>() = X.R * n + X.p.cross(out.tail<3>());
  return out;
}

// 6x6 motion transform matrix, parent -> child coordinates.
inline SpMat xformMotionMatrix(const Pose& X) {
  SpMat M = SpMat::Zero();
  const Mat3 Rt = X.R.transpose();
  M.topLeftCorner<3, 3>() = Rt;
  M.bottomRightCorner<3, 3>() = Rt;
  M.bottomLeftCorner<3, 3>() = -Rt * skew(X.p);
  return M;
}

// Spatial cross products.  crossMotion(v) m == v x m for motion vectors,
// crossForce(v) f == v x* f for force vectors.
inline SpVec crossMotion(const SpVec& v, const SpVec& m) {
  const Vec3 w = v.head<3>(), vl = v.tail<3>();
  SpVec out;
  out.head<3>() = w.cross(m.head<3>());
  out.tail<3>() = vl.cross(m.head<3>()) + w.cross(m.tail<3>());
  return out;
}

inline SpVec crossForce(const SpVec& v, const SpVec& f) {
  const Vec3 w = v.head<3>(), vl = v.tail<3>();
  SpVec out;
  out.head<3>() = w.cross(f.head<3>()) + vl.cross(f.tail<3>());
  out.tail<3>() = w.cross(f.tail<3>());
  return out;
}

// Spatial rigid-body inertia about the body frame origin.
//   I = [ Ic - m S(c) S(c),  m S(c) ]
//       [ m S(c)^T,          m 1    ]
// with mass m, CoM offset c, and rotational inertia Ic about the CoM.
inline SpMat spatialInertia(double mass, const Vec3& com, const Mat3& inertia_com) {
  const Mat3 Sc = skew(com);
  SpMat I = SpMat::Zero();
  I.topLeftCorner<3, 3>() = inertia_com - mass * Sc * Sc;
  I.topRightCorner<3, 3>() = mass * Sc;
  I.bottomLeftCorner<3, 3>() = mass * Sc.transpose();
  I.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
  return I;
}

}  // namespace qse::spatial
