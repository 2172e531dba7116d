#include "qse/robot_model.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "spatial.hpp"

namespace qse {
namespace {

constexpr int kNumBodies = 1 + kNumJoints;  // trunk + one body per joint

double wrapAngle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

Mat3 rotX(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }
Mat3 rotY(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }

// Mirror a left-side link inertia to the other side: y offsets flip sign,
// which also flips the xy and yz products of inertia.
LinkInertia mirrorLink(const LinkInertia& link, double side) {
  if (side > 0.0) return link;
  LinkInertia out = link;
  out.com.y() = -out.com.y();
  const Vec3 d(1.0, -1.0, 1.0);
  out.inertia = d.asDiagonal() * link.inertia * d.asDiagonal();
  return out;
}

}  // namespace

RobotModel RobotModel::aliengoLike() {
  RobotModel m;
  m.name_ = "aliengo_like";
  m.d_abd_ = 0.083;
  m.l_thigh_ = 0.25;
  m.l_shank_ = 0.25;
  m.hip_offset_ = {Vec3(0.2399, 0.051, 0.0), Vec3(0.2399, -0.051, 0.0),
                   Vec3(-0.2399, 0.051, 0.0), Vec3(-0.2399, -0.051, 0.0)};
  m.side_sign_ = {1.0, -1.0, 1.0, -1.0};
  m.trunk_ = {13.3, Vec3(0.008, 0.0, 0.0), Vec3(0.11, 0.49, 0.55).asDiagonal()};
  m.hip_link_ = {1.0, Vec3(0.0, 0.04, 0.0), Vec3(1.5e-3, 2.5e-3, 2.0e-3).asDiagonal()};
  m.thigh_link_ = {0.9, Vec3(-0.005, 0.0, -0.10), Vec3(5e-3, 5e-3, 1e-3).asDiagonal()};
  m.shank_link_ = {0.15, Vec3(0.002, 0.0, -0.11), Vec3(1.2e-3, 1.2e-3, 1e-4).asDiagonal()};
  return m;
}

RobotModel RobotModel::anymalLike() {
  RobotModel m;
  m.name_ = "anymal_like";
  m.d_abd_ = 0.10;
  m.l_thigh_ = 0.25;
  m.l_shank_ = 0.33;
  m.hip_offset_ = {Vec3(0.277, 0.116, 0.0), Vec3(0.277, -0.116, 0.0),
                   Vec3(-0.277, 0.116, 0.0), Vec3(-0.277, -0.116, 0.0)};
  m.side_sign_ = {1.0, -1.0, 1.0, -1.0};
  m.trunk_ = {19.6, Vec3(0.003, 0.0, 0.01), Vec3(0.24, 0.55, 0.61).asDiagonal()};
  m.hip_link_ = {1.4, Vec3(0.0, 0.05, 0.0), Vec3(2.0e-3, 3.0e-3, 2.5e-3).asDiagonal()};
  m.thigh_link_ = {1.1, Vec3(-0.004, 0.0, -0.10), Vec3(7e-3, 7e-3, 1.5e-3).asDiagonal()};
  m.shank_link_ = {0.1, Vec3(0.003, 0.0, -0.13), Vec3(1.5e-3, 1.5e-3, 1e-4).asDiagonal()};
  return m;
}

RobotModel RobotModel::byName(const std::string& name) {
  if (name == "aliengo_like") return aliengoLike();
  if (name == "anymal_like") return anymalLike();
  throw std::invalid_argument("unknown robot model: " + name);
}

double RobotModel::totalMass() const {
  return trunk_.mass + kNumLegs * (hip_link_.mass + thigh_link_.mass + shank_link_.mass);
}

Vec3 RobotModel::legForward(const Vec3& q_leg, double side) const {
  const Vec3 in_hfe = rotY(q_leg[1]) * (Vec3(0, 0, -l_thigh_) + rotY(q_leg[2]) * Vec3(0, 0, -l_shank_));
  return rotX(q_leg[0]) * (Vec3(0, side * d_abd_, 0) + in_hfe);
}

Vec3 RobotModel::footPosition(const Vec12& q, Leg leg) const {
  const int i = legIndex(leg);
  return hip_offset_[i] + legForward(q.segment<3>(3 * i), side_sign_[i]);
}

Mat3 RobotModel::footJacobian(const Vec12& q, Leg leg) const {
  const int i = legIndex(leg);
  const Vec3 ql = q.segment<3>(3 * i);
  const double side = side_sign_[i];

  const Vec3 p_haa = hip_offset_[i];
  const Mat3 R1 = rotX(ql[0]);
  const Vec3 p_hfe = p_haa + R1 * Vec3(0, side * d_abd_, 0);
  const Mat3 R2 = R1 * rotY(ql[1]);
  const Vec3 p_kfe = p_hfe + R2 * Vec3(0, 0, -l_thigh_);
  const Vec3 p_foot = p_kfe + R2 * rotY(ql[2]) * Vec3(0, 0, -l_shank_);

  const Vec3 a_haa = Vec3::UnitX();
  const Vec3 a_pitch = R1 * Vec3::UnitY();  // HFE and KFE share this axis direction

  Mat3 J;
  J.col(0) = a_haa.cross(p_foot - p_haa);
  J.col(1) = a_pitch.cross(p_foot - p_hfe);
  J.col(2) = a_pitch.cross(p_foot - p_kfe);
  return J;
}

Vec3 RobotModel::footVelocity(const Vec12& q, const Vec12& qd, Leg leg) const {
  return footJacobian(q, leg) * qd.segment<3>(3 * legIndex(leg));
}

std::optional<Vec3> RobotModel::footIK(const Vec3& p_foot_b, Leg leg) const {
  const int i = legIndex(leg);
  const double side = side_sign_[i];
  const Vec3 rel = p_foot_b - hip_offset_[i];

  // Roll: in the y-z plane the foot sits at distance d_abd from the HAA axis
  // along the rolled +y, the remainder straight below along the rolled -z.
  const double r2 = rel.y() * rel.y() + rel.z() * rel.z();
  const double d2 = d_abd_ * d_abd_;
  if (r2 <= d2 * (1.0 + 1e-9)) return std::nullopt;
  const double zc = -std::sqrt(r2 - d2);
  const double q1 = wrapAngle(std::atan2(rel.z(), rel.y()) - std::atan2(zc, side * d_abd_));

  // Planar two-link problem in the leg's sagittal plane, knee-backward branch.
  const double px = rel.x();
  const double rho2 = px * px + zc * zc;
  const double c3 = (rho2 - l_thigh_ * l_thigh_ - l_shank_ * l_shank_) / (2.0 * l_thigh_ * l_shank_);
  const double c3_max = std::cos(ik_margin_);
  if (c3 > c3_max || c3 < -c3_max) return std::nullopt;
  const double q3 = -std::acos(c3);

  const double k1 = l_thigh_ + l_shank_ * c3;
  const double k2 = l_shank_ * std::sin(q3);
  const double q2 = wrapAngle(std::atan2(-px, -zc) - std::atan2(k2, k1));
  return Vec3(q1, q2, q3);
}

Vec3 RobotModel::footRatesFromVelocity(const Vec12& q, const Vec3& v_foot_b, Leg leg) const {
  const Mat3 J = footJacobian(q, leg);
  Eigen::JacobiSVD<Mat3> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) < 1e-8) {
    throw std::runtime_error("leg Jacobian singular in differential IK");
  }
  return svd.solve(v_foot_b);
}

double RobotModel::jacobianSmallestSingularValue(const Vec12& q, Leg leg) const {
  return Eigen::JacobiSVD<Mat3>(footJacobian(q, leg)).singularValues()(2);
}

Vec3 RobotModel::comBody(const Vec12& q) const {
  Vec3 weighted = trunk_.mass * trunk_.com;
  for (Leg leg : kAllLegs) {
    const int i = legIndex(leg);
    const double side = side_sign_[i];
    const Vec3 ql = q.segment<3>(3 * i);

    const Vec3 o1 = hip_offset_[i];
    const Mat3 R1 = rotX(ql[0]);
    const Vec3 o2 = o1 + R1 * Vec3(0, side * d_abd_, 0);
    const Mat3 R2 = R1 * rotY(ql[1]);
    const Vec3 o3 = o2 + R2 * Vec3(0, 0, -l_thigh_);
    const Mat3 R3 = R2 * rotY(ql[2]);

    const LinkInertia hip = mirrorLink(hip_link_, side);
    const LinkInertia thigh = mirrorLink(thigh_link_, side);
    const LinkInertia shank = mirrorLink(shank_link_, side);
    weighted += hip.mass * (o1 + R1 * hip.com);
    weighted += thigh.mass * (o2 + R2 * thigh.com);
    weighted += shank.mass * (o3 + R3 * shank.com);
  }
  return weighted / totalMass();
}

namespace {

// Per-body quantities of the branched kinematic tree, trunk = body 0 and
// body 1 + 3*leg + j for joint j of each leg.
struct TreeModel {
  std::array<int, kNumBodies> parent;
  std::array<spatial::Pose, kNumBodies> pose;      // child frame in parent frame
  std::array<Vec3, kNumBodies> axis;               // joint axis in child frame
  std::array<spatial::SpMat, kNumBodies> inertia;  // spatial inertia in own frame
};

TreeModel buildTree(const RobotModel& m, const Vec12& q) {
  TreeModel t;
  t.parent[0] = -1;
  t.pose[0] = {};
  t.axis[0] = Vec3::Zero();
  t.inertia[0] = spatial::spatialInertia(m.trunk_.mass, m.trunk_.com, m.trunk_.inertia);

  for (Leg leg : kAllLegs) {
    const int li = legIndex(leg);
    const double side = m.sideSign(leg);
    const Vec3 ql = q.segment<3>(3 * li);
    const int b = 1 + 3 * li;

    t.parent[b] = 0;
    t.pose[b] = {rotX(ql[0]), m.hipOffset(leg)};
    t.axis[b] = Vec3::UnitX();
    const LinkInertia hip = mirrorLink(m.hip_link_, side);
    t.inertia[b] = spatial::spatialInertia(hip.mass, hip.com, hip.inertia);

    t.parent[b + 1] = b;
    t.pose[b + 1] = {rotY(ql[1]), Vec3(0, side * m.abductionOffset(), 0)};
    t.axis[b + 1] = Vec3::UnitY();
    const LinkInertia thigh = mirrorLink(m.thigh_link_, side);
    t.inertia[b + 1] = spatial::spatialInertia(thigh.mass, thigh.com, thigh.inertia);

    t.parent[b + 2] = b + 1;
    t.pose[b + 2] = {rotY(ql[2]), Vec3(0, 0, -m.thighLength())};
    t.axis[b + 2] = Vec3::UnitY();
    const LinkInertia shank = mirrorLink(m.shank_link_, side);
    t.inertia[b + 2] = spatial::spatialInertia(shank.mass, shank.com, shank.inertia);
  }
  return t;
}

// Recursive Newton-Euler for the bias vector: joint accelerations zero, base
// acceleration replaced by the gravity trick a0 = [0; -g_body].
Vec18 rnea_bias(const TreeModel& t, const Vec18& vel, const Vec3& gravity_body) {
  std::array<spatial::SpVec, kNumBodies> v, a, f;

  v[0] << vel.segment<3>(3), vel.segment<3>(0);
  a[0] << Vec3::Zero(), -gravity_body;
  f[0] = t.inertia[0] * a[0] + spatial::crossForce(v[0], t.inertia[0] * v[0]);

  for (int i = 1; i < kNumBodies; ++i) {
    const int p = t.parent[i];
    const double qd = vel[kBaseDof + i - 1];
    spatial::SpVec s = spatial::SpVec::Zero();
    s.head<3>() = t.axis[i];
    v[i] = spatial::xformMotion(t.pose[i], v[p]) + s * qd;
    a[i] = spatial::xformMotion(t.pose[i], a[p]) + spatial::crossMotion(v[i], s * qd);
    f[i] = t.inertia[i] * a[i] + spatial::crossForce(v[i], t.inertia[i] * v[i]);
  }

  Vec18 h = Vec18::Zero();
  for (int i = kNumBodies - 1; i >= 1; --i) {
    h[kBaseDof + i - 1] = t.axis[i].dot(f[i].head<3>());
    f[t.parent[i]] += spatial::xformForceToParent(t.pose[i], f[i]);
  }
  h.segment<3>(0) = f[0].tail<3>();  // base force
  h.segment<3>(3) = f[0].head<3>();  // base moment
  return h;
}

// Composite-rigid-body algorithm for the generalized mass matrix.
Mat18 crba(const TreeModel& t) {
  std::array<spatial::SpMat, kNumBodies> Ic = t.inertia;
  for (int i = kNumBodies - 1; i >= 1; --i) {
    const spatial::SpMat X = spatial::xformMotionMatrix(t.pose[i]);
    Ic[t.parent[i]] += X.transpose() * Ic[i] * X;
  }

  Mat18 M = Mat18::Zero();
  M.block<3, 3>(0, 0) = Ic[0].bottomRightCorner<3, 3>();
  M.block<3, 3>(0, 3) = Ic[0].bottomLeftCorner<3, 3>();
  M.block<3, 3>(3, 0) = Ic[0].topRightCorner<3, 3>();
  M.block<3, 3>(3, 3) = Ic[0].topLeftCorner<3, 3>();

  for (int i = 1; i < kNumBodies; ++i) {
    spatial::SpVec s = spatial::SpVec::Zero();
    s.head<3>() = t.axis[i];
    spatial::SpVec F = Ic[i] * s;
    const int row = kBaseDof + i - 1;
    M(row, row) = s.head<3>().dot(F.head<3>()) + s.tail<3>().dot(F.tail<3>());
    int j = i;
    while (t.parent[j] > 0) {
      F = spatial::xformForceToParent(t.pose[j], F);
      j = t.parent[j];
      const int col = kBaseDof + j - 1;
      spatial::SpVec sj = spatial::SpVec::Zero();
      sj.head<3>() = t.axis[j];
      M(row, col) = M(col, row) = F.dot(sj);
    }
    F = spatial::xformForceToParent(t.pose[j], F);  // into trunk coordinates
    M.block<3, 1>(0, row) = F.tail<3>();
    M.block<3, 1>(3, row) = F.head<3>();
    M.block<1, 3>(row, 0) = F.tail<3>().transpose();
    M.block<1, 3>(row, 3) = F.head<3>().transpose();
  }
  return M;
}

}  // namespace

DynamicsTerms RobotModel::dynamicsTerms(const Vec12& q, const Vec18& vel,
                                        const Vec3& gravity_body, DynamicsMode mode) const {
  DynamicsTerms out;
  const TreeModel tree = buildTree(*this, q);
  if (mode == DynamicsMode::kQuasiStatic) {
    out.M.setZero();
    out.h = rnea_bias(tree, Vec18::Zero(), gravity_body);
  } else {
    out.M = crba(tree);
    out.h = rnea_bias(tree, vel, gravity_body);
  }
  return out;
}

Vec18 RobotModel::gravityTorques(const Vec12& q, const Vec3& gravity_body) const {
  return rnea_bias(buildTree(*this, q), Vec18::Zero(), gravity_body);
}

}  // namespace qse
