#include "qse/fusion.hpp"

#include <cmath>

#include "cov_utils.hpp"

namespace qse {

FusionFilter::FusionFilter(const FusionConfig& config) : cfg_(config) {
  initialize(Vec3::Zero(), Vec3::Zero());
}

void FusionFilter::initialize(const Vec3& p0, const Vec3& v0) {
  x_.pos = p0;
  x_.vel = v0;
  P_.setZero();
  P_.topLeftCorner<3, 3>() = cfg_.p0_pos * Mat3::Identity();
  P_.bottomRightCorner<3, 3>() = cfg_.p0_vel * Mat3::Identity();
  diag_ = FusionDiagnostics{};
}

void FusionFilter::predict(const Vec3& u_world, double dt) {
  if (dt <= 0.0) return;

  x_.pos += x_.vel * dt + 0.5 * u_world * dt * dt;
  x_.vel += u_world * dt;

  Mat6 Phi = Mat6::Identity();
  Phi.topRightCorner<3, 3>() = dt * Mat3::Identity();

  Mat6 Qd = Mat6::Zero();
  if (cfg_.discretization == NoiseDiscretization::kPiecewise) {
    Qd.topLeftCorner<3, 3>() = cfg_.q_pos * dt * Mat3::Identity();
    Qd.bottomRightCorner<3, 3>() = cfg_.q_vel * dt * Mat3::Identity();
  } else {
    // Exact integral of Phi(s) Q Phi(s)^T over the step for diagonal Q.
    const double d3 = dt * dt * dt / 3.0;
    const double d2 = dt * dt / 2.0;
    Qd.topLeftCorner<3, 3>() = (cfg_.q_pos * dt + cfg_.q_vel * d3) * Mat3::Identity();
    Qd.topRightCorner<3, 3>() = cfg_.q_vel * d2 * Mat3::Identity();
    Qd.bottomLeftCorner<3, 3>() = cfg_.q_vel * d2 * Mat3::Identity();
    Qd.bottomRightCorner<3, 3>() = cfg_.q_vel * dt * Mat3::Identity();
  }

  P_ = Phi * P_ * Phi.transpose() + Qd;
  detail::symmetrize(P_);
  if (detail::projectPSD(P_)) ++diag_.psd_projections;
}

bool FusionFilter::update(const Vec3& z, const Eigen::Matrix<double, 3, 6>& H, const Mat3& R) {
  const Mat3 S = H * P_ * H.transpose() + R;
  const Eigen::JacobiSVD<Mat3> svd(S);
  const double smin = svd.singularValues()(2);
  if (smin <= 0.0 || svd.singularValues()(0) / smin > cfg_.cond_max) {
    ++diag_.singular_innovation;
    return false;
  }

  const Eigen::Matrix<double, 6, 3> K = P_ * H.transpose() * S.inverse();
  Vec6 xv;
  xv << x_.pos, x_.vel;
  xv += K * (z - H * xv);
  x_.pos = xv.head<3>();
  x_.vel = xv.tail<3>();

  const Mat6 IKH = Mat6::Identity() - K * H;
  P_ = IKH * P_ * IKH.transpose() + K * R * K.transpose();
  detail::symmetrize(P_);
  if (detail::projectPSD(P_)) ++diag_.psd_projections;
  return true;
}

bool FusionFilter::updatePosition(const Vec3& z, const Mat3& R) {
  Eigen::Matrix<double, 3, 6> H = Eigen::Matrix<double, 3, 6>::Zero();
  H.leftCols<3>() = Mat3::Identity();
  return update(z, H, R);
}

bool FusionFilter::updateVelocity(const Vec3& z, const Mat3& R) {
  Eigen::Matrix<double, 3, 6> H = Eigen::Matrix<double, 3, 6>::Zero();
  H.rightCols<3>() = Mat3::Identity();
  return update(z, H, R);
}

bool FusionFilter::legVelocityUpdate(const Vec3& v_world, int slipping_legs) {
  const double infl = std::pow(cfg_.slip_kappa, slipping_legs);
  return updateVelocity(v_world, cfg_.r_leg_vel * infl);
}

bool FusionFilter::exteroVelocityUpdate(const Vec3& v_world) {
  return updateVelocity(v_world, cfg_.r_extero_vel);
}

bool FusionFilter::exteroPositionUpdate(const Vec3& p_world) {
  return updatePosition(p_world, cfg_.r_extero_pos);
}

}  // namespace qse
