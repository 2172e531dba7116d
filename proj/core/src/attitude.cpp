#include "qse/attitude.hpp"

#include <cmath>

#include "cov_utils.hpp"

namespace qse {

AttitudeEstimator::AttitudeEstimator(const AttitudeConfig& config) : cfg_(config) {
  initialize(Quat(), Vec3::Zero());
}

void AttitudeEstimator::initialize(const Quat& q0, const Vec3& bias0) {
  nom_.q = q0.canonical();
  nom_.bias = bias0;
  delta_.setZero();
  P_.setZero();
  P_.topLeftCorner<3, 3>() = cfg_.p0_att * Mat3::Identity();
  P_.bottomRightCorner<3, 3>() = cfg_.p0_bias * Mat3::Identity();
  north_.reset();
  omega_corrected_.setZero();
  diag_ = AttitudeDiagnostics{};
}

void AttitudeEstimator::step(const ImuSample& imu, double dt) {
  const double fn = imu.accel.norm();
  const bool accel_ok =
      fn > 1e-6 && std::abs(fn - cfg_.gravity) <= cfg_.accel_gate * cfg_.gravity;

  const Mat3 Rbar_t = nom_.q.toRotationMatrix().transpose();

  // Observer injection: weighted sum of measured x predicted directions.
  Vec3 inj = Vec3::Zero();
  if (accel_ok) {
    inj += cfg_.k1 * (imu.accel / fn).cross(Rbar_t * Vec3::UnitZ());
  }
  if (north_ && imu.t - north_->t <= cfg_.north_staleness) {
    inj += cfg_.k2 * north_->m_body.cross(Rbar_t * north_->m_ref);
  }

  if (dt > 0.0) {
    const Vec3 omega_bar = imu.gyro - nom_.bias;
    nom_.q = quatIntegrate(nom_.q, omega_bar + inj, dt).canonical();
    nom_.bias -= cfg_.kb * inj * dt;
    nom_.bias = nom_.bias.cwiseMax(-cfg_.b_max).cwiseMin(cfg_.b_max);

    // Error-state propagation, first-order transition about the observer
    // trajectory: d(dtheta)/dt = -S(w) dtheta - dbias.
    Mat6 F = Mat6::Zero();
    F.topLeftCorner<3, 3>() = -skew(omega_bar);
    F.topRightCorner<3, 3>() = -Mat3::Identity();
    const Mat6 Phi = Mat6::Identity() + F * dt;

    Mat6 Q = Mat6::Zero();
    Q.topLeftCorner<3, 3>() = cfg_.sigma_gyro * cfg_.sigma_gyro * Mat3::Identity();
    Q.bottomRightCorner<3, 3>() = cfg_.sigma_bias_rw * cfg_.sigma_bias_rw * Mat3::Identity();

    delta_ = Phi * delta_;
    P_ = Phi * P_ * Phi.transpose() + Q * dt;
    detail::symmetrize(P_);
    if (detail::projectPSD(P_)) ++diag_.psd_projections;
  }

  if (accel_ok) {
    const Vec3 pred = nom_.q.toRotationMatrix().transpose() * Vec3::UnitZ();
    errorUpdate(imu.accel / fn - pred, skew(pred), cfg_.sigma_accel_dir);
  } else {
    ++diag_.gated_accel;
  }

  omega_corrected_ = imu.gyro - (nom_.bias + delta_.tail<3>());
}

void AttitudeEstimator::pseudoNorthUpdate(double t, const Vec3& m_body, const Vec3& m_ref_n) {
  if (m_body.norm() < 1e-9 || m_ref_n.norm() < 1e-9) return;
  NorthObs obs{t, m_body.normalized(), m_ref_n.normalized()};
  north_ = obs;

  const Vec3 pred = nom_.q.toRotationMatrix().transpose() * obs.m_ref;
  errorUpdate(obs.m_body - pred, skew(pred), cfg_.sigma_north);
}

void AttitudeEstimator::errorUpdate(const Vec3& innovation, const Mat3& H_att, double sigma) {
  Eigen::Matrix<double, 3, 6> H = Eigen::Matrix<double, 3, 6>::Zero();
  H.leftCols<3>() = H_att;

  const Mat3 S = H * P_ * H.transpose() + sigma * sigma * Mat3::Identity();
  const Eigen::Matrix<double, 6, 3> K = P_ * H.transpose() * S.inverse();

  delta_ += K * (innovation - H * delta_);

  const Mat6 IKH = Mat6::Identity() - K * H;
  P_ = IKH * P_ * IKH.transpose() + sigma * sigma * K * K.transpose();
  detail::symmetrize(P_);
  if (detail::projectPSD(P_)) ++diag_.psd_projections;
}

AttitudeState AttitudeEstimator::nominal() const { return nom_; }

AttitudeState AttitudeEstimator::fused() const {
  AttitudeState out;
  out.q = (nom_.q * Quat::exp(delta_.head<3>())).canonical();
  out.bias = nom_.bias + delta_.tail<3>();
  return out;
}

}  // namespace qse
