#include "qse/pipeline.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace qse {

Pipeline::Pipeline(const RobotModel& model, const PipelineConfig& config)
    : model_(model),
      cfg_(config),
      contact_(model_, config.contact),
      leg_odo_(model_, [&] {
        LegOdometryConfig c = config.leg_odometry;
        c.slip_detection = c.slip_detection && config.settings.slip_detection;
        return c;
      }()),
      attitude_(config.attitude),
      fusion_(config.fusion) {}

std::optional<EstimateSample> Pipeline::processEvent(const LogEvent& ev) {
  const double t = eventTime(ev);
  if (have_last_t_ && t < last_t_ - cfg_.settings.max_out_of_order) {
    ++diag_.out_of_order_dropped;
    return std::nullopt;
  }

  pending_estimate_.reset();
  std::visit([this](const auto& e) { handle(e); }, ev);

  if (!have_last_t_ || t > last_t_) {
    last_t_ = t;
    have_last_t_ = true;
  }
  return pending_estimate_;
}

void Pipeline::initializeFromImu(const ImuSample& imu) {
  // Tilt from gravity: choose the smallest rotation whose inverse maps the
  // world up axis onto the measured specific-force direction; yaw is free.
  Quat q0;
  const double fn = imu.accel.norm();
  if (fn > 1e-6) {
    const Vec3 f = imu.accel / fn;
    const Eigen::Quaterniond qe =
        Eigen::Quaterniond::FromTwoVectors(f, Vec3::UnitZ());
    q0 = Quat(qe.w(), qe.x(), qe.y(), qe.z());
  }
  attitude_.initialize(q0, Vec3::Zero());
  fusion_.initialize(Vec3::Zero(), Vec3::Zero());
  initialized_ = true;
}

void Pipeline::handle(const ImuSample& imu_raw) {
  // Move the IMU reading to the body frame (rigid lever, angular
  // acceleration term neglected).
  const RigidTransform& X = cfg_.settings.extrinsics.body_from_imu;
  ImuSample imu = imu_raw;
  imu.gyro = X.R * imu_raw.gyro;
  imu.accel = X.R * imu_raw.accel - imu.gyro.cross(imu.gyro.cross(X.t));

  if (!initialized_) initializeFromImu(imu);

  const double dt = have_imu_t_ ? imu.t - last_imu_t_ : 0.0;
  attitude_.step(imu, std::max(dt, 0.0));

  const AttitudeState att = attitude_.fused();
  const Mat3 R = att.q.toRotationMatrix();
  const Vec3 u = R * imu.accel + Vec3(0, 0, -cfg_.attitude.gravity);
  fusion_.predict(u, std::max(dt, 0.0));

  last_imu_t_ = imu.t;
  have_imu_t_ = true;
  ++diag_.imu_ticks;

  EstimateSample est;
  est.t = imu.t;
  est.pos = fusion_.state().pos;
  est.vel = fusion_.state().vel;
  est.att = att.q;
  est.gyro_bias = att.bias;
  est.contact = last_contact_;
  est.slip = last_slip_;
  pending_estimate_ = est;
}

void Pipeline::handle(const JointSample& js) {
  if (!initialized_) return;
  const AttitudeState att = attitude_.fused();

  const ContactEstimate contact = contact_.update(js, att.q);
  const LegOdometryOutput odo = leg_odo_.update(js, attitude_.correctedRate(), contact.contact);

  for (int i = 0; i < kNumLegs; ++i) {
    last_contact_[i] = contact.contact[i];
    last_slip_[i] = odo.slip[i];
  }

  if (odo.base_velocity) {
    const Vec3 v_world = att.q.toRotationMatrix() * *odo.base_velocity;
    fusion_.legVelocityUpdate(v_world, odo.slip_count);
  }
  ++diag_.joint_updates;
}

void Pipeline::handle(const ExteroPoseSample& pose) {
  if (!cfg_.settings.use_extero || !initialized_) return;

  const RigidTransform& X = cfg_.settings.extrinsics.body_from_camera;  // body_from_sensor
  const Mat3 R_m = pose.att.toRotationMatrix();

  if (!anchored_) {
    // World pose of the sensor world frame from the current estimate:
    // anchor = T_world_body * T_body_sensor * T_sensorworld_sensor^-1.
    const Mat3 R_wb = attitude_.fused().q.toRotationMatrix();
    const Vec3 p_wb = fusion_.state().pos;
    const Mat3 R_ws = R_wb * X.R;
    const Vec3 p_ws = p_wb + R_wb * X.t;
    anchor_R_ = R_ws * R_m.transpose();
    anchor_t_ = p_ws - anchor_R_ * pose.pos;
    anchored_ = true;
  }

  // Base position via the measured attitude chain (exogenous, keeps the
  // fusion filter linear in its own state).
  const Vec3 p_sensor_w = anchor_R_ * pose.pos + anchor_t_;
  const Mat3 R_wb_meas = anchor_R_ * R_m * X.R.transpose();
  const Vec3 p_base = p_sensor_w - R_wb_meas * X.t;
  fusion_.exteroPositionUpdate(p_base);

  // Pseudo-north: the sensor-world x axis seen in the body via the measured
  // attitude, referenced to its fixed world direction.
  const Vec3 m_body = X.R * R_m.transpose() * Vec3::UnitX();
  const Vec3 m_ref = anchor_R_ * Vec3::UnitX();
  attitude_.pseudoNorthUpdate(pose.t, m_body, m_ref);

  ++diag_.extero_updates;
}

void Pipeline::handle(const ExteroTwistSample& twist) {
  if (!cfg_.settings.use_extero || !initialized_) return;
  if (!anchored_) {
    ++diag_.unanchored_twist_skipped;
    return;
  }
  const RigidTransform& X = cfg_.settings.extrinsics.body_from_camera;
  const Mat3 R_wb = attitude_.fused().q.toRotationMatrix();
  const Vec3 v_sensor_w = anchor_R_ * twist.vel;
  const Vec3 v_base = v_sensor_w - R_wb * attitude_.correctedRate().cross(X.t);
  fusion_.exteroVelocityUpdate(v_base);
  ++diag_.extero_updates;
}

void Pipeline::handle(const DesiredFootSample& des) { leg_odo_.setDesired(des); }

void Pipeline::handle(const GroundTruthSample& gt) {
  if (!cfg_.settings.init_from_ground_truth) return;
  if (gt_initialized_ || diag_.imu_ticks > 1) return;
  attitude_.initialize(gt.att, Vec3::Zero());
  fusion_.initialize(gt.pos, gt.vel);
  initialized_ = true;
  gt_initialized_ = true;
}

EstimateSample Pipeline::currentEstimate() const {
  EstimateSample est;
  est.t = have_imu_t_ ? last_imu_t_ : 0.0;
  est.pos = fusion_.state().pos;
  est.vel = fusion_.state().vel;
  const AttitudeState att = attitude_.fused();
  est.att = att.q;
  est.gyro_bias = att.bias;
  est.contact = last_contact_;
  est.slip = last_slip_;
  return est;
}

HealthStatus Pipeline::health() const {
  HealthStatus h;
  h.quat_norm_error = std::abs(attitude_.fused().q.norm() - 1.0);

  const Mat6& Pa = attitude_.covariance();
  const Mat6& Pf = fusion_.covariance();
  h.cov_symmetric = (Pa - Pa.transpose()).cwiseAbs().maxCoeff() < 1e-9 &&
                    (Pf - Pf.transpose()).cwiseAbs().maxCoeff() < 1e-9;
  const double min_eig = std::min(Eigen::SelfAdjointEigenSolver<Mat6>(Pa).eigenvalues().minCoeff(),
                                  Eigen::SelfAdjointEigenSolver<Mat6>(Pf).eigenvalues().minCoeff());
  h.cov_psd = min_eig >= -1e-12;
  h.psd_projections =
      attitude_.diagnostics().psd_projections + fusion_.diagnostics().psd_projections;
  return h;
}

}  // namespace qse
