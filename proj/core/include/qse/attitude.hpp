// Cascaded attitude and gyro-bias observer.
//
// Stage 1 is a passive nonlinear complementary filter: it integrates the
// bias-corrected gyro and steers toward the gravity direction sensed by the
// accelerometer and toward a "pseudo-north" heading vector derived from an
// exteroceptive attitude (no magnetometer).  Its trajectory is globally
// convergent but not statistically optimal.
//
// Stage 2 is a 6-state error-state Kalman filter (attitude deviation and
// gyro-bias deviation) whose model and measurement Jacobians are linearized
// at the stage-1 trajectory, never at its own estimate.  That keeps the
// filter linear time-varying, so the cascade inherits the observer's
// stability while recovering near-optimal noise weighting.
//
// Attitude error is right-multiplicative: R = R_nom (I + S(dtheta)).

#pragma once

#include <cstdint>
#include <optional>

#include "qse/measurements.hpp"
#include "qse/so3.hpp"
#include "qse/types.hpp"

namespace qse {

struct AttitudeConfig {
  // Nonlinear-observer gains: gravity injection, pseudo-north injection,
  // bias adaptation, and the per-axis bias clamp (rad/s).
  double k1 = 2.0;
  double k2 = 0.5;
  double kb = 0.1;
  double b_max = 0.2;

  // Error-state filter noise densities and direction-measurement sigmas.
  double sigma_gyro = 2e-5;       // rad/s/sqrt(Hz)
  double sigma_bias_rw = 1e-6;    // rad/s^2/sqrt(Hz)
  double sigma_accel_dir = 0.1;   // rad, gravity-direction observation
  double sigma_north = 0.02;      // rad, pseudo-north observation

  double p0_att = 0.03;           // initial attitude variance, rad^2
  double p0_bias = 1e-4;          // initial bias variance, (rad/s)^2

  double accel_gate = 0.3;        // reject accel when | ||f||-g | > gate * g
  double north_staleness = 0.5;   // s; stop steering on old pseudo-north
  double gravity = 9.81;
};

struct AttitudeState {
  Quat q;                       // body-to-world
  Vec3 bias = Vec3::Zero();     // gyro bias, body frame
};

struct AttitudeDiagnostics {
  std::uint64_t gated_accel = 0;
  std::uint64_t psd_projections = 0;
};

class AttitudeEstimator {
 public:
  explicit AttitudeEstimator(const AttitudeConfig& config);

  void initialize(const Quat& q0, const Vec3& bias0);

  // One IMU tick: integrates the observer, propagates the error-state filter
  // and, unless gated, applies the gravity-direction row.  dt may be zero on
  // the very first sample.
  void step(const ImuSample& imu, double dt);

  // Pseudo-north arrival: m_body is the heading vector resolved in the body
  // (from the exteroceptive attitude), m_ref_n its world reference.  Applies
  // the error-state measurement row once and arms the observer injection
  // until the sample goes stale.
  void pseudoNorthUpdate(double t, const Vec3& m_body, const Vec3& m_ref_n);

  AttitudeState nominal() const;         // stage-1 trajectory
  AttitudeState fused() const;           // stage-1 corrected by the error state
  const Mat6& covariance() const { return P_; }
  // Bias-corrected body rate of the last step, using the fused bias.
  const Vec3& correctedRate() const { return omega_corrected_; }

  const AttitudeDiagnostics& diagnostics() const { return diag_; }

 private:
  void errorUpdate(const Vec3& innovation, const Mat3& H_att, double sigma);

  AttitudeConfig cfg_;
  AttitudeState nom_;             // observer state (q_bar, b_bar)
  Vec6 delta_ = Vec6::Zero();     // [dtheta; dbias]
  Mat6 P_ = Mat6::Identity();
  Vec3 omega_corrected_ = Vec3::Zero();

  struct NorthObs {
    double t = 0.0;
    Vec3 m_body = Vec3::Zero();
    Vec3 m_ref = Vec3::Zero();
  };
  std::optional<NorthObs> north_;

  AttitudeDiagnostics diag_;
};

}  // namespace qse
