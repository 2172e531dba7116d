// Linear time-varying Kalman filter over base position and velocity (world
// frame, 6 states), decoupled from the attitude cascade: the attitude enters
// only through the exogenous world-frame acceleration input
//   u = R_est f_body + g_n,   g_n = (0, 0, -g)
// and through rotating body-frame measurements into the world frame before
// the update.  Prediction integrates constant acceleration exactly.
//
// Measurement sources: stance-leg base velocity (covariance inflated by
// kappa^(#slipping legs)), exteroceptive velocity, exteroceptive position.
// Updates are applied sequentially per source, which for uncorrelated noise
// is equivalent to one stacked update.

#pragma once

#include <cstdint>

#include "qse/types.hpp"

namespace qse {

enum class NoiseDiscretization { kPiecewise, kExact };

struct FusionConfig {
  double q_pos = 1e-6;   // position process noise density, m^2/s
  double q_vel = 1e-3;   // velocity process noise density, (m/s)^2/s
  NoiseDiscretization discretization = NoiseDiscretization::kPiecewise;

  Mat3 r_leg_vel = 0.01 * Mat3::Identity();      // (m/s)^2
  Mat3 r_extero_vel = 0.005 * Mat3::Identity();  // (m/s)^2
  Mat3 r_extero_pos = 0.01 * Mat3::Identity();   // m^2
  double slip_kappa = 100.0;   // leg-velocity covariance inflation per slip

  double p0_pos = 0.01;
  double p0_vel = 0.01;
  double cond_max = 1e12;      // skip updates with worse innovation condition
};

struct FusionState {
  Vec3 pos = Vec3::Zero();
  Vec3 vel = Vec3::Zero();
};

struct FusionDiagnostics {
  std::uint64_t singular_innovation = 0;
  std::uint64_t psd_projections = 0;
};

class FusionFilter {
 public:
  explicit FusionFilter(const FusionConfig& config);

  void initialize(const Vec3& p0, const Vec3& v0);

  // u_world is the world-frame acceleration input for the whole interval.
  void predict(const Vec3& u_world, double dt);

  // Generic 3-row updates; return false (and count) when the innovation
  // covariance is numerically singular.  z in world frame.
  bool updatePosition(const Vec3& z, const Mat3& R);
  bool updateVelocity(const Vec3& z, const Mat3& R);

  // Source-specific wrappers using the configured covariances.
  bool legVelocityUpdate(const Vec3& v_world, int slipping_legs);
  bool exteroVelocityUpdate(const Vec3& v_world);
  bool exteroPositionUpdate(const Vec3& p_world);

  const FusionState& state() const { return x_; }
  const Mat6& covariance() const { return P_; }
  const FusionDiagnostics& diagnostics() const { return diag_; }

 private:
  bool update(const Vec3& z, const Eigen::Matrix<double, 3, 6>& H, const Mat3& R);

  FusionConfig cfg_;
  FusionState x_;
  Mat6 P_ = Mat6::Identity();
  FusionDiagnostics diag_;
};

}  // namespace qse
