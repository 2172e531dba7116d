#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "qse/attitude.hpp"

using namespace qse;

namespace {

constexpr double kG = 9.81;
constexpr double kDeg = M_PI / 180.0;

// Angle between the gravity directions seen by two attitudes; yaw-blind.
double tiltError(const Quat& a, const Quat& b) {
  const Vec3 za = a.toRotationMatrix().transpose() * Vec3::UnitZ();
  const Vec3 zb = b.toRotationMatrix().transpose() * Vec3::UnitZ();
  return std::acos(std::clamp(za.dot(zb), -1.0, 1.0));
}

double yawOf(const Quat& q) {
  const Mat3 R = q.toRotationMatrix();
  return std::atan2(R(1, 0), R(0, 0));
}

ImuSample imuAt(double t, const Quat& att_true, const Vec3& gyro) {
  ImuSample s;
  s.t = t;
  s.gyro = gyro;
  s.accel = att_true.toRotationMatrix().transpose() * Vec3(0, 0, kG);
  return s;
}

}  // namespace

TEST_CASE("gravity steering levels the estimate from a large initial tilt") {
  // The bias adaptation couples into the attitude loop and gives the observer
  // a slow mode with a multi-second time constant; the error filter unlearns
  // the transient-induced bias deviation even more slowly.  Convergence is
  // therefore judged after two minutes.
  const Quat att_true = Quat::fromAxisAngle(Vec3::UnitX(), 20.0 * kDeg);
  AttitudeEstimator est{AttitudeConfig{}};
  est.initialize(Quat(), Vec3::Zero());

  const double dt = 1.0 / 400.0;
  for (int k = 0; k <= 400 * 120; ++k) {
    est.step(imuAt(k * dt, att_true, Vec3::Zero()), k == 0 ? 0.0 : dt);
  }
  CHECK(tiltError(est.nominal().q, att_true) < 0.1 * kDeg);
  CHECK(tiltError(est.fused().q, att_true) < 0.1 * kDeg);
}

TEST_CASE("constant gyro bias is estimated on the gravity-observable axes") {
  const Vec3 bias_true(0.01, -0.02, 0.0);
  AttitudeEstimator est{AttitudeConfig{}};
  const double dt = 1.0 / 400.0;
  for (int k = 0; k <= 400 * 60; ++k) {
    est.step(imuAt(k * dt, Quat(), bias_true), k == 0 ? 0.0 : dt);
  }
  const AttitudeState s = est.fused();
  CHECK(s.bias.x() == doctest::Approx(bias_true.x()).epsilon(0.15));
  CHECK(s.bias.y() == doctest::Approx(bias_true.y()).epsilon(0.15));
  CHECK(std::abs(s.bias.z()) < 2e-3);  // yaw-rate bias invisible to gravity
  CHECK(tiltError(s.q, Quat()) < 0.3 * kDeg);
}

TEST_CASE("pseudo-north makes the yaw-rate bias observable") {
  const Vec3 bias_true(0.0, 0.0, 0.015);
  AttitudeEstimator est{AttitudeConfig{}};
  const double dt = 1.0 / 400.0;
  for (int k = 0; k <= 400 * 120; ++k) {
    const double t = k * dt;
    est.step(imuAt(t, Quat(), bias_true), k == 0 ? 0.0 : dt);
    if (k % 40 == 0) est.pseudoNorthUpdate(t, Vec3::UnitX(), Vec3::UnitX());
  }
  CHECK(est.fused().bias.z() == doctest::Approx(0.015).epsilon(0.2));
  CHECK(std::abs(yawOf(est.fused().q)) < 1.0 * kDeg);
}

TEST_CASE("without usable accel the observer is a pure gyro integrator") {
  AttitudeEstimator est{AttitudeConfig{}};
  const Vec3 w(0.4, -0.2, 0.8);
  const double dt = 0.0025;
  ImuSample s;
  s.accel = Vec3::Zero();  // no specific force at all
  Quat expected;
  for (int k = 1; k <= 1000; ++k) {
    s.t = k * dt;
    s.gyro = w;
    est.step(s, dt);
    expected = quatIntegrate(expected, w, dt);
  }
  CHECK(est.diagnostics().gated_accel == 1000);
  CHECK(est.nominal().q.angleTo(expected) < 1e-9);
  CHECK(est.fused().q.angleTo(expected) < 1e-9);  // no update ever fired
  CHECK(est.nominal().bias.norm() == 0.0);
}

TEST_CASE("accelerometer gate uses a relative band around gravity") {
  AttitudeEstimator est{AttitudeConfig{}};
  ImuSample s;
  s.t = 0.0;
  s.gyro = Vec3::Zero();

  s.accel = Vec3(0, 0, kG * 1.29);  // inside the 30% band
  est.step(s, 0.0);
  CHECK(est.diagnostics().gated_accel == 0);

  s.t = 0.0025;
  s.accel = Vec3(0, 0, kG * 1.31);  // outside
  est.step(s, 0.0025);
  CHECK(est.diagnostics().gated_accel == 1);

  s.t = 0.005;
  s.accel = Vec3(0, 0, kG * 0.69);
  est.step(s, 0.0025);
  CHECK(est.diagnostics().gated_accel == 2);
}

TEST_CASE("a yawed body sees the heading reference rotated into its frame") {
  // world-x reference seen from a +90 degree yawed body points along -y
  const Quat yaw90 = Quat::fromAxisAngle(Vec3::UnitZ(), 90.0 * kDeg);
  const Vec3 m_body = yaw90.toRotationMatrix().transpose() * Vec3::UnitX();
  CHECK((m_body - Vec3(0.0, -1.0, 0.0)).norm() < 1e-12);

  // feeding exactly that vector steers a level estimate to +90 degrees yaw
  AttitudeConfig cfg;
  cfg.sigma_gyro = 5e-3;  // noise floor so the error filter keeps tracking
  AttitudeEstimator est{cfg};
  const double dt = 0.0025;
  for (int k = 0; k <= 400 * 60; ++k) {
    const double t = k * dt;
    est.step(imuAt(t, yaw90, Vec3::Zero()), k == 0 ? 0.0 : dt);
    if (k % 40 == 0) est.pseudoNorthUpdate(t, m_body, Vec3::UnitX());
  }
  CHECK(std::abs(yawOf(est.fused().q) - 90.0 * kDeg) < 1.0 * kDeg);
  CHECK(std::abs(yawOf(est.nominal().q) - 90.0 * kDeg) < 2.0 * kDeg);
}

TEST_CASE("stale pseudo-north stops steering the observer") {
  AttitudeConfig cfg;
  cfg.sigma_north = 1e6;  // keep the error-state row inert; watch the observer
  const Vec3 m_body(0.0, -1.0, 0.0);  // 90 degrees of yaw disagreement

  AttitudeEstimator fresh{cfg};
  fresh.pseudoNorthUpdate(0.0, m_body, Vec3::UnitX());
  for (int k = 1; k <= 40; ++k) {
    fresh.step(imuAt(0.0025 * k, Quat(), Vec3::Zero()), 0.0025);
  }
  CHECK(std::abs(yawOf(fresh.nominal().q)) > 0.01);  // injection active

  AttitudeEstimator stale{cfg};
  stale.pseudoNorthUpdate(0.0, m_body, Vec3::UnitX());
  for (int k = 1; k <= 40; ++k) {
    // first tick already beyond the 0.5 s staleness horizon
    stale.step(imuAt(0.6 + 0.0025 * k, Quat(), Vec3::Zero()), 0.0025);
  }
  CHECK(std::abs(yawOf(stale.nominal().q)) < 1e-12);
}

TEST_CASE("error-state feedback never alters the observer trajectory") {
  AttitudeConfig tight;
  tight.sigma_north = 1e-3;
  AttitudeConfig loose;
  loose.sigma_north = 1e4;
  AttitudeEstimator a{tight};
  AttitudeEstimator b{loose};

  const Quat att_true = Quat::fromAxisAngle(Vec3(1, 2, 0.5).normalized(), 0.4);
  std::mt19937 rng(3);
  std::normal_distribution<double> n(0.0, 0.02);
  const double dt = 0.0025;
  for (int k = 0; k <= 2000; ++k) {
    const double t = k * dt;
    ImuSample s = imuAt(t, att_true, Vec3(n(rng), n(rng), n(rng)));
    a.step(s, k == 0 ? 0.0 : dt);
    b.step(s, k == 0 ? 0.0 : dt);
    if (k % 25 == 0) {
      const Vec3 m_body = att_true.toRotationMatrix().transpose() * Vec3::UnitX();
      a.pseudoNorthUpdate(t, m_body, Vec3::UnitX());
      b.pseudoNorthUpdate(t, m_body, Vec3::UnitX());
    }
  }
  // identical stage-1 paths, different error-state corrections
  CHECK(a.nominal().q.angleTo(b.nominal().q) < 1e-12);
  CHECK((a.nominal().bias - b.nominal().bias).norm() < 1e-12);
  CHECK(a.fused().q.angleTo(b.fused().q) > 1e-8);
}

TEST_CASE("bias clamp bounds the observer bias per axis") {
  AttitudeConfig cfg;
  cfg.kb = 50.0;  // absurdly aggressive adaptation
  AttitudeEstimator est{cfg};
  // wildly inconsistent accel direction drives a large injection
  ImuSample s;
  s.gyro = Vec3::Zero();
  for (int k = 1; k <= 2000; ++k) {
    s.t = 0.0025 * k;
    s.accel = Vec3(kG, 0, 0);
    est.step(s, 0.0025);
    const Vec3 b = est.nominal().bias;
    CHECK(b.cwiseAbs().maxCoeff() <= 0.2 + 1e-12);
  }
}

TEST_CASE("covariance stays symmetric positive semidefinite under noise") {
  AttitudeEstimator est{AttitudeConfig{}};
  std::mt19937 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  const double dt = 0.0025;
  for (int k = 1; k <= 3000; ++k) {
    ImuSample s;
    s.t = k * dt;
    s.gyro = Vec3(n(rng), n(rng), n(rng));
    s.accel = Vec3(0.3 * n(rng), 0.3 * n(rng), kG + 0.3 * n(rng));
    est.step(s, dt);
    if (k % 100 == 0) {
      const Mat6& P = est.covariance();
      CHECK((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(Eigen::SelfAdjointEigenSolver<Mat6>(P).eigenvalues().minCoeff() > -1e-12);
    }
  }
}

TEST_CASE("corrected rate removes the fused bias from the gyro") {
  AttitudeEstimator est{AttitudeConfig{}};
  est.initialize(Quat(), Vec3(0.01, 0.0, 0.0));
  ImuSample s;
  s.t = 0.0025;
  s.gyro = Vec3(0.11, 0.2, -0.05);
  s.accel = Vec3(0, 0, kG);
  est.step(s, 0.0025);
  const Vec3 expected = s.gyro - est.fused().bias;
  CHECK((est.correctedRate() - expected).norm() < 1e-12);
}
