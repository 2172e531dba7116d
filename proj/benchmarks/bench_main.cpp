// Microbenchmarks for the estimation hot path: per-sample costs of the
// kinematics, dynamics, and filter stages, plus a full pipeline IMU tick.

#include <benchmark/benchmark.h>

#include "qse/attitude.hpp"
#include "qse/contact.hpp"
#include "qse/fusion.hpp"
#include "qse/pipeline.hpp"
#include "qse/robot_model.hpp"
#include "qse/sim.hpp"

using namespace qse;

namespace {

Vec12 standConfig(const RobotModel& m, double height) {
  Vec12 q = Vec12::Zero();
  for (Leg leg : kAllLegs) {
    const Vec3 target = m.hipOffset(leg) +
                        Vec3(0.0, m.sideSign(leg) * m.abductionOffset(), -height);
    q.segment<3>(3 * legIndex(leg)) = *m.footIK(target, leg);
  }
  return q;
}

const RobotModel& model() {
  static const RobotModel m = RobotModel::aliengoLike();
  return m;
}

}  // namespace

static void BM_FootPosition(benchmark::State& state) {
  const Vec12 q = standConfig(model(), 0.35);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model().footPosition(q, Leg::LF));
  }
}
BENCHMARK(BM_FootPosition);

static void BM_FootJacobian(benchmark::State& state) {
  const Vec12 q = standConfig(model(), 0.35);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model().footJacobian(q, Leg::LF));
  }
}
BENCHMARK(BM_FootJacobian);

static void BM_FootIK(benchmark::State& state) {
  const Vec3 target = model().hipOffset(Leg::LF) + Vec3(0.03, 0.06, -0.35);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model().footIK(target, Leg::LF));
  }
}
BENCHMARK(BM_FootIK);

static void BM_GravityTorques(benchmark::State& state) {
  const Vec12 q = standConfig(model(), 0.35);
  const Vec3 g_b(0, 0, -9.81);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model().gravityTorques(q, g_b));
  }
}
BENCHMARK(BM_GravityTorques);

static void BM_FullDynamics(benchmark::State& state) {
  const Vec12 q = standConfig(model(), 0.35);
  Vec18 u = Vec18::Constant(0.2);
  const Vec3 g_b(0, 0, -9.81);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model().dynamicsTerms(q, u, g_b, DynamicsMode::kFull));
  }
}
BENCHMARK(BM_FullDynamics);

static void BM_ContactUpdate(benchmark::State& state) {
  ContactEstimator est(model(), ContactConfig{});
  JointSample js;
  js.t = 0.0;
  js.q = standConfig(model(), 0.35);
  const Vec18 h = model().gravityTorques(js.q, Vec3(0, 0, -9.81));
  js.tau = h.tail<12>();
  const Quat att = Quat::identity();
  for (auto _ : state) {
    benchmark::DoNotOptimize(est.update(js, att));
  }
}
BENCHMARK(BM_ContactUpdate);

static void BM_AttitudeStep(benchmark::State& state) {
  AttitudeEstimator obs{AttitudeConfig{}};
  ImuSample imu;
  imu.t = 0.0;
  imu.gyro = Vec3(0.01, -0.02, 0.05);
  imu.accel = Vec3(0.1, 0.0, 9.80);
  for (auto _ : state) {
    imu.t += 0.0025;
    obs.step(imu, 0.0025);
    benchmark::DoNotOptimize(obs.fused());
  }
}
BENCHMARK(BM_AttitudeStep);

static void BM_FusionPredictUpdate(benchmark::State& state) {
  FusionFilter kf{FusionConfig{}};
  const Vec3 u(0.0, 0.0, 0.05);
  const Vec3 v_meas(0.3, 0.0, 0.0);
  for (auto _ : state) {
    kf.predict(u, 0.0025);
    kf.legVelocityUpdate(v_meas, 0);
    benchmark::DoNotOptimize(kf.state());
  }
}
BENCHMARK(BM_FusionPredictUpdate);

static void BM_PipelineImuTick(benchmark::State& state) {
  PipelineConfig cfg;
  Pipeline pipe(model(), cfg);
  GroundTruthSample gt;
  gt.t = 0.0;
  pipe.processEvent(LogEvent{gt});
  ImuSample imu;
  imu.t = 0.0;
  imu.gyro = Vec3(0.01, -0.02, 0.05);
  imu.accel = Vec3(0.1, 0.0, 9.80);
  for (auto _ : state) {
    imu.t += 0.0025;
    pipe.processEvent(LogEvent{imu});
  }
}
BENCHMARK(BM_PipelineImuTick);

static void BM_SimulatorSecond(benchmark::State& state) {
  ScenarioConfig sc;
  sc.duration = 1.0;
  sc.gait = "trot";
  sc.speed = 0.4;
  for (auto _ : state) {
    Simulator sim(model(), sc);
    auto events = sim.runToVector();
    benchmark::DoNotOptimize(events.size());
  }
}
BENCHMARK(BM_SimulatorSecond);

BENCHMARK_MAIN();
