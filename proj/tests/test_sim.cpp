#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "qse/contact.hpp"
#include "qse/log.hpp"
#include "qse/robot_model.hpp"
#include "qse/sim.hpp"

using namespace qse;

namespace {

std::string tmpPath(const char* tag) {
  return std::string("/tmp/qse_sim_") + tag + "_" + std::to_string(::getpid()) + ".jsonl";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Tie-break rank of a channel at equal timestamps (truth, planner/joints,
// extero, IMU).
int channelRank(const LogEvent& ev) {
  struct V {
    int operator()(const GroundTruthSample&) { return 0; }
    int operator()(const DesiredFootSample&) { return 1; }
    int operator()(const JointSample&) { return 2; }
    int operator()(const ExteroPoseSample&) { return 3; }
    int operator()(const ExteroTwistSample&) { return 4; }
    int operator()(const ImuSample&) { return 5; }
    int operator()(const EstimateSample&) { return 6; }
  };
  return std::visit(V{}, ev);
}

template <class T>
std::vector<T> eventsOf(const std::vector<LogEvent>& evs) {
  std::vector<T> out;
  for (const auto& ev : evs) {
    if (const T* s = std::get_if<T>(&ev)) out.push_back(*s);
  }
  return out;
}

ScenarioConfig quietTrot() {
  ScenarioConfig cfg;
  cfg.gait = "trot";
  cfg.duration = 3.0;
  cfg.speed = 0.3;
  return cfg;  // all noise and slip off by default
}

}  // namespace

TEST_CASE("same scenario and seed reproduce the event stream byte for byte") {
  RobotModel model = RobotModel::aliengoLike();
  ScenarioConfig cfg = quietTrot();
  cfg.duration = 2.0;
  cfg.imu_rate = 200.0;
  cfg.joint_rate = 100.0;
  cfg.sigma_gyro = 1e-3;
  cfg.sigma_accel = 1e-2;
  cfg.sigma_joint_q = 1e-3;
  cfg.sigma_extero_pos = 5e-3;
  cfg.extero_drift_pos = 1e-2;
  cfg.slip_probability = 0.5;
  cfg.seed = 42;

  auto serialize = [&](const ScenarioConfig& c, const char* tag) {
    const std::string path = tmpPath(tag);
    {
      LogWriter w(path);
      Simulator sim(model, c);
      sim.run([&](const LogEvent& ev) { w.write(ev); });
    }
    std::string bytes = slurp(path);
    std::remove(path.c_str());
    return bytes;
  };

  const std::string a = serialize(cfg, "rep_a");
  const std::string b = serialize(cfg, "rep_b");
  CHECK(a == b);
  CHECK(a.size() > 10000);  // the stream actually contains the run

  ScenarioConfig other = cfg;
  other.seed = 43;
  CHECK(serialize(other, "rep_c") != a);
}

TEST_CASE("standing robot is static: resting IMU, level pose, quarter-weight legs") {
  RobotModel model = RobotModel::aliengoLike();
  ScenarioConfig cfg;
  cfg.gait = "stand";
  cfg.speed = 0.0;
  cfg.duration = 1.0;
  cfg.imu_rate = 100.0;
  cfg.joint_rate = 100.0;
  cfg.extero_rate = 5.0;
  Simulator sim(model, cfg);
  const auto evs = sim.runToVector();

  const double h = 0.8 * (model.thighLength() + model.shankLength());
  const double mg = model.totalMass() * model.gravity();

  for (const auto& gt : eventsOf<GroundTruthSample>(evs)) {
    CHECK((gt.pos - Vec3(0, 0, h)).norm() <= 1e-15);
    CHECK(gt.vel.norm() <= 1e-15);
    CHECK(gt.omega.norm() <= 1e-15);
    CHECK(gt.att.angleTo(Quat::identity()) <= 1e-15);
    for (int i = 0; i < kNumLegs; ++i) {
      CHECK(gt.contact[i]);
      CHECK(!gt.slip[i]);
    }
  }
  for (const auto& imu : eventsOf<ImuSample>(evs)) {
    CHECK(imu.gyro.norm() <= 1e-15);
    CHECK((imu.accel - Vec3(0, 0, model.gravity())).norm() <= 1e-12);
  }

  // The synthesized torques must decode back into a legged support of the
  // full weight.  The load balances moments about the CoM, which sits a bit
  // aft of the geometric center, so hinds carry slightly more than fronts.
  ContactEstimator est(model, ContactConfig{});
  int checked = 0;
  for (const auto& js : eventsOf<JointSample>(evs)) {
    const auto state = est.update(js, Quat::identity());
    Vec3 sum = Vec3::Zero();
    for (int i = 0; i < kNumLegs; ++i) {
      CHECK(state.contact[i]);
      CHECK(state.grf[i].z() == doctest::Approx(mg / 4.0).epsilon(0.05));
      sum += state.grf[i];
    }
    // Left/right mirror symmetry of the stance.
    CHECK(state.grf[0].z() == doctest::Approx(state.grf[1].z()).epsilon(1e-9));
    CHECK(state.grf[2].z() == doctest::Approx(state.grf[3].z()).epsilon(1e-9));
    CHECK((sum - Vec3(0, 0, mg)).norm() <= 1e-6 * mg);
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("trot joint streams are kinematically consistent with the true base motion") {
  RobotModel model = RobotModel::aliengoLike();
  ScenarioConfig cfg = quietTrot();
  cfg.imu_rate = 200.0;
  cfg.joint_rate = 200.0;  // aligned with truth cadence
  cfg.yaw_rate = 0.2;
  Simulator sim(model, cfg);
  const auto evs = sim.runToVector();

  std::map<double, GroundTruthSample> truth_at;
  for (const auto& gt : eventsOf<GroundTruthSample>(evs)) truth_at[gt.t] = gt;

  int stance_checked = 0;
  for (const auto& js : eventsOf<JointSample>(evs)) {
    auto it = truth_at.find(js.t);
    REQUIRE(it != truth_at.end());
    const GroundTruthSample& gt = it->second;
    const Mat3 Rt = gt.att.toRotationMatrix().transpose();
    for (Leg leg : kAllLegs) {
      const int i = legIndex(leg);
      if (!gt.contact[i] || gt.slip[i]) continue;
      const Vec3 p = model.footPosition(js.q, leg);
      const Vec3 qd = js.qd.segment<3>(3 * i);
      // A planted foot makes each leg an odometer for the base velocity.
      const Vec3 v_est = -(model.footJacobian(js.q, leg) * qd + gt.omega.cross(p));
      CHECK((v_est - Rt * gt.vel).norm() <= 1e-8);
      // Planted feet sit on the ground plane.
      const Vec3 p_w = gt.pos + gt.att.rotate(p);
      CHECK(std::abs(p_w.z()) <= 1e-9);
      ++stance_checked;
    }
  }
  CHECK(stance_checked > 1000);
}

TEST_CASE("planner reference equals the executed foot path when nothing slips") {
  RobotModel model = RobotModel::aliengoLike();
  ScenarioConfig cfg = quietTrot();
  cfg.duration = 2.0;
  Simulator sim(model, cfg);
  const auto evs = sim.runToVector();
  const auto des = eventsOf<DesiredFootSample>(evs);
  const auto joints = eventsOf<JointSample>(evs);
  REQUIRE(des.size() == joints.size());
  for (size_t k = 0; k < des.size(); ++k) {
    REQUIRE(des[k].t == joints[k].t);
    for (Leg leg : kAllLegs) {
      const Vec3 p = model.footPosition(joints[k].q, leg);
      CHECK((des[k].pos[legIndex(leg)] - p).norm() <= 1e-9);
    }
  }
}

TEST_CASE("stance duty fractions match the gait schedule") {
  RobotModel model = RobotModel::aliengoLike();

  SUBCASE("trot") {
    ScenarioConfig cfg = quietTrot();
    cfg.duration = 4.8;  // six full 0.8 s cycles
    Simulator sim(model, cfg);
    int n = 0;
    std::array<int, kNumLegs> stance{};
    for (const auto& gt : eventsOf<GroundTruthSample>(sim.runToVector())) {
      ++n;
      for (int i = 0; i < kNumLegs; ++i) stance[i] += gt.contact[i] ? 1 : 0;
    }
    for (int i = 0; i < kNumLegs; ++i) {
      CHECK(static_cast<double>(stance[i]) / n == doctest::Approx(0.55).epsilon(0.02));
    }
  }

  SUBCASE("crawl keeps at least three feet down") {
    ScenarioConfig cfg;
    cfg.gait = "crawl";
    cfg.duration = 6.0;  // five full 1.2 s cycles
    cfg.speed = 0.15;
    Simulator sim(model, cfg);
    std::array<int, kNumLegs> stance{};
    int n = 0;
    for (const auto& gt : eventsOf<GroundTruthSample>(sim.runToVector())) {
      ++n;
      int down = 0;
      for (int i = 0; i < kNumLegs; ++i) {
        stance[i] += gt.contact[i] ? 1 : 0;
        down += gt.contact[i] ? 1 : 0;
      }
      CHECK(down >= 3);
    }
    for (int i = 0; i < kNumLegs; ++i) {
      CHECK(static_cast<double>(stance[i]) / n == doctest::Approx(0.8).epsilon(0.02));
    }
  }
}

TEST_CASE("event cadence and merge order") {
  RobotModel model = RobotModel::aliengoLike();
  ScenarioConfig cfg = quietTrot();
  cfg.duration = 1.5;
  cfg.imu_rate = 400.0;
  cfg.joint_rate = 400.0;
  cfg.extero_rate = 10.0;
  Simulator sim(model, cfg);
  const auto evs = sim.runToVector();

  CHECK(eventsOf<ImuSample>(evs).size() == 601);
  CHECK(eventsOf<GroundTruthSample>(evs).size() == 601);
  CHECK(eventsOf<JointSample>(evs).size() == 601);
  CHECK(eventsOf<DesiredFootSample>(evs).size() == 601);
  CHECK(eventsOf<ExteroPoseSample>(evs).size() == 16);
  CHECK(eventsOf<ExteroTwistSample>(evs).size() == 16);

  for (size_t k = 1; k < evs.size(); ++k) {
    const double t0 = eventTime(evs[k - 1]);
    const double t1 = eventTime(evs[k]);
    CHECK(t1 >= t0);
    if (t1 == t0) CHECK(channelRank(evs[k]) > channelRank(evs[k - 1]));
  }

  SUBCASE("extero stream can be thinned or disabled") {
    cfg.extero_twist = false;
    Simulator no_twist(model, cfg);
    const auto evs2 = no_twist.runToVector();
    CHECK(eventsOf<ExteroPoseSample>(evs2).size() == 16);
    CHECK(eventsOf<ExteroTwistSample>(evs2).empty());

    cfg.extero_rate = 0.0;
    Simulator no_ext(model, cfg);
    const auto evs3 = no_ext.runToVector();
    CHECK(eventsOf<ExteroPoseSample>(evs3).empty());
    CHECK(eventsOf<ExteroTwistSample>(evs3).empty());
  }
}

TEST_CASE("injected slips drag the stance foot and are flagged in the truth") {
  RobotModel model = RobotModel::aliengoLike();
  ScenarioConfig cfg = quietTrot();
  cfg.imu_rate = 200.0;
  cfg.joint_rate = 200.0;
  cfg.slip_probability = 1.0;
  cfg.slip_duration = 0.12;
  cfg.slip_speed = 0.3;
  Simulator sim(model, cfg);
  const auto evs = sim.runToVector();

  std::map<double, GroundTruthSample> truth_at;
  int slip_samples = 0;
  for (const auto& gt : eventsOf<GroundTruthSample>(evs)) {
    truth_at[gt.t] = gt;
    for (int i = 0; i < kNumLegs; ++i) {
      if (gt.slip[i]) {
        ++slip_samples;
        CHECK(gt.contact[i]);  // slipping only happens in stance
      }
    }
  }
  CHECK(slip_samples > 100);

  // While a foot slides at slip_speed, the per-leg odometry velocity is wrong
  // by exactly that speed; planted legs at the same instant are still exact.
  int checked_slipping = 0, checked_clean = 0;
  for (const auto& js : eventsOf<JointSample>(evs)) {
    const GroundTruthSample& gt = truth_at.at(js.t);
    const Mat3 Rt = gt.att.toRotationMatrix().transpose();
    for (Leg leg : kAllLegs) {
      const int i = legIndex(leg);
      if (!gt.contact[i]) continue;
      const Vec3 p = model.footPosition(js.q, leg);
      const Vec3 qd = js.qd.segment<3>(3 * i);
      const Vec3 v_est = -(model.footJacobian(js.q, leg) * qd + gt.omega.cross(p));
      const double err = (v_est - Rt * gt.vel).norm();
      if (gt.slip[i]) {
        CHECK(err == doctest::Approx(cfg.slip_speed).epsilon(1e-8));
        ++checked_slipping;
      } else {
        CHECK(err <= 1e-8);
        ++checked_clean;
      }
    }
  }
  CHECK(checked_slipping > 100);
  CHECK(checked_clean > 100);

  // The planner keeps reporting the nominal foothold, so the reference and
  // the executed foot separate by the integrated slide.
  const auto des = eventsOf<DesiredFootSample>(evs);
  const auto joints = eventsOf<JointSample>(evs);
  double max_gap = 0.0;
  for (size_t k = 0; k < des.size(); ++k) {
    const GroundTruthSample& gt = truth_at.at(des[k].t);
    for (Leg leg : kAllLegs) {
      const int i = legIndex(leg);
      if (!gt.contact[i]) continue;
      const double gap = (des[k].pos[i] - model.footPosition(joints[k].q, leg)).norm();
      if (gt.slip[i]) max_gap = std::max(max_gap, gap);
    }
  }
  CHECK(max_gap > 0.8 * cfg.slip_speed * cfg.slip_duration);

  // Slip realizations are part of the deterministic scenario.
  Simulator again(model, cfg);
  const auto evs2 = again.runToVector();
  const auto gts1 = eventsOf<GroundTruthSample>(evs);
  const auto gts2 = eventsOf<GroundTruthSample>(evs2);
  REQUIRE(gts1.size() == gts2.size());
  for (size_t k = 0; k < gts1.size(); ++k) {
    for (int i = 0; i < kNumLegs; ++i) CHECK(gts1[k].slip[i] == gts2[k].slip[i]);
  }
}

TEST_CASE("scenario validation rejects infeasible requests") {
  RobotModel model = RobotModel::aliengoLike();

  ScenarioConfig cfg;
  cfg.gait = "stand";
  cfg.speed = 0.2;
  CHECK_THROWS_AS(Simulator(model, cfg), InfeasibleGait);

  cfg = ScenarioConfig{};
  cfg.gait = "stand";
  cfg.speed = 0.0;
  cfg.stand_height = 2.0;  // beyond full leg extension
  CHECK_THROWS_AS(Simulator(model, cfg), InfeasibleGait);

  cfg = ScenarioConfig{};
  cfg.speed = 5.0;  // strides far outside the leg workspace
  CHECK_THROWS_AS(Simulator(model, cfg), InfeasibleGait);

  cfg = ScenarioConfig{};
  cfg.duty = 1.2;
  CHECK_THROWS_AS(Simulator(model, cfg), InfeasibleGait);

  cfg = ScenarioConfig{};
  cfg.gait = "gallop";
  CHECK_THROWS_AS(Simulator(model, cfg), std::invalid_argument);

  cfg = ScenarioConfig{};
  cfg.duration = -1.0;
  CHECK_THROWS_AS(Simulator(model, cfg), std::invalid_argument);

  cfg = ScenarioConfig{};
  cfg.imu_rate = 0.0;
  CHECK_THROWS_AS(Simulator(model, cfg), std::invalid_argument);

  cfg = ScenarioConfig{};
  cfg.extero_latency = -0.1;
  CHECK_THROWS_AS(Simulator(model, cfg), std::invalid_argument);
}

TEST_CASE("exteroceptive samples lag by the configured latency") {
  RobotModel model = RobotModel::aliengoLike();
  ScenarioConfig cfg = quietTrot();
  cfg.duration = 2.0;
  cfg.extero_rate = 10.0;
  cfg.extero_latency = 0.15;
  Simulator sim(model, cfg);
  const auto evs = sim.runToVector();

  for (const auto& pose : eventsOf<ExteroPoseSample>(evs)) {
    const double t_eff = std::max(pose.t - cfg.extero_latency, 0.0);
    const GroundTruthSample gt = sim.truth(t_eff);
    CHECK((pose.pos - gt.pos).norm() <= 1e-12);
    CHECK(pose.att.angleTo(gt.att) <= 1e-12);
  }
  for (const auto& tw : eventsOf<ExteroTwistSample>(evs)) {
    const double t_eff = std::max(tw.t - cfg.extero_latency, 0.0);
    CHECK((tw.vel - sim.truth(t_eff).vel).norm() <= 1e-12);
  }
}

TEST_CASE("exteroceptive drift is a random walk of the configured strength") {
  RobotModel model = RobotModel::aliengoLike();
  ScenarioConfig cfg;
  cfg.gait = "stand";
  cfg.speed = 0.0;
  cfg.duration = 10.0;
  cfg.imu_rate = 50.0;
  cfg.joint_rate = 50.0;
  cfg.extero_rate = 10.0;
  cfg.extero_drift_pos = 0.01;
  cfg.extero_drift_att = 0.005;

  // Final-time drift magnitude averaged over seeds: for a 3-D random walk of
  // per-axis strength s, E|D(T)| = s*sqrt(T)*sqrt(8/pi).
  const int kSeeds = 40;
  double sum_pos = 0.0, sum_att = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    cfg.seed = 1000 + s;
    Simulator sim(model, cfg);
    const auto poses = eventsOf<ExteroPoseSample>(sim.runToVector());
    REQUIRE(!poses.empty());
    const auto& last = poses.back();
    const GroundTruthSample gt = sim.truth(last.t);
    sum_pos += (last.pos - gt.pos).norm();
    sum_att += last.att.angleTo(gt.att);
  }
  const double expect_pos = cfg.extero_drift_pos * std::sqrt(cfg.duration) * std::sqrt(8.0 / M_PI);
  const double expect_att = cfg.extero_drift_att * std::sqrt(cfg.duration) * std::sqrt(8.0 / M_PI);
  CHECK(sum_pos / kSeeds == doctest::Approx(expect_pos).epsilon(0.25));
  CHECK(sum_att / kSeeds == doctest::Approx(expect_att).epsilon(0.25));
}

TEST_CASE("closed-form truth derivatives agree with finite differences") {
  RobotModel model = RobotModel::aliengoLike();
  ScenarioConfig cfg = quietTrot();
  cfg.yaw_rate = 0.3;
  cfg.duration = 4.0;
  cfg.imu_rate = 100.0;
  cfg.joint_rate = 100.0;
  Simulator sim(model, cfg);

  const double eps = 1e-5;
  for (double t = 0.2; t < 3.8; t += 0.37) {
    const GroundTruthSample g0 = sim.truth(t - eps);
    const GroundTruthSample g1 = sim.truth(t);
    const GroundTruthSample g2 = sim.truth(t + eps);

    const Vec3 v_fd = (g2.pos - g0.pos) / (2.0 * eps);
    CHECK((v_fd - g1.vel).norm() <= 1e-6);

    // Body rate from the relative quaternion across the window.
    const Vec3 w_fd = (g0.att.conjugate() * g2.att).log() / (2.0 * eps);
    CHECK((w_fd - g1.omega).norm() <= 1e-6);
  }

  // Specific force from the same trajectory: f = R^T (a + g e3).
  const auto evs = sim.runToVector();
  int checked = 0;
  for (const auto& imu : eventsOf<ImuSample>(evs)) {
    if (imu.t < 0.2 || imu.t > 3.8) continue;
    const Vec3 a_fd = (sim.truth(imu.t + eps).vel - sim.truth(imu.t - eps).vel) / (2.0 * eps);
    const Mat3 Rt = sim.truth(imu.t).att.toRotationMatrix().transpose();
    CHECK((imu.accel - Rt * (a_fd + Vec3(0, 0, model.gravity()))).norm() <= 1e-5);
    ++checked;
  }
  CHECK(checked > 300);
}
