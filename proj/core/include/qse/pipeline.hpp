// Full estimator: contact detection, leg odometry with slip handling, the
// cascaded attitude observer and the position/velocity fusion filter, driven
// by a time-ordered event stream.
//
// Per IMU tick the attitude cascade steps and the fusion filter propagates
// with u = R f + g_n; one estimate is emitted, so the output cadence equals
// the IMU cadence.  Joint samples trigger contact + leg-odometry velocity
// updates; exteroceptive samples trigger position/velocity updates and the
// pseudo-north heading observation.  The exteroceptive world frame is
// anchored to the estimator's own frame at the first pose sample.
//
// Events arriving more than `max_out_of_order` before the newest processed
// timestamp are dropped and counted, never applied.

#pragma once

#include <cstdint>
#include <optional>

#include "qse/attitude.hpp"
#include "qse/contact.hpp"
#include "qse/fusion.hpp"
#include "qse/leg_odometry.hpp"
#include "qse/log.hpp"
#include "qse/measurements.hpp"
#include "qse/robot_model.hpp"

namespace qse {

struct PipelineSettings {
  bool use_extero = true;          // false = proprioceptive-only estimation
  bool slip_detection = true;
  double max_out_of_order = 0.005; // s
  bool init_from_ground_truth = true;
  Extrinsics extrinsics;
};

struct PipelineConfig {
  ContactConfig contact;
  LegOdometryConfig leg_odometry;
  AttitudeConfig attitude;
  FusionConfig fusion;
  PipelineSettings settings;
};

struct PipelineDiagnostics {
  std::uint64_t imu_ticks = 0;
  std::uint64_t joint_updates = 0;
  std::uint64_t extero_updates = 0;
  std::uint64_t out_of_order_dropped = 0;
  std::uint64_t unanchored_twist_skipped = 0;
};

// Per-tick sanity signals; see Pipeline::health().
struct HealthStatus {
  double quat_norm_error = 0.0;   // | ||q_est|| - 1 |
  bool cov_symmetric = false;     // attitude and fusion covariances
  bool cov_psd = false;
  std::uint64_t psd_projections = 0;  // total over both filters
};

class Pipeline {
 public:
  Pipeline(const RobotModel& model, const PipelineConfig& config);

  // Feeds one event; returns an estimate when the event was an IMU tick.
  std::optional<EstimateSample> processEvent(const LogEvent& ev);

  EstimateSample currentEstimate() const;
  HealthStatus health() const;

  const PipelineDiagnostics& diagnostics() const { return diag_; }
  const AttitudeEstimator& attitude() const { return attitude_; }
  const FusionFilter& fusion() const { return fusion_; }
  const ContactEstimator& contact() const { return contact_; }

 private:
  void handle(const ImuSample& imu);
  void handle(const JointSample& js);
  void handle(const ExteroPoseSample& pose);
  void handle(const ExteroTwistSample& twist);
  void handle(const DesiredFootSample& des);
  void handle(const GroundTruthSample& gt);
  void handle(const EstimateSample&) {}  // replayed estimates are ignored

  void initializeFromImu(const ImuSample& imu);

  RobotModel model_;
  PipelineConfig cfg_;
  ContactEstimator contact_;
  LegOdometry leg_odo_;
  AttitudeEstimator attitude_;
  FusionFilter fusion_;

  bool initialized_ = false;
  bool gt_initialized_ = false;
  double last_t_ = 0.0;
  bool have_last_t_ = false;
  double last_imu_t_ = 0.0;
  bool have_imu_t_ = false;

  // World pose of the exteroceptive sensor's private world frame, fixed at
  // the first pose sample.
  bool anchored_ = false;
  Mat3 anchor_R_ = Mat3::Identity();
  Vec3 anchor_t_ = Vec3::Zero();

  PerLeg<bool> last_contact_{};
  PerLeg<bool> last_slip_{};
  std::optional<EstimateSample> pending_estimate_;
  PipelineDiagnostics diag_;
};

}  // namespace qse
