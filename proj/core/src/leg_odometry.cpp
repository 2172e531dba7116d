#include "qse/leg_odometry.hpp"

#include <cmath>

namespace qse {

LegOdometry::LegOdometry(const RobotModel& model, const LegOdometryConfig& config)
    : model_(model), cfg_(config) {}

void LegOdometry::reset() { desired_.clear(); }

void LegOdometry::setDesired(const DesiredFootSample& desired) {
  desired_.push_back(desired);
  while (desired_.size() > 2) desired_.pop_front();
}

LegOdometryOutput LegOdometry::update(const JointSample& js, const Vec3& omega_body,
                                      const PerLeg<bool>& contact) {
  LegOdometryOutput out;

  // Reference foot velocity by finite difference of the last two planner
  // samples, valid only if the newest one pairs with this joint sample.
  bool have_ref = false;
  PerLeg<Vec3> ref_pos{};
  PerLeg<Vec3> ref_vel{};
  if (cfg_.slip_detection && desired_.size() == 2 &&
      std::abs(desired_.back().t - js.t) <= cfg_.pairing_tol) {
    const double dt = desired_.back().t - desired_.front().t;
    if (dt > 0.0) {
      have_ref = true;
      for (int i = 0; i < kNumLegs; ++i) {
        ref_pos[i] = desired_.back().pos[i];
        ref_vel[i] = (desired_.back().pos[i] - desired_.front().pos[i]) / dt;
      }
    }
  }

  Vec3 vel_sum = Vec3::Zero();
  for (Leg leg : kAllLegs) {
    const int i = legIndex(leg);
    const Vec3 p = model_.footPosition(js.q, leg);
    const Vec3 v_rel = model_.footVelocity(js.q, js.qd, leg);

    if (!contact[i]) continue;
    out.foot_vel[i] = -(v_rel + omega_body.cross(p));
    vel_sum += out.foot_vel[i];
    ++out.stance_count;

    if (have_ref) {
      double dv2 = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double e = (ref_vel[i][k] - v_rel[k]) / (std::abs(ref_vel[i][k]) + cfg_.slip_margin);
        dv2 += e * e;
      }
      out.metrics[i].dv = std::sqrt(dv2);
      out.metrics[i].dp = ref_pos[i].norm() - p.norm();
      out.metrics[i].evaluated = true;
      out.slip[i] = out.metrics[i].dv > cfg_.slip_eps_v && out.metrics[i].dp > cfg_.slip_eps_p;
      if (out.slip[i]) ++out.slip_count;
    }
  }

  if (out.stance_count > 0) {
    out.base_velocity = vel_sum / out.stance_count;
  }
  return out;
}

}  // namespace qse
