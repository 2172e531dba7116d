#include "qse/contact.hpp"

namespace qse {

ContactEstimator::ContactEstimator(const RobotModel& model, const ContactConfig& config)
    : model_(model), cfg_(config) {
  f_min_ = cfg_.f_min > 0.0 ? cfg_.f_min : 0.08 * model_.totalMass() * model_.gravity();
  reset();
}

void ContactEstimator::reset() {
  last_ = ContactEstimate{};
  for (int i = 0; i < kNumLegs; ++i) {
    last_.grf[i].setZero();
    last_.valid[i] = false;
    last_.contact[i] = false;
  }
  diag_ = ContactDiagnostics{};
}

ContactEstimate ContactEstimator::update(const JointSample& js, const Quat& base_att,
                                         const Vec18* gen_vel, const Vec18* gen_acc) {
  const Vec3 gravity_body =
      base_att.toRotationMatrix().transpose() * Vec3(0, 0, -model_.gravity());

  Vec18 bias;
  Mat18 M = Mat18::Zero();
  if (cfg_.dynamics == DynamicsMode::kQuasiStatic) {
    bias = model_.gravityTorques(js.q, gravity_body);
  } else {
    const Vec18 vel = gen_vel ? *gen_vel : Vec18::Zero();
    const DynamicsTerms dyn = model_.dynamicsTerms(js.q, vel, gravity_body, DynamicsMode::kFull);
    bias = dyn.h;
    M = dyn.M;
  }

  ContactEstimate out = last_;
  for (Leg leg : kAllLegs) {
    const int i = legIndex(leg);
    const Mat3 J = model_.footJacobian(js.q, leg);
    Eigen::JacobiSVD<Mat3> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues()(2) < cfg_.sigma_min) {
      // Leg force unobservable here; hold the previous contact decision.
      out.valid[i] = false;
      ++diag_.singular_jacobian;
      continue;
    }

    Vec3 rhs = bias.segment<3>(legDofIndex(leg)) - js.tau.segment<3>(3 * i);
    if (cfg_.dynamics == DynamicsMode::kFull && gen_acc != nullptr) {
      rhs += (M * *gen_acc).segment<3>(legDofIndex(leg));
    }
    const Vec3 grf = J.transpose().fullPivLu().solve(rhs);

    out.grf[i] = grf;
    out.valid[i] = true;
    const double f = grf.norm();
    if (!cfg_.hysteresis) {
      out.contact[i] = f > f_min_;
    } else if (last_.contact[i]) {
      out.contact[i] = f >= cfg_.release_fraction * f_min_;
    } else {
      out.contact[i] = f > f_min_;
    }
  }
  last_ = out;
  return out;
}

}  // namespace qse
