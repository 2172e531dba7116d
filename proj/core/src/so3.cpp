#include "qse/so3.hpp"

#include <cmath>
#include <stdexcept>

namespace qse {

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return S;
}

Quat::Quat(double w, double x, double y, double z) : q_(w, x, y, z) {
  const double n = q_.norm();
  if (n < 1e-12) {
    throw std::invalid_argument("Quat: near-zero norm");
  }
  // skip the division when already unit: keeps serialized values bit-stable
  if (std::abs(n - 1.0) > 1e-12) q_.coeffs() /= n;
}

Quat::Quat(const Eigen::Quaterniond& q) : q_(q) {
  const double n = q_.norm();
  if (n < 1e-12) {
    throw std::invalid_argument("Quat: near-zero norm");
  }
  if (std::abs(n - 1.0) > 1e-12) q_.coeffs() /= n;
}

Quat Quat::fromAxisAngle(const Vec3& axis, double angle_rad) {
  const double n = axis.norm();
  if (n < 1e-12) {
    return Quat();
  }
  return Quat(Eigen::Quaterniond(Eigen::AngleAxisd(angle_rad, axis / n)));
}

Quat Quat::fromRotationMatrix(const Mat3& R) {
  return Quat(Eigen::Quaterniond(R));
}

Quat Quat::exp(const Vec3& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-12) {
    // Second-order expansion keeps exp continuous through zero.
    Eigen::Quaterniond q(1.0 - angle * angle / 8.0, 0.5 * rotvec.x(),
                         0.5 * rotvec.y(), 0.5 * rotvec.z());
    return Quat(q);
  }
  const Vec3 axis = rotvec / angle;
  return fromAxisAngle(axis, angle);
}

Vec3 Quat::log() const {
  Eigen::Quaterniond q = q_;
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  const double vn = q.vec().norm();
  if (vn < 1e-12) {
    return 2.0 * q.vec();
  }
  const double angle = 2.0 * std::atan2(vn, q.w());
  return (angle / vn) * q.vec();
}

Quat Quat::operator*(const Quat& rhs) const {
  return Quat(q_ * rhs.q_);
}

Quat Quat::canonical() const {
  if (q_.w() < 0.0) {
    Eigen::Quaterniond q = q_;
    q.coeffs() = -q.coeffs();
    return Quat(q);
  }
  return *this;
}

double Quat::angleTo(const Quat& other) const {
  return multiplicativeError(*this, other).log().norm();
}

Quat quatMultiply(const Quat& a, const Quat& b) { return a * b; }

Quat quatIntegrate(const Quat& q, const Vec3& omega_body, double dt) {
  if (!(dt > 0.0) || dt > 0.1) {
    throw std::invalid_argument("quatIntegrate: dt must be in (0, 0.1]");
  }
  return q * Quat::exp(omega_body * dt);
}

Quat multiplicativeError(const Quat& q_true, const Quat& q_est) {
  return (q_true.inverse() * q_est).canonical();
}

bool isRotationMatrix(const Mat3& R, double tol) {
  const double ortho = (R.transpose() * R - Mat3::Identity()).norm();
  return ortho < tol && std::abs(R.determinant() - 1.0) < tol;
}

}  // namespace qse
