#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>

namespace qse {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Vec18 = Eigen::Matrix<double, 18, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat18 = Eigen::Matrix<double, 18, 18>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Canonical leg order, used everywhere a per-leg array or a 12-vector appears.
// Joints within a leg are ordered [HAA, HFE, KFE].
enum class Leg : int { LF = 0, RF = 1, LH = 2, RH = 3 };

inline constexpr int kNumLegs = 4;
inline constexpr int kJointsPerLeg = 3;
inline constexpr int kNumJoints = kNumLegs * kJointsPerLeg;

inline constexpr std::array<Leg, kNumLegs> kAllLegs = {Leg::LF, Leg::RF, Leg::LH, Leg::RH};

inline int legIndex(Leg leg) { return static_cast<int>(leg); }

template <typename T>
using PerLeg = std::array<T, kNumLegs>;

}  // namespace qse
