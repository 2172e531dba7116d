// Trajectory accuracy metrics.
//
// Estimate and reference poses are associated by timestamp.  Absolute error
// is computed after an optional SE(3) alignment of the estimate onto the
// reference (least-squares over matched positions, no scale); when the
// identity already fits at least as well, it is used unchanged, so comparing
// a trajectory against itself reports exactly zero.  Relative error is
// computed over windows spanning a fixed reference path length, stepping one
// pose at a time.  All statistics are reported as mean/median/RMSE/max,
// translations in metres and rotations in degrees.

#pragma once

#include <stdexcept>
#include <vector>

#include "qse/log.hpp"
#include "qse/so3.hpp"

namespace qse {

// Trajectories share too few matched timestamps to evaluate.
class InsufficientOverlap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ErrorStats {
  double mean = 0.0;
  double median = 0.0;
  double rmse = 0.0;
  double max = 0.0;
};

struct EvalOptions {
  bool align = true;                          // SE(3) alignment before ATE
  std::vector<double> rpe_windows = {1.0, 10.0};  // metres of reference path
  double match_tol = 1e-6;                    // s, timestamp association
};

struct RpeResult {
  double window = 0.0;     // m
  int count = 0;           // evaluated window pairs
  ErrorStats trans;        // m
  ErrorStats rot_deg;
};

struct EvalReport {
  int matched = 0;
  double duration = 0.0;       // s covered by matched poses
  double path_length = 0.0;    // m of reference path
  double estimate_rate = 0.0;  // matched poses per second
  ErrorStats ate_trans;        // m
  ErrorStats ate_rot_deg;
  std::vector<RpeResult> rpe;
  RigidTransform alignment;    // applied to the estimate
};

// Throws InsufficientOverlap when fewer than two pose pairs match.
EvalReport evaluate(const std::vector<TimedPose>& reference,
                    const std::vector<TimedPose>& estimate, const EvalOptions& options = {});

ErrorStats computeStats(std::vector<double> values);

}  // namespace qse
