// Covariance hygiene shared by the filters: symmetrization after every
// update, and an eigenvalue clamp used only when roundoff has driven a
// covariance indefinite.  Internal, not installed.

#pragma once

#include <Eigen/Dense>

namespace qse::detail {

template <typename Mat>
void symmetrize(Mat& P) {
  P = ((P + P.transpose()) * 0.5).eval();
}

// Returns true (and repairs P) iff P had a negative eigenvalue.  Eigenvalues
// are clamped from below at `floor`.
template <typename Mat>
bool projectPSD(Mat& P, double floor = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(P);
  if (eig.eigenvalues().minCoeff() >= 0.0) return false;
  auto d = eig.eigenvalues();
  for (int i = 0; i < d.size(); ++i) d[i] = std::max(d[i], floor);
  P = eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
  symmetrize(P);
  return true;
}

}  // namespace qse::detail
