#include "qse/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace qse {
namespace {

constexpr double kRad2Deg = 180.0 / M_PI;

struct Matched {
  std::vector<TimedPose> ref, est;
};

Matched associate(const std::vector<TimedPose>& ref, const std::vector<TimedPose>& est,
                  double tol) {
  Matched m;
  std::size_t j = 0;
  for (const TimedPose& r : ref) {
    while (j < est.size() && est[j].t < r.t - tol) ++j;
    if (j < est.size() && std::abs(est[j].t - r.t) <= tol) {
      m.ref.push_back(r);
      m.est.push_back(est[j]);
      ++j;
    }
  }
  return m;
}

double angleDeg(const Quat& a, const Quat& b) {
  // Vector part of conj(a) * b is exactly zero for bitwise-equal inputs, so
  // identical trajectories score exactly 0.
  const Quat e = quatMultiply(a.conjugate(), b);
  const double vn = std::sqrt(e.x() * e.x() + e.y() * e.y() + e.z() * e.z());
  return 2.0 * std::atan2(vn, std::abs(e.w())) * kRad2Deg;
}

}  // namespace

ErrorStats computeStats(std::vector<double> values) {
  ErrorStats s;
  if (values.empty()) return s;
  double sum = 0.0, sq = 0.0;
  for (double v : values) {
    sum += v;
    sq += v * v;
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(values.size());
  s.rmse = std::sqrt(sq / static_cast<double>(values.size()));
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return s;
}

EvalReport evaluate(const std::vector<TimedPose>& reference,
                    const std::vector<TimedPose>& estimate, const EvalOptions& options) {
  const Matched m = associate(reference, estimate, options.match_tol);
  const int n = static_cast<int>(m.ref.size());
  if (n < 2) {
    throw InsufficientOverlap("only " + std::to_string(n) + " pose pairs matched");
  }

  EvalReport rep;
  rep.matched = n;
  rep.duration = m.ref.back().t - m.ref.front().t;
  rep.estimate_rate = rep.duration > 0 ? (n - 1) / rep.duration : 0.0;

  std::vector<double> pathlen(n, 0.0);
  for (int i = 1; i < n; ++i) {
    pathlen[i] = pathlen[i - 1] + (m.ref[i].pos - m.ref[i - 1].pos).norm();
  }
  rep.path_length = pathlen.back();

  // Least-squares rigid alignment of estimate onto reference; keep the
  // identity when it is no worse, so self-comparison stays exactly zero.
  RigidTransform align;
  if (options.align) {
    MatX src(3, n), dst(3, n);
    for (int i = 0; i < n; ++i) {
      src.col(i) = m.est[i].pos;
      dst.col(i) = m.ref[i].pos;
    }
    const Eigen::Matrix4d T = Eigen::umeyama(src, dst, false);
    RigidTransform cand{T.topLeftCorner<3, 3>(), T.topRightCorner<3, 1>()};
    double err_cand = 0.0, err_id = 0.0;
    for (int i = 0; i < n; ++i) {
      err_cand += (cand.apply(m.est[i].pos) - m.ref[i].pos).squaredNorm();
      err_id += (m.est[i].pos - m.ref[i].pos).squaredNorm();
    }
    if (err_cand < err_id) align = cand;
  }
  rep.alignment = align;
  const bool aligned = (align.R - Mat3::Identity()).cwiseAbs().maxCoeff() > 0.0 ||
                       align.t.cwiseAbs().maxCoeff() > 0.0;
  const Quat align_q = aligned ? Quat::fromRotationMatrix(align.R) : Quat();

  std::vector<double> ate_t(n), ate_r(n);
  std::vector<TimedPose> est_al(m.est);
  for (int i = 0; i < n; ++i) {
    if (aligned) {
      est_al[i].pos = align.apply(m.est[i].pos);
      est_al[i].att = (align_q * m.est[i].att).canonical();
    }
    ate_t[i] = (est_al[i].pos - m.ref[i].pos).norm();
    ate_r[i] = angleDeg(m.ref[i].att, est_al[i].att);
  }
  rep.ate_trans = computeStats(ate_t);
  rep.ate_rot_deg = computeStats(ate_r);

  for (double window : options.rpe_windows) {
    RpeResult r;
    r.window = window;
    std::vector<double> dts, drs;
    int j = 0;
    for (int i = 0; i < n; ++i) {
      if (j < i + 1) j = i + 1;
      while (j < n && pathlen[j] - pathlen[i] < window) ++j;
      if (j >= n) break;

      // Relative motion mismatch over the window, in the frame of pose i.
      const Quat qr_ref = quatMultiply(m.ref[i].att.conjugate(), m.ref[j].att);
      const Quat qr_est = quatMultiply(m.est[i].att.conjugate(), m.est[j].att);
      const Vec3 tr_ref = m.ref[i].att.conjugate().rotate(m.ref[j].pos - m.ref[i].pos);
      const Vec3 tr_est = m.est[i].att.conjugate().rotate(m.est[j].pos - m.est[i].pos);
      dts.push_back((tr_est - tr_ref).norm());
      drs.push_back(angleDeg(qr_ref, qr_est));
    }
    r.count = static_cast<int>(dts.size());
    r.trans = computeStats(std::move(dts));
    r.rot_deg = computeStats(std::move(drs));
    rep.rpe.push_back(r);
  }
  return rep;
}

}  // namespace qse
