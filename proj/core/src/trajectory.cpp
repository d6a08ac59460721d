#include "lio/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lio/errors.hpp"

namespace lio {

void write_trajectory(const TrajectoryEstimate& traj,
                      const std::string& path) {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot write trajectory file: " + path);
  f << std::setprecision(9);
  for (const auto& pose : traj) {
    f << std::fixed << std::setprecision(8) << pose.t << std::defaultfloat
      << std::setprecision(9) << ' ' << pose.p.x() << ' ' << pose.p.y() << ' '
      << pose.p.z() << ' ' << pose.q.x() << ' ' << pose.q.y() << ' '
      << pose.q.z() << ' ' << pose.q.w() << '\n';
  }
}

TrajectoryEstimate load_trajectory(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open trajectory file: " + path);
  TrajectoryEstimate out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream is(line);
    TrajectoryPose pose;
    double qx, qy, qz, qw;
    if (!(is >> pose.t >> pose.p.x() >> pose.p.y() >> pose.p.z() >> qx >> qy >>
          qz >> qw)) {
      std::ostringstream os;
      os << path << ":" << lineno << ": expected `t tx ty tz qx qy qz qw`";
      throw FormatError(os.str());
    }
    pose.q = Eigen::Quaterniond(qw, qx, qy, qz);
    if (std::abs(pose.q.norm() - 1.0) > 1e-6) pose.q.normalize();
    if (!out.empty() && pose.t <= out.back().t) {
      std::ostringstream os;
      os << path << ":" << lineno << ": timestamps not strictly increasing";
      throw FormatError(os.str());
    }
    out.push_back(pose);
  }
  return out;
}

AteResult evaluate_ate(const TrajectoryEstimate& est,
                       const TrajectoryEstimate& gt) {
  constexpr double kMatchWindow = 0.010;  // s

  // Nearest-neighbor time association (both inputs time-sorted).
  std::vector<std::pair<int, int>> matches;
  int j = 0;
  for (int i = 0; i < static_cast<int>(est.size()); ++i) {
    while (j + 1 < static_cast<int>(gt.size()) &&
           std::abs(gt[j + 1].t - est[i].t) <= std::abs(gt[j].t - est[i].t)) {
      ++j;
    }
    if (!gt.empty() && std::abs(gt[j].t - est[i].t) <= kMatchWindow) {
      matches.emplace_back(i, j);
    }
  }
  if (matches.size() < 10) {
    std::ostringstream os;
    os << "only " << matches.size() << " matched pose pairs (need 10)";
    throw StarvationError(os.str());
  }

  const int n = static_cast<int>(matches.size());
  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (int k = 0; k < n; ++k) {
    src.col(k) = est[matches[k].first].p;
    dst.col(k) = gt[matches[k].second].p;
  }

  const Eigen::Matrix4d T = Eigen::umeyama(src, dst, /*with_scaling=*/false);
  const Mat3 R = T.topLeftCorner<3, 3>();
  const Vec3 t = T.topRightCorner<3, 1>();

  AteResult res;
  res.matched_pairs = n;
  double sq_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vec3 e = R * src.col(k) + t - dst.col(k);
    sq_sum += e.squaredNorm();
  }
  res.rmse = std::sqrt(sq_sum / n);
  const Vec3 e_last = R * src.col(n - 1) + t - dst.col(n - 1);
  res.end_to_end = e_last.norm();
  return res;
}

}  // namespace lio
