#pragma once

#include <string>
#include <vector>

#include "lio/manifold.hpp"

namespace lio {

struct TrajectoryPose {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
};

// Ordered (t, position, unit quaternion) rows; timestamps strictly
// increasing.
using TrajectoryEstimate = std::vector<TrajectoryPose>;

// Text format, one row per pose: `t tx ty tz qx qy qz qw`.
void write_trajectory(const TrajectoryEstimate& traj, const std::string& path);
TrajectoryEstimate load_trajectory(const std::string& path);

struct AteResult {
  double rmse = 0.0;        // after rigid SE(3) alignment, no scale
  double end_to_end = 0.0;  // final matched-pose distance after alignment
  int matched_pairs = 0;
};

// Nearest-time matching within 10 ms, then rigid alignment minimizing
// squared position error. Throws StarvationError below 10 matched pairs.
AteResult evaluate_ate(const TrajectoryEstimate& est,
                       const TrajectoryEstimate& gt);

}  // namespace lio
