#pragma once

#include <span>
#include <vector>

#include "lio/manifold.hpp"
#include "lio/voxel_map.hpp"

namespace lio {

struct LidarPoint {
  double t = 0.0;       // absolute timestamp
  Vec3 p = Vec3::Zero();  // sensor-frame coordinates at measurement time
};

struct ScanFrame {
  double t_begin = 0.0;
  double t_end = 0.0;
  std::vector<LidarPoint> points;  // timestamps non-decreasing
};

// LiDAR -> IMU rigid transform, fixed for a run.
struct Extrinsic {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  Vec3 apply(const Vec3& p_lidar) const { return R * p_lidar + t; }
};

struct Correspondence {
  int point_index = -1;
  Vec3 u = Vec3::UnitZ();       // plane unit normal
  Vec3 q = Vec3::Zero();        // plane anchor point
  Vec3 p_body = Vec3::Zero();   // deskewed point, chain-end IMU frame
  Vec3 p_world = Vec3::Zero();
  double z = 0.0;               // signed plane distance
  double phi = 0.0;             // incident angle, [0, pi/2]
  bool valid = false;
};

struct RegistrationConfig {
  int knn_k = 5;
  double plane_validity_dist = 0.1;
  double correspondence_reject = 1.0;
  int point_filter_num = 4;  // keep every Nth point
  int min_matches = 50;
};

// Intra-scan state chain as interpolation support; timestamps strictly
// increasing. Produced from a PriorChain's (possibly smoothed) anchor states.
using StateChain = std::vector<NavState>;

// Piecewise interpolation between bracketing anchors: geodesic on SO(3),
// linear on position/velocity; biases and gravity from the earlier anchor.
NavState interpolate_state(const StateChain& chain, double t);

// World coordinates of a raw point using the state at its own timestamp
// (Eq. of motion compensation; serves both initial deskew and
// re-compensation after smoothing).
Vec3 deskew_point(const LidarPoint& pt, const StateChain& chain,
                  const Extrinsic& ext);

// Signed plane distance u . (p - q).
double point_residual(const Vec3& p_world, const PlaneFit& plane);

// H row of the point-to-plane measurement: dtheta block
// -u^T R skew(p_body), dp block u^T, remaining 12 columns zero. p_body is
// the point expressed in the state's IMU frame.
Eigen::Matrix<double, 1, 18> measurement_jacobian(const NavState& x,
                                                  const Vec3& p_body,
                                                  const Vec3& u);

// Incident angle between the beam direction and the plane normal,
// sign-of-u invariant, in [0, pi/2].
double incident_angle(const Vec3& u, const Vec3& beam_dir);

struct CorrespondenceSet {
  std::vector<Correspondence> correspondences;
  double apr = 0.0;  // mean |z| over valid correspondences
  int valid_count = 0;
};

// Deskews (decimated) frame points against the chain, associates each with
// a fitted local plane from the map and computes residuals and incident
// angles. Throws StarvationError when fewer than min_matches survive.
CorrespondenceSet build_correspondences(const ScanFrame& frame,
                                        const VoxelMap& map,
                                        const StateChain& chain,
                                        const Extrinsic& ext,
                                        const RegistrationConfig& cfg);

}  // namespace lio
