#include "lio/registration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lio/errors.hpp"

namespace lio {

NavState interpolate_state(const StateChain& chain, double t) {
  if (chain.empty()) throw RangeError("empty state chain");
  const double eps = 1e-9;
  if (t < chain.front().t - eps || t > chain.back().t + eps) {
    std::ostringstream os;
    os << "t=" << t << " outside chain span [" << chain.front().t << ", "
       << chain.back().t << "]";
    throw RangeError(os.str());
  }
  t = std::clamp(t, chain.front().t, chain.back().t);

  const auto it = std::lower_bound(
      chain.begin(), chain.end(), t,
      [](const NavState& s, double tt) { return s.t < tt; });
  if (it == chain.begin()) return chain.front();
  if (it == chain.end()) return chain.back();

  const NavState& a = *(it - 1);
  const NavState& b = *it;
  if (b.t - a.t < eps) return b;
  const double alpha = (t - a.t) / (b.t - a.t);

  NavState out = a;
  out.t = t;
  out.R = a.R * so3_exp(alpha * so3_log(a.R.transpose() * b.R));
  out.p = (1.0 - alpha) * a.p + alpha * b.p;
  out.v = (1.0 - alpha) * a.v + alpha * b.v;
  return out;
}

Vec3 deskew_point(const LidarPoint& pt, const StateChain& chain,
                  const Extrinsic& ext) {
  const NavState x = interpolate_state(chain, pt.t);
  return x.R * ext.apply(pt.p) + x.p;
}

double point_residual(const Vec3& p_world, const PlaneFit& plane) {
  return plane.u.dot(p_world - plane.q);
}

Eigen::Matrix<double, 1, 18> measurement_jacobian(const NavState& x,
                                                  const Vec3& p_body,
                                                  const Vec3& u) {
  Eigen::Matrix<double, 1, 18> h = Eigen::Matrix<double, 1, 18>::Zero();
  h.segment<3>(kThetaBlock) = -(u.transpose() * x.R * skew(p_body));
  h.segment<3>(kPosBlock) = u;
  return h;
}

double incident_angle(const Vec3& u, const Vec3& beam_dir) {
  const double denom = u.norm() * beam_dir.norm();
  const double c = std::abs(u.dot(beam_dir)) / denom;
  return std::acos(std::clamp(c, 0.0, 1.0));
}

CorrespondenceSet build_correspondences(const ScanFrame& frame,
                                        const VoxelMap& map,
                                        const StateChain& chain,
                                        const Extrinsic& ext,
                                        const RegistrationConfig& cfg) {
  CorrespondenceSet out;
  const int step = std::max(1, cfg.point_filter_num);
  const NavState x_end = chain.back();
  const Mat3 r_end_t = x_end.R.transpose();

  double apr_sum = 0.0;
  for (int i = 0; i < static_cast<int>(frame.points.size()); i += step) {
    const LidarPoint& pt = frame.points[i];
    const NavState x_t = interpolate_state(chain, pt.t);
    const Vec3 p_world = x_t.R * ext.apply(pt.p) + x_t.p;

    Correspondence c;
    c.point_index = i;
    c.p_world = p_world;
    c.p_body = r_end_t * (p_world - x_end.p);

    const auto neighbors = map.knn(p_world, cfg.knn_k);
    if (static_cast<int>(neighbors.size()) < cfg.knn_k) {
      out.correspondences.push_back(c);
      continue;
    }
    const PlaneFit plane = fit_plane(neighbors, cfg.plane_validity_dist);
    if (!plane.valid) {
      out.correspondences.push_back(c);
      continue;
    }

    c.u = plane.u;
    c.q = plane.q;
    c.z = point_residual(p_world, plane);
    if (std::abs(c.z) > cfg.correspondence_reject) {
      out.correspondences.push_back(c);
      continue;
    }

    // Beam direction from the sensor position at this point's timestamp.
    const Vec3 sensor_origin = x_t.R * ext.t + x_t.p;
    c.phi = incident_angle(plane.u, p_world - sensor_origin);
    c.valid = true;
    apr_sum += std::abs(c.z);
    ++out.valid_count;
    out.correspondences.push_back(c);
  }

  if (out.valid_count < cfg.min_matches) {
    std::ostringstream os;
    os << "only " << out.valid_count << " valid correspondences (need "
       << cfg.min_matches << ")";
    throw StarvationError(os.str());
  }
  out.apr = apr_sum / out.valid_count;
  return out;
}

}  // namespace lio
