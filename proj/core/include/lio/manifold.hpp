#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>

namespace lio {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec18 = Eigen::Matrix<double, 18, 1>;
using Mat18 = Eigen::Matrix<double, 18, 18>;
using Mat18x12 = Eigen::Matrix<double, 18, 12>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

// Error-state block offsets. Order is fixed: attitude, position, velocity,
// gyro bias, accel bias, gravity.
inline constexpr int kThetaBlock = 0;
inline constexpr int kPosBlock = 3;
inline constexpr int kVelBlock = 6;
inline constexpr int kGyroBiasBlock = 9;
inline constexpr int kAccBiasBlock = 12;
inline constexpr int kGravityBlock = 15;

inline constexpr double kSmallAngle = 1e-8;

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  // clang-format off
  m <<     0, -v.z(),  v.y(),
       v.z(),      0, -v.x(),
      -v.y(),  v.x(),      0;
  // clang-format on
  return m;
}

// Rodrigues formula with a 2nd-order series fallback below kSmallAngle.
inline Mat3 so3_exp(const Vec3& phi) {
  const double angle = phi.norm();
  const Mat3 s = skew(phi);
  if (angle < kSmallAngle) {
    return Mat3::Identity() + s + 0.5 * s * s;
  }
  const double c1 = std::sin(angle) / angle;
  const double c2 = (1.0 - std::cos(angle)) / (angle * angle);
  return Mat3::Identity() + c1 * s + c2 * s * s;
}

// Principal logarithm, ||result|| in [0, pi]. Goes through the unit
// quaternion: angle = 2 atan2(|v|, |w|) stays well conditioned at every
// angle, unlike the trace/acos route which loses ~8 digits near pi.
inline Vec3 so3_log(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  // Map to the hemisphere with w >= 0 so the angle lands in [0, pi].
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double nv = q.vec().norm();
  if (nv < kSmallAngle) {
    // phi ~ 2 v / w with w ~ 1
    return 2.0 * q.vec();
  }
  const double angle = 2.0 * std::atan2(nv, q.w());
  return (angle / nv) * q.vec();
}

// Right Jacobian of SO(3): Exp(phi + d) ~ Exp(phi) Exp(Jr(phi) d).
inline Mat3 so3_right_jacobian(const Vec3& phi) {
  const double angle = phi.norm();
  const Mat3 s = skew(phi);
  if (angle < kSmallAngle) {
    return Mat3::Identity() - 0.5 * s + (1.0 / 6.0) * s * s;
  }
  const double a2 = angle * angle;
  const double c1 = (1.0 - std::cos(angle)) / a2;
  const double c2 = (angle - std::sin(angle)) / (a2 * angle);
  return Mat3::Identity() - c1 * s + c2 * s * s;
}

inline Mat3 so3_right_jacobian_inv(const Vec3& phi) {
  const double angle = phi.norm();
  const Mat3 s = skew(phi);
  if (angle < kSmallAngle) {
    return Mat3::Identity() + 0.5 * s + (1.0 / 12.0) * s * s;
  }
  const double c = 1.0 / (angle * angle) -
                   (1.0 + std::cos(angle)) / (2.0 * angle * std::sin(angle));
  return Mat3::Identity() + 0.5 * s + c * s * s;
}

// Full kinematic state at a timestamp. Attitude perturbations are applied on
// the right (body frame): R boxplus dtheta = R * Exp(dtheta).
struct NavState {
  double t = 0.0;
  Mat3 R = Mat3::Identity();  // body -> global
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 bw = Vec3::Zero();
  Vec3 ba = Vec3::Zero();
  Vec3 g = Vec3(0, 0, -9.81);
};

inline NavState boxplus(const NavState& x, const Vec18& d) {
  NavState out = x;
  out.R = x.R * so3_exp(d.segment<3>(kThetaBlock));
  out.p += d.segment<3>(kPosBlock);
  out.v += d.segment<3>(kVelBlock);
  out.bw += d.segment<3>(kGyroBiasBlock);
  out.ba += d.segment<3>(kAccBiasBlock);
  out.g += d.segment<3>(kGravityBlock);
  return out;
}

inline Vec18 boxminus(const NavState& a, const NavState& b) {
  Vec18 d;
  d.segment<3>(kThetaBlock) = so3_log(b.R.transpose() * a.R);
  d.segment<3>(kPosBlock) = a.p - b.p;
  d.segment<3>(kVelBlock) = a.v - b.v;
  d.segment<3>(kGyroBiasBlock) = a.bw - b.bw;
  d.segment<3>(kAccBiasBlock) = a.ba - b.ba;
  d.segment<3>(kGravityBlock) = a.g - b.g;
  return d;
}

}  // namespace lio
