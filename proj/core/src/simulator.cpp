#include "lio/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "lio/errors.hpp"

namespace lio {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
}

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
  if (name == "static") return TrajectoryKind::kStatic;
  if (name == "constant-velocity") return TrajectoryKind::kConstantVelocity;
  if (name == "sinusoidal") return TrajectoryKind::kSinusoidal;
  if (name == "aggressive") return TrajectoryKind::kAggressive;
  throw FormatError("unknown trajectory kind: " + name);
}

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kStatic: return "static";
    case TrajectoryKind::kConstantVelocity: return "constant-velocity";
    case TrajectoryKind::kSinusoidal: return "sinusoidal";
    case TrajectoryKind::kAggressive: return "aggressive";
  }
  return "unknown";
}

AnalyticTrajectory::AnalyticTrajectory(TrajectoryKind kind,
                                       TrajectoryParams params)
    : kind_(kind), params_(std::move(params)) {
  if (!(params_.duration > 0)) throw InputError("trajectory duration <= 0");
  if (kind_ == TrajectoryKind::kAggressive) {
    const double yaw_rate =
        params_.ang_amp.z() * kTwoPi * params_.ang_freq.z();
    double max_lin_acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      max_lin_acc = std::max(max_lin_acc,
                             params_.lin_amp(i) * kTwoPi * params_.lin_freq(i) *
                                 kTwoPi * params_.lin_freq(i));
    }
    if (yaw_rate < M_PI / 2.0 || max_lin_acc < 3.0) {
      throw InputError(
          "aggressive preset requires yaw-rate amplitude >= 90 deg/s and "
          "linear acceleration amplitude >= 3 m/s^2");
    }
  }
}

void AnalyticTrajectory::check_domain(double t) const {
  if (t < -1e-9 || t > params_.duration + 1e-9) {
    throw RangeError("trajectory query outside [0, duration]");
  }
}

Vec3 AnalyticTrajectory::euler(double t) const {
  Vec3 e;
  for (int i = 0; i < 3; ++i) {
    e(i) = params_.ang_amp(i) *
           std::sin(kTwoPi * params_.ang_freq(i) * t + params_.ang_phase(i));
  }
  return e;
}

Vec3 AnalyticTrajectory::euler_rate(double t) const {
  Vec3 r;
  for (int i = 0; i < 3; ++i) {
    r(i) = params_.ang_amp(i) * kTwoPi * params_.ang_freq(i) *
           std::cos(kTwoPi * params_.ang_freq(i) * t + params_.ang_phase(i));
  }
  return r;
}

Mat3 AnalyticTrajectory::rotation(double t) const {
  check_domain(t);
  const Vec3 e = euler(t);  // (roll, pitch, yaw), R = Rz Ry Rx
  return (Eigen::AngleAxisd(e.z(), Vec3::UnitZ()) *
          Eigen::AngleAxisd(e.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(e.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

Vec3 AnalyticTrajectory::position(double t) const {
  check_domain(t);
  Vec3 p = params_.p0 + params_.v0 * t;
  for (int i = 0; i < 3; ++i) {
    p(i) += params_.lin_amp(i) *
            std::sin(kTwoPi * params_.lin_freq(i) * t + params_.lin_phase(i));
  }
  return p;
}

Vec3 AnalyticTrajectory::velocity(double t) const {
  check_domain(t);
  Vec3 v = params_.v0;
  for (int i = 0; i < 3; ++i) {
    const double w = kTwoPi * params_.lin_freq(i);
    v(i) += params_.lin_amp(i) * w *
            std::cos(w * t + params_.lin_phase(i));
  }
  return v;
}

Vec3 AnalyticTrajectory::acceleration(double t) const {
  check_domain(t);
  Vec3 a = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    const double w = kTwoPi * params_.lin_freq(i);
    a(i) = -params_.lin_amp(i) * w * w *
           std::sin(w * t + params_.lin_phase(i));
  }
  return a;
}

Vec3 AnalyticTrajectory::angular_velocity_body(double t) const {
  check_domain(t);
  const Vec3 e = euler(t);
  const Vec3 er = euler_rate(t);
  const double roll = e.x(), pitch = e.y();
  const double dr = er.x(), dp = er.y(), dy = er.z();
  // Body rate from ZYX Euler rates.
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  return Vec3(dr - dy * sp,
              dp * cr + dy * cp * sr,
              -dp * sr + dy * cp * cr);
}

NavState AnalyticTrajectory::state_at(double t, const Vec3& gravity) const {
  NavState x;
  x.t = t;
  x.R = rotation(t);
  x.p = position(t);
  x.v = velocity(t);
  x.g = gravity;
  return x;
}

AnalyticTrajectory make_trajectory(TrajectoryKind kind,
                                   TrajectoryParams params) {
  if (kind == TrajectoryKind::kStatic) {
    params.v0.setZero();
    params.lin_amp.setZero();
    params.ang_amp.setZero();
  } else if (kind == TrajectoryKind::kConstantVelocity) {
    params.lin_amp.setZero();
    params.ang_amp.setZero();
  }
  return AnalyticTrajectory(kind, std::move(params));
}

AnalyticTrajectory make_preset_trajectory(TrajectoryKind kind,
                                          double duration) {
  TrajectoryParams p;
  p.duration = duration;
  switch (kind) {
    case TrajectoryKind::kStatic:
      break;
    case TrajectoryKind::kConstantVelocity:
      p.v0 = Vec3(0.5, 0.1, 0.0);
      break;
    case TrajectoryKind::kSinusoidal:
      p.lin_amp = Vec3(0.8, 0.6, 0.2);
      p.lin_freq = Vec3(0.25, 0.2, 0.3);
      p.lin_phase = Vec3(0.0, 1.1, 2.3);
      p.ang_amp = Vec3(0.1, 0.08, 0.3);
      p.ang_freq = Vec3(0.3, 0.25, 0.2);
      p.ang_phase = Vec3(0.5, 1.7, 0.0);
      break;
    case TrajectoryKind::kAggressive:
      // Yaw-rate amplitude 2 pi * 0.45 * 1.0 ~ 162 deg/s; linear
      // acceleration amplitude up to ~5.6 m/s^2.
      p.lin_amp = Vec3(0.9, 0.7, 0.25);
      p.lin_freq = Vec3(0.4, 0.35, 0.5);
      p.lin_phase = Vec3(0.0, 1.3, 2.1);
      p.ang_amp = Vec3(0.18, 0.15, 1.0);
      p.ang_freq = Vec3(0.5, 0.45, 0.45);
      p.ang_phase = Vec3(0.7, 2.0, 0.0);
      break;
  }
  return make_trajectory(kind, std::move(p));
}

PlanarEnvironment make_box_room(const Vec3& dims) {
  if (dims.minCoeff() <= 1.0) throw InputError("box room dims must exceed 1 m");
  PlanarEnvironment env;
  const Vec3 h = 0.5 * dims;
  // Six inward-facing walls.
  auto wall = [&](const Vec3& corner, const Vec3& eu, const Vec3& ev,
                  const Vec3& n) {
    env.planes.push_back({corner, eu, ev, n.normalized()});
  };
  wall(Vec3(h.x(), -h.y(), -h.z()), Vec3(0, dims.y(), 0), Vec3(0, 0, dims.z()),
       Vec3(-1, 0, 0));
  wall(Vec3(-h.x(), -h.y(), -h.z()), Vec3(0, dims.y(), 0),
       Vec3(0, 0, dims.z()), Vec3(1, 0, 0));
  wall(Vec3(-h.x(), h.y(), -h.z()), Vec3(dims.x(), 0, 0), Vec3(0, 0, dims.z()),
       Vec3(0, -1, 0));
  wall(Vec3(-h.x(), -h.y(), -h.z()), Vec3(dims.x(), 0, 0),
       Vec3(0, 0, dims.z()), Vec3(0, 1, 0));
  wall(Vec3(-h.x(), -h.y(), h.z()), Vec3(dims.x(), 0, 0), Vec3(0, dims.y(), 0),
       Vec3(0, 0, -1));
  wall(Vec3(-h.x(), -h.y(), -h.z()), Vec3(dims.x(), 0, 0),
       Vec3(0, dims.y(), 0), Vec3(0, 0, 1));
  return env;
}

void add_partitions(PlanarEnvironment& env, const Vec3& dims) {
  const Vec3 h = 0.5 * dims;
  // Two half-height/half-width interior walls, double-sided.
  const double x0 = 0.3 * h.x();
  env.planes.push_back({Vec3(x0, -h.y(), -h.z()), Vec3(0, 0.6 * dims.y(), 0),
                        Vec3(0, 0, 0.7 * dims.z()), Vec3(-1, 0, 0)});
  env.planes.push_back({Vec3(x0, -h.y(), -h.z()), Vec3(0, 0.6 * dims.y(), 0),
                        Vec3(0, 0, 0.7 * dims.z()), Vec3(1, 0, 0)});
  const double y0 = -0.35 * h.y();
  env.planes.push_back({Vec3(-h.x(), y0, -h.z()), Vec3(0.55 * dims.x(), 0, 0),
                        Vec3(0, 0, 0.6 * dims.z()), Vec3(0, -1, 0)});
  env.planes.push_back({Vec3(-h.x(), y0, -h.z()), Vec3(0.55 * dims.x(), 0, 0),
                        Vec3(0, 0, 0.6 * dims.z()), Vec3(0, 1, 0)});
}

double cast_ray(const PlanarEnvironment& env, const Vec3& origin,
                const Vec3& dir, double range_min, double range_max) {
  double best = -1.0;
  for (const auto& plane : env.planes) {
    const double denom = plane.normal.dot(dir);
    if (std::abs(denom) < 1e-12) continue;
    const double t = plane.normal.dot(plane.corner - origin) / denom;
    if (t < range_min || t > range_max) continue;
    if (best > 0 && t >= best) continue;
    // Inside the bounded rectangle?
    const Vec3 hit = origin + t * dir - plane.corner;
    const double lu2 = plane.edge_u.squaredNorm();
    const double lv2 = plane.edge_v.squaredNorm();
    const double cu = hit.dot(plane.edge_u) / lu2;
    const double cv = hit.dot(plane.edge_v) / lv2;
    if (cu < 0.0 || cu > 1.0 || cv < 0.0 || cv > 1.0) continue;
    best = t;
  }
  return best;
}

std::vector<ImuSample> synth_imu(const AnalyticTrajectory& traj,
                                 const SensorSpec& spec) {
  const double dt = 1.0 / spec.imu_rate;
  const int n = static_cast<int>(std::floor(traj.duration() / dt)) + 1;

  Rng base(spec.seed);
  Rng noise_rng = base.substream(1);
  Rng bias_rng = base.substream(2);

  Vec3 bw = Vec3::Zero();
  Vec3 ba = Vec3::Zero();
  const double nw = spec.imu_noise.sigma_w * std::sqrt(spec.imu_rate);
  const double na = spec.imu_noise.sigma_a * std::sqrt(spec.imu_rate);
  const double nbw = spec.imu_noise.sigma_bw * std::sqrt(dt);
  const double nba = spec.imu_noise.sigma_ba * std::sqrt(dt);

  std::vector<ImuSample> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    const Mat3 r = traj.rotation(t);
    ImuSample s;
    s.t = t;
    s.w = traj.angular_velocity_body(t) + bw;
    s.a = r.transpose() * (traj.acceleration(t) - spec.gravity) + ba;
    for (int i = 0; i < 3; ++i) {
      s.w(i) += nw * noise_rng.normal();
      s.a(i) += na * noise_rng.normal();
      bw(i) += nbw * bias_rng.normal();
      ba(i) += nba * bias_rng.normal();
    }
    out.push_back(s);
  }
  return out;
}

namespace {

// Deterministic Lissajous spiral over a 70 x 77 deg field of view
// (solid-state-like); x is the sensor boresight.
Vec3 spiral_direction(int i, int n) {
  const double u = static_cast<double>(i) / std::max(1, n - 1);
  const double az = 0.6109 * std::sin(kTwoPi * 13.7 * u);
  const double el = 0.6720 * std::sin(kTwoPi * 17.3 * u + 1.0);
  return Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
              std::sin(el));
}

// 16-ring spinning pattern over 360 degrees.
Vec3 ring_direction(int i, int n) {
  const int rings = 16;
  const int per_ring = std::max(1, n / rings);
  const int ring = (i / per_ring) % rings;
  const double el = (-15.0 + 2.0 * ring) * M_PI / 180.0;
  const double az = kTwoPi * (i % per_ring) / per_ring;
  return Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
              std::sin(el));
}

}  // namespace

ScanFrame synth_scan(const AnalyticTrajectory& traj,
                     const PlanarEnvironment& env, const SensorSpec& spec,
                     int scan_index) {
  const double period = 1.0 / spec.lidar_rate;
  ScanFrame frame;
  frame.t_begin = scan_index * period;
  frame.t_end = frame.t_begin + period;
  if (frame.t_end > traj.duration() + 1e-9) {
    throw RangeError("scan window outside trajectory duration");
  }

  Rng base(spec.seed);
  Rng range_rng = base.substream(1000 + static_cast<std::uint64_t>(scan_index));

  const int n = spec.points_per_scan;
  frame.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double t = frame.t_begin + period * i / n;
    const Mat3 r_imu = traj.rotation(t);
    const Vec3 p_imu = traj.position(t);
    // Sensor pose = IMU pose composed with the LiDAR->IMU extrinsic.
    const Mat3 r_sensor = r_imu * spec.extrinsic.R;
    const Vec3 p_sensor = r_imu * spec.extrinsic.t + p_imu;

    const Vec3 d = spec.pattern == BeamPattern::kSpiral
                       ? spiral_direction(i, n)
                       : ring_direction(i, n);
    const Vec3 dw = r_sensor * d;
    const double range =
        cast_ray(env, p_sensor, dw, spec.range_min, spec.range_max);
    if (range < 0) continue;
    const double noise =
        spec.sigma_range > 0 ? spec.sigma_range * range_rng.normal() : 0.0;
    frame.points.push_back({t, (range + noise) * d});
  }
  if (frame.points.size() < 100) {
    throw InputError("scan produced fewer than 100 hits");
  }
  return frame;
}

}  // namespace lio
