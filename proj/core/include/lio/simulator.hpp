#pragma once

#include <string>
#include <vector>

#include "lio/propagation.hpp"
#include "lio/random.hpp"
#include "lio/registration.hpp"

namespace lio {

enum class TrajectoryKind {
  kStatic,
  kConstantVelocity,
  kSinusoidal,
  kAggressive,
};

TrajectoryKind trajectory_kind_from_string(const std::string& name);
std::string to_string(TrajectoryKind kind);

struct TrajectoryParams {
  Vec3 p0 = Vec3::Zero();
  Vec3 v0 = Vec3::Zero();        // constant-velocity component
  Vec3 lin_amp = Vec3::Zero();   // m
  Vec3 lin_freq = Vec3::Zero();  // Hz
  Vec3 ang_amp = Vec3::Zero();   // rad, ZYX Euler amplitudes (roll,pitch,yaw)
  Vec3 ang_freq = Vec3::Zero();  // Hz
  Vec3 ang_phase = Vec3::Zero();
  Vec3 lin_phase = Vec3::Zero();
  double duration = 10.0;
};

// Closed-form trajectory: position is p0 + v0 t + lin_amp .* sin(2 pi f t +
// phase); attitude comes from ZYX Euler angles e_i(t) = ang_amp_i *
// sin(2 pi f_i t + phase_i). Velocity, acceleration, and body angular rate
// are exact analytic derivatives, so synthesized IMU is consistent with the
// pose by construction.
class AnalyticTrajectory {
 public:
  AnalyticTrajectory(TrajectoryKind kind, TrajectoryParams params);

  Mat3 rotation(double t) const;
  Vec3 position(double t) const;
  Vec3 velocity(double t) const;
  Vec3 acceleration(double t) const;
  Vec3 angular_velocity_body(double t) const;

  double duration() const { return params_.duration; }
  TrajectoryKind kind() const { return kind_; }
  const TrajectoryParams& params() const { return params_; }

  NavState state_at(double t, const Vec3& gravity) const;

 private:
  void check_domain(double t) const;
  Vec3 euler(double t) const;
  Vec3 euler_rate(double t) const;

  TrajectoryKind kind_;
  TrajectoryParams params_;
};

// Presets for the named kinds; `aggressive` guarantees yaw-rate amplitude
// >= 90 deg/s and linear acceleration amplitude >= 3 m/s^2.
AnalyticTrajectory make_trajectory(TrajectoryKind kind,
                                   TrajectoryParams params);
AnalyticTrajectory make_preset_trajectory(TrajectoryKind kind,
                                          double duration);

// Bounded rectangular plane: corner + two orthogonal edges; normal unit.
struct RectPlane {
  Vec3 corner;
  Vec3 edge_u;  // full edge vectors
  Vec3 edge_v;
  Vec3 normal;
};

struct PlanarEnvironment {
  std::vector<RectPlane> planes;
};

// Axis-aligned box room centered at the origin with inward normals.
PlanarEnvironment make_box_room(const Vec3& dims);
// Adds interior partition walls for richer plane geometry.
void add_partitions(PlanarEnvironment& env, const Vec3& dims);

// First hit of a ray against the environment within [range_min, range_max];
// returns the range or a negative value on miss.
double cast_ray(const PlanarEnvironment& env, const Vec3& origin,
                const Vec3& dir, double range_min, double range_max);

enum class BeamPattern { kSpiral, kRings };

struct SensorSpec {
  double imu_rate = 200.0;
  double lidar_rate = 10.0;
  int points_per_scan = 2000;
  double sigma_range = 0.02;
  double range_min = 0.5;
  double range_max = 120.0;
  NoiseParams imu_noise;
  std::uint64_t seed = 1;
  BeamPattern pattern = BeamPattern::kSpiral;
  Extrinsic extrinsic;
  Vec3 gravity = Vec3(0, 0, -9.81);
};

// IMU measurement stream over [0, duration]: true rates plus random-walk
// bias plus white noise, all from seeded substreams.
std::vector<ImuSample> synth_imu(const AnalyticTrajectory& traj,
                                 const SensorSpec& spec);

// One motion-distorted frame: each beam is cast from the true sensor pose at
// its own timestamp and stored in raw sensor coordinates of that instant.
ScanFrame synth_scan(const AnalyticTrajectory& traj,
                     const PlanarEnvironment& env, const SensorSpec& spec,
                     int scan_index);

}  // namespace lio
