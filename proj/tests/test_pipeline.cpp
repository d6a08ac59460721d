#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "lio/dataset.hpp"
#include "lio/filter.hpp"
#include "lio/runner.hpp"
#include "lio/simulator.hpp"

using namespace lio;
namespace fs = std::filesystem;

namespace {

struct SimScene {
  AnalyticTrajectory traj;
  PlanarEnvironment env;
  SensorSpec spec;
};

SimScene make_scene(TrajectoryKind kind, double duration, double sigma_range,
                    const NoiseParams& imu_noise, std::uint64_t seed) {
  SimScene scene{make_preset_trajectory(kind, duration), {}, {}};
  const Vec3 dims(12, 10, 4);
  scene.env = make_box_room(dims);
  add_partitions(scene.env, dims);
  scene.spec.sigma_range = sigma_range;
  scene.spec.imu_noise = imu_noise;
  scene.spec.seed = seed;
  return scene;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("lio_pipe_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("noiseless deskew against the true chain lands on the planes") {
  const SimScene scene =
      make_scene(TrajectoryKind::kAggressive, 2.0, 0.0, {0, 0, 0, 0}, 1);
  const ScanFrame frame = synth_scan(scene.traj, scene.env, scene.spec, 5);

  // true intra-frame chain: one anchor at every distinct point timestamp,
  // so interpolation reproduces the exact trajectory at each point
  StateChain chain;
  double last_t = frame.t_begin - 1.0;
  for (const auto& pt : frame.points) {
    if (pt.t > last_t) {
      chain.push_back(scene.traj.state_at(pt.t, scene.spec.gravity));
      last_t = pt.t;
    }
  }
  if (last_t < frame.t_end) {
    chain.push_back(scene.traj.state_at(frame.t_end, scene.spec.gravity));
  }

  auto plane_dist = [&](const Vec3& w) {
    double best = 1e9;
    for (const auto& pl : scene.env.planes) {
      best = std::min(best, std::abs(pl.normal.dot(w - pl.corner)));
    }
    return best;
  };

  int within = 0;
  double rms_deskew = 0.0, rms_rigid = 0.0;
  const NavState end = chain.back();
  for (const auto& pt : frame.points) {
    const Vec3 w = deskew_point(pt, chain, scene.spec.extrinsic);
    const double d = plane_dist(w);
    if (d < 1e-9) ++within;
    rms_deskew += d * d;
    // rigid alternative: every point through the scan-end pose
    const Vec3 rigid = end.R * scene.spec.extrinsic.apply(pt.p) + end.p;
    const double dr = plane_dist(rigid);
    rms_rigid += dr * dr;
  }
  rms_deskew = std::sqrt(rms_deskew / frame.points.size());
  rms_rigid = std::sqrt(rms_rigid / frame.points.size());

  CHECK(static_cast<double>(within) / frame.points.size() >= 0.999);
  CHECK(rms_rigid >= 5.0 * std::max(rms_deskew, 1e-6));
}

TEST_CASE("run is deterministic end to end") {
  TempDir dir("det");
  const SimScene scene = make_scene(TrajectoryKind::kSinusoidal, 3.0, 0.02,
                                    NoiseParams{}, 7);
  write_dataset(dir.path.string(), scene.traj, scene.env, scene.spec);
  const Dataset ds = load_dataset(dir.path.string());
  const RunParams params = run_params_from_config(ds.meta);

  const RunOutput a = run(ds, params);
  const RunOutput b = run(ds, params);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK(a.trajectory[i].t == b.trajectory[i].t);
    CHECK((a.trajectory[i].p - b.trajectory[i].p).norm() == 0.0);
    CHECK((a.trajectory[i].q.coeffs() - b.trajectory[i].q.coeffs()).norm() ==
          0.0);
  }
  CHECK(a.metrics.backprop_count == b.metrics.backprop_count);
}

TEST_CASE("eta multiplier zero matches smoothing disabled bit for bit") {
  TempDir dir("eta0");
  const SimScene scene = make_scene(TrajectoryKind::kAggressive, 3.0, 0.02,
                                    NoiseParams{}, 11);
  write_dataset(dir.path.string(), scene.traj, scene.env, scene.spec);
  const Dataset ds = load_dataset(dir.path.string());

  RunParams off = run_params_from_config(ds.meta);
  off.filter.smoothing_enabled = false;
  RunParams zero = run_params_from_config(ds.meta);
  zero.filter.smoothing_enabled = true;
  zero.filter.criteria.eta_multiplier = 0.0;

  const RunOutput a = run(ds, off);
  const RunOutput b = run(ds, zero);
  CHECK(b.metrics.backprop_count == 0);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK((a.trajectory[i].p - b.trajectory[i].p).norm() == 0.0);
    CHECK((a.trajectory[i].q.coeffs() - b.trajectory[i].q.coeffs()).norm() ==
          0.0);
  }
}

TEST_CASE("static scene tracks with small error and full iterations") {
  TempDir dir("static");
  const SimScene scene = make_scene(TrajectoryKind::kStatic, 5.0, 0.02,
                                    NoiseParams{}, 3);
  write_dataset(dir.path.string(), scene.traj, scene.env, scene.spec);
  const Dataset ds = load_dataset(dir.path.string());
  const RunOutput out = run(ds, run_params_from_config(ds.meta));
  CHECK(out.metrics.scans_processed >= 40);
  CHECK(out.metrics.updates_skipped == 0);
  CHECK(out.metrics.ate_rmse >= 0.0);
  CHECK(out.metrics.ate_rmse < 0.05);
}

TEST_CASE("filter state survives a starved frame") {
  // a frame against an empty map must skip the update and keep the prior
  const SimScene scene =
      make_scene(TrajectoryKind::kSinusoidal, 1.0, 0.0, {0, 0, 0, 0}, 5);
  const auto imu = synth_imu(scene.traj, scene.spec);
  const ScanFrame frame = synth_scan(scene.traj, scene.env, scene.spec, 2);

  VoxelMap empty_map;
  FilterConfig cfg;
  Filter filter(cfg);
  const NavState x0 = scene.traj.state_at(frame.t_begin, scene.spec.gravity);
  const Mat18 P0 = Mat18::Identity() * 1e-4;
  const ScanResult res =
      filter.process_scan(x0, P0, imu, frame, empty_map, Extrinsic{});
  CHECK(res.update_skipped);
  CHECK(res.iterations_used == 0);
  // posterior equals the propagated prior (chain end)
  CHECK(res.posterior.t == doctest::Approx(frame.t_end));
}
