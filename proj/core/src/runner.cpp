#include "lio/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "lio/errors.hpp"

namespace lio {

namespace {

// Initial per-block covariance: attitude, position, velocity, gyro bias,
// accel bias, gravity.
Mat18 default_initial_covariance() {
  Mat18 p = Mat18::Zero();
  const double blocks[6] = {1e-4, 1e-4, 1e-2, 1e-4, 1e-2, 1e-2};
  for (int b = 0; b < 6; ++b) {
    p.block<3, 3>(3 * b, 3 * b) = blocks[b] * Mat3::Identity();
  }
  return p;
}

// Gravity and gyro-bias bootstrap from an initial stationary window:
// bias = mean gyro, g = -mean accel rescaled to 9.81, pose = identity.
NavState bootstrap_static(const std::vector<ImuSample>& imu, double window) {
  if (imu.empty() || imu.back().t - imu.front().t < window) {
    throw InputError("no stationary window for gravity bootstrap");
  }
  Vec3 w_sum = Vec3::Zero(), a_sum = Vec3::Zero();
  int n = 0;
  const double t0 = imu.front().t;
  for (const auto& s : imu) {
    if (s.t - t0 > window) break;
    w_sum += s.w;
    a_sum += s.a;
    ++n;
  }
  const Vec3 w_mean = w_sum / n;
  const Vec3 a_mean = a_sum / n;
  if (w_mean.norm() > 0.05 || std::abs(a_mean.norm() - 9.81) > 1.0) {
    throw InputError(
        "initial window does not look stationary; supply init state via "
        "config");
  }
  NavState x;
  x.t = t0;
  x.bw = w_mean;
  x.g = -a_mean.normalized() * 9.81;
  return x;
}

const char* reason_tag(GateReason r) {
  switch (r) {
    case GateReason::kPrevNotConverged: return "prev";
    case GateReason::kAlreadyConverged: return "conv";
    case GateReason::kTriggered: return "trig";
  }
  return "?";
}

}  // namespace

RunParams run_params_from_config(const Config& cfg) {
  RunParams p;
  p.filter.max_iterations = cfg.get_int("max_iterations", 4);
  p.filter.criteria.sigma =
      cfg.get_double("lidar_range_sigma", cfg.get_double("sigma_range", 0.02));
  p.filter.criteria.eta_multiplier = cfg.get_double("eta_multiplier", 1.5);
  const std::string model = cfg.get_string("residual_model", "paper");
  if (model == "paper") {
    p.filter.criteria.residual_model = ResidualModel::kPaper;
  } else if (model == "half-normal") {
    p.filter.criteria.residual_model = ResidualModel::kHalfNormal;
  } else {
    throw FormatError("residual_model must be `paper` or `half-normal`");
  }
  // Measurement variance floor keeps noiseless synthetic runs well posed.
  const double sigma_r = std::max(p.filter.criteria.sigma, 1e-3);
  p.filter.r_scalar = cfg.get_double("r_scalar", sigma_r * sigma_r);
  p.filter.smoothing_enabled = cfg.get_bool("smoothing", true);
  p.filter.backprop_depth = cfg.get_int("backprop_depth", -1);
  p.filter.anchor_stride = cfg.get_int("anchor_stride", 1);
  p.filter.noise.sigma_w = cfg.get_double("imu_sigma_w", 1e-3);
  p.filter.noise.sigma_a = cfg.get_double("imu_sigma_a", 1e-2);
  p.filter.noise.sigma_bw = cfg.get_double("imu_sigma_bw", 1e-5);
  p.filter.noise.sigma_ba = cfg.get_double("imu_sigma_ba", 1e-4);
  p.filter.registration.knn_k = cfg.get_int("knn_k", 5);
  p.filter.registration.plane_validity_dist =
      cfg.get_double("plane_validity_dist", 0.1);
  p.filter.registration.correspondence_reject =
      cfg.get_double("correspondence_reject", 1.0);
  p.filter.registration.point_filter_num = cfg.get_int("point_filter_num", 4);
  p.filter.registration.min_matches = cfg.get_int("min_matches", 50);
  p.voxel_edge = cfg.get_double("voxel_edge", 0.5);
  p.voxel_cap = cfg.get_int("voxel_cap", 32);
  p.map_insert_decimation = cfg.get_int("map_insert_decimation", 1);
  p.init_mode = cfg.get_string("init_mode", "config");
  p.bootstrap_window = cfg.get_double("bootstrap_window", 0.5);
  return p;
}

RunOutput run(const Dataset& dataset, const RunParams& params) {
  if (dataset.frames.empty()) throw InputError("dataset has no scan frames");

  const Extrinsic ext = extrinsic_from_meta(dataset.meta);
  NavState x = params.init_mode == "static"
                   ? bootstrap_static(dataset.imu, params.bootstrap_window)
                   : initial_state_from_meta(dataset.meta);
  Mat18 P = default_initial_covariance();

  VoxelMap map(params.voxel_edge, params.voxel_cap);
  Filter filter(params.filter);

  RunOutput out;
  std::ostringstream log;
  log << std::setprecision(6);
  std::vector<double> wall_ms;
  double apr_sum = 0.0;
  int apr_n = 0;

  auto insert_frame = [&](const ScanFrame& frame, const StateChain& chain) {
    std::vector<Vec3> pts;
    const int step = std::max(1, params.map_insert_decimation);
    pts.reserve(frame.points.size() / step + 1);
    for (size_t i = 0; i < frame.points.size(); i += step) {
      pts.push_back(deskew_point(frame.points[i], chain, ext));
    }
    map.insert_points(pts);
  };

  auto emit_pose = [&](const NavState& s, double t) {
    TrajectoryPose pose;
    pose.t = t;
    pose.p = s.p;
    pose.q = Eigen::Quaterniond(s.R);
    out.trajectory.push_back(pose);
  };

  bool first = true;
  for (const auto& frame : dataset.frames) {
    if (first) {
      // The first frame seeds the map at the prior pose, no registration.
      PriorChain chain = build_prior_chain(
          x, P, dataset.imu, frame.t_begin, frame.t_end,
          params.filter.anchor_stride, params.filter.noise);
      StateChain states;
      for (const auto& a : chain.anchors) states.push_back(a.state);
      insert_frame(frame, states);
      x = chain.anchors.back().state;
      P = chain.anchors.back().P;
      emit_pose(x, frame.t_end);
      first = false;
      continue;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const ScanResult result =
        filter.process_scan(x, P, dataset.imu, frame, map, ext);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    wall_ms.push_back(ms);

    x = result.posterior;
    P = result.P;
    insert_frame(frame, result.final_chain);
    emit_pose(x, frame.t_end);

    out.metrics.backprop_count += result.backprops_used;
    if (result.update_skipped) ++out.metrics.updates_skipped;
    apr_sum += result.apr_final;
    out.metrics.apr_max = std::max(out.metrics.apr_max, result.apr_final);
    ++apr_n;
    ++out.metrics.scans_processed;

    log << "scan t=" << frame.t_end << " iters=" << result.iterations_used
        << " backprops=" << result.backprops_used << " apr=[";
    for (size_t i = 0; i < result.apr_trace.size(); ++i) {
      log << (i ? " " : "") << result.apr_trace[i];
    }
    log << "] gates=[";
    for (size_t i = 0; i < result.gate_trace.size(); ++i) {
      log << (i ? " " : "") << reason_tag(result.gate_trace[i]);
    }
    log << "]" << (result.update_skipped ? " SKIPPED" : "")
        << " wall_ms=" << ms << "\n";
  }

  if (!wall_ms.empty()) {
    std::vector<double> sorted = wall_ms;
    std::sort(sorted.begin(), sorted.end());
    out.metrics.timing.min_ms = sorted.front();
    out.metrics.timing.max_ms = sorted.back();
    out.metrics.timing.mean_ms =
        std::accumulate(sorted.begin(), sorted.end(), 0.0) / sorted.size();
    out.metrics.timing.median_ms = sorted[sorted.size() / 2];
  }
  if (apr_n > 0) out.metrics.apr_mean = apr_sum / apr_n;

  if (dataset.has_ground_truth) {
    const AteResult ate = evaluate_ate(out.trajectory, dataset.ground_truth);
    out.metrics.ate_rmse = ate.rmse;
    out.metrics.end_to_end = ate.end_to_end;
  }
  out.scan_log = log.str();
  return out;
}

}  // namespace lio
