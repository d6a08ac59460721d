#pragma once

#include <string>

#include "lio/dataset.hpp"
#include "lio/filter.hpp"
#include "lio/trajectory.hpp"

namespace lio {

struct TimingStats {
  double min_ms = 0.0;
  double max_ms = 0.0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
};

struct RunMetrics {
  double ate_rmse = -1.0;  // -1 when no ground truth
  double end_to_end = -1.0;
  TimingStats timing;
  int backprop_count = 0;
  int scans_processed = 0;
  int updates_skipped = 0;
  double apr_mean = 0.0;
  double apr_max = 0.0;
};

struct RunOutput {
  TrajectoryEstimate trajectory;
  RunMetrics metrics;
  // One line per scan: timestamp, iterations, APR trace, gate decisions,
  // wall time.
  std::string scan_log;
};

struct RunParams {
  FilterConfig filter;
  double voxel_edge = 0.5;
  int voxel_cap = 32;
  int map_insert_decimation = 1;
  // init_mode "config": initial state from dataset metadata;
  // "static": gravity/gyro-bias bootstrap from the first stationary window.
  std::string init_mode = "config";
  double bootstrap_window = 0.5;  // s
};

// Builds RunParams from a flat config (dataset metadata overlaid by run
// config overlaid by CLI flags).
RunParams run_params_from_config(const Config& cfg);

// Streams the dataset's frames through the filter: first frame initializes
// the map at the initial pose, the rest are registered and merged. Wall time
// is measured around scan processing only.
RunOutput run(const Dataset& dataset, const RunParams& params);

}  // namespace lio
