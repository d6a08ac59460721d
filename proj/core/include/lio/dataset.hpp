#pragma once

#include <string>
#include <vector>

#include "lio/config.hpp"
#include "lio/propagation.hpp"
#include "lio/registration.hpp"
#include "lio/simulator.hpp"
#include "lio/trajectory.hpp"

namespace lio {

// On-disk layout under one root directory:
//   dataset.cfg   rates, sigma_range, extrinsic, initial state
//   imu.txt       one record per line: t wx wy wz ax ay az
//   scans/<t>.txt one file per frame, records: t x y z (sensor frame)
//   gt.txt        ground-truth trajectory (optional)
struct Dataset {
  Config meta;
  std::vector<ImuSample> imu;
  std::vector<ScanFrame> frames;  // timestamp order
  TrajectoryEstimate ground_truth;
  bool has_ground_truth = false;
};

// Generates and writes a complete synthetic dataset; returns the number of
// scan frames written.
int write_dataset(const std::string& root, const AnalyticTrajectory& traj,
                  const PlanarEnvironment& env, const SensorSpec& spec);

// Validates formats and invariants; frames are delivered in timestamp order
// regardless of directory order. Range filtering uses the config keys
// range_min / range_max.
Dataset load_dataset(const std::string& root);

Extrinsic extrinsic_from_meta(const Config& meta);
NavState initial_state_from_meta(const Config& meta);

}  // namespace lio
