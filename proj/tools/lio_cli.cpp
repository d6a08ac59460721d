#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <vector>

#include "lio/dataset.hpp"
#include "lio/errors.hpp"
#include "lio/runner.hpp"
#include "lio/simulator.hpp"
#include "lio/trajectory.hpp"

namespace fs = std::filesystem;
using namespace lio;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string output_dir = ".";
  std::vector<std::string> overrides;  // key=value
};

void apply_overrides(Config& cfg, const CommonOpts& opts) {
  if (!opts.config_path.empty()) {
    for (const auto& [k, v] : Config::load(opts.config_path).entries()) {
      cfg.set(k, v);
    }
  }
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw FormatError("--set expects key=value, got: " + kv);
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

SensorSpec sensor_spec_from_config(const Config& cfg) {
  SensorSpec spec;
  spec.imu_rate = cfg.get_double("imu_rate", 200.0);
  spec.lidar_rate = cfg.get_double("lidar_rate", 10.0);
  spec.points_per_scan = cfg.get_int("points_per_scan", 2000);
  spec.sigma_range = cfg.get_double("sigma_range", 0.02);
  spec.range_min = cfg.get_double("range_min", 0.5);
  spec.range_max = cfg.get_double("range_max", 120.0);
  spec.imu_noise.sigma_w = cfg.get_double("imu_sigma_w", 1e-3);
  spec.imu_noise.sigma_a = cfg.get_double("imu_sigma_a", 1e-2);
  spec.imu_noise.sigma_bw = cfg.get_double("imu_sigma_bw", 1e-5);
  spec.imu_noise.sigma_ba = cfg.get_double("imu_sigma_ba", 1e-4);
  spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  spec.pattern = cfg.get_string("beam_pattern", "spiral") == "rings"
                     ? BeamPattern::kRings
                     : BeamPattern::kSpiral;
  return spec;
}

void write_metrics(const RunMetrics& m, const std::string& dir) {
  {
    std::ofstream f(fs::path(dir) / "metrics.txt");
    f << std::setprecision(6);
    f << "scans processed:   " << m.scans_processed << "\n";
    if (m.ate_rmse >= 0) {
      f << "ATE RMSE [m]:      " << m.ate_rmse << "\n";
      f << "end-to-end [m]:    " << m.end_to_end << "\n";
    }
    f << "backprops:         " << m.backprop_count << "\n";
    f << "updates skipped:   " << m.updates_skipped << "\n";
    f << "APR mean [m]:      " << m.apr_mean << "\n";
    f << "APR max [m]:       " << m.apr_max << "\n";
    f << "wall ms min/max:   " << m.timing.min_ms << " / " << m.timing.max_ms
      << "\n";
    f << "wall ms mean/med:  " << m.timing.mean_ms << " / "
      << m.timing.median_ms << "\n";
  }
  {
    std::ofstream f(fs::path(dir) / "metrics.dat");
    f << std::setprecision(12);
    f << "ate_rmse=" << m.ate_rmse << " end_to_end=" << m.end_to_end
      << " backprops=" << m.backprop_count << " scans=" << m.scans_processed
      << " updates_skipped=" << m.updates_skipped << " apr_mean=" << m.apr_mean
      << " apr_max=" << m.apr_max << " wall_min_ms=" << m.timing.min_ms
      << " wall_max_ms=" << m.timing.max_ms
      << " wall_mean_ms=" << m.timing.mean_ms
      << " wall_median_ms=" << m.timing.median_ms << "\n";
  }
}

int cmd_simulate(const CommonOpts& opts, const std::string& kind_name,
                 double duration) {
  Config cfg;
  apply_overrides(cfg, opts);
  const TrajectoryKind kind = trajectory_kind_from_string(kind_name);
  const AnalyticTrajectory traj = make_preset_trajectory(kind, duration);

  const Vec3 dims = cfg.get_vec3("room_dims", Vec3(12, 10, 4));
  PlanarEnvironment env = make_box_room(dims);
  if (cfg.get_bool("room_partitions", true)) add_partitions(env, dims);

  const SensorSpec spec = sensor_spec_from_config(cfg);
  fs::create_directories(opts.output_dir);
  const int n = write_dataset(opts.output_dir, traj, env, spec);
  std::cout << "wrote " << n << " scans to " << opts.output_dir << "\n";
  return 0;
}

int cmd_run(const CommonOpts& opts, const std::string& dataset_root) {
  Dataset dataset = load_dataset(dataset_root);
  Config cfg = dataset.meta;
  apply_overrides(cfg, opts);
  const RunParams params = run_params_from_config(cfg);

  const RunOutput out = run(dataset, params);
  fs::create_directories(opts.output_dir);
  write_trajectory(out.trajectory,
                   (fs::path(opts.output_dir) / "trajectory.txt").string());
  write_metrics(out.metrics, opts.output_dir);
  std::ofstream(fs::path(opts.output_dir) / "scan_log.txt") << out.scan_log;

  std::cout << std::setprecision(6);
  if (out.metrics.ate_rmse >= 0) {
    std::cout << "ATE RMSE: " << out.metrics.ate_rmse
              << " m, end-to-end: " << out.metrics.end_to_end << " m\n";
  }
  std::cout << "backprops: " << out.metrics.backprop_count
            << ", mean wall: " << out.metrics.timing.mean_ms << " ms\n";
  return 0;
}

int cmd_eval(const std::string& est_path, const std::string& gt_path) {
  const auto est = load_trajectory(est_path);
  const auto gt = load_trajectory(gt_path);
  const AteResult ate = evaluate_ate(est, gt);
  std::cout << std::setprecision(9) << "ate_rmse=" << ate.rmse
            << " end_to_end=" << ate.end_to_end
            << " matched_pairs=" << ate.matched_pairs << "\n";
  return 0;
}

int cmd_sweep_eta(const CommonOpts& opts, const std::string& dataset_root) {
  Dataset dataset = load_dataset(dataset_root);
  Config base = dataset.meta;
  apply_overrides(base, opts);

  const std::vector<double> multipliers = {0, 0.5, 1, 1.5, 2, 2.5, 3};
  fs::create_directories(opts.output_dir);
  std::ofstream table(fs::path(opts.output_dir) / "sweep_eta.txt");
  table << std::setprecision(6);
  table << "eta_multiplier ate_rmse end_to_end backprops mean_wall_ms\n";
  std::cout << "eta_multiplier ate_rmse end_to_end backprops mean_wall_ms\n";

  for (const double m : multipliers) {
    Config cfg = base;
    std::ostringstream os;
    os << m;
    cfg.set("eta_multiplier", os.str());
    cfg.set("smoothing", "on");
    const RunOutput out = run(dataset, run_params_from_config(cfg));
    std::ostringstream row;
    row << std::setprecision(6) << m << " " << out.metrics.ate_rmse << " "
        << out.metrics.end_to_end << " " << out.metrics.backprop_count << " "
        << out.metrics.timing.mean_ms << "\n";
    table << row.str();
    std::cout << row.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR-inertial odometry with gated intra-frame smoothing"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string dataset_root, kind = "sinusoidal", est_path, gt_path;
  std::string smoothing_flag, seed_flag;
  double duration = 10.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "config file (key = value)");
    sub->add_option("--output-dir", opts.output_dir, "output directory");
    sub->add_option("--set", opts.overrides,
                    "override a config key, key=value (repeatable)");
    sub->add_option("--seed", seed_flag, "random seed override");
    sub->add_option("--smoothing", smoothing_flag,
                    "on|off, overrides the smoothing config key");
  };

  auto* sim = app.add_subcommand("simulate", "write a synthetic dataset");
  sim->add_option("--trajectory", kind,
                  "static|constant-velocity|sinusoidal|aggressive");
  sim->add_option("--duration", duration, "trajectory duration, s");
  add_common(sim);

  auto* runc = app.add_subcommand("run", "dataset -> trajectory + metrics");
  runc->add_option("dataset", dataset_root, "dataset root directory")
      ->required();
  add_common(runc);

  auto* evalc = app.add_subcommand("eval", "compare two trajectory files");
  evalc->add_option("estimate", est_path, "estimated trajectory")->required();
  evalc->add_option("groundtruth", gt_path, "ground-truth trajectory")
      ->required();

  auto* sweep = app.add_subcommand(
      "sweep-eta", "run across eta multipliers {0..3} and tabulate");
  sweep->add_option("dataset", dataset_root, "dataset root directory")
      ->required();
  add_common(sweep);

  CLI11_PARSE(app, argc, argv);

  if (!seed_flag.empty()) opts.overrides.push_back("seed=" + seed_flag);
  if (!smoothing_flag.empty()) {
    opts.overrides.push_back("smoothing=" + smoothing_flag);
  }

  try {
    if (sim->parsed()) return cmd_simulate(opts, kind, duration);
    if (runc->parsed()) return cmd_run(opts, dataset_root);
    if (evalc->parsed()) return cmd_eval(est_path, gt_path);
    if (sweep->parsed()) return cmd_sweep_eta(opts, dataset_root);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
