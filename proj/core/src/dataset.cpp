#include "lio/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lio/errors.hpp"

namespace fs = std::filesystem;

namespace lio {

namespace {

std::string vec3_str(const Vec3& v) {
  std::ostringstream os;
  os << std::setprecision(17) << v.x() << ' ' << v.y() << ' ' << v.z();
  return os.str();
}

std::string quat_str(const Eigen::Quaterniond& q) {
  std::ostringstream os;
  os << std::setprecision(17) << q.x() << ' ' << q.y() << ' ' << q.z() << ' '
     << q.w();
  return os.str();
}

Eigen::Quaterniond quat_from_config(const Config& cfg, const std::string& key) {
  std::istringstream is(cfg.get_string(key, "0 0 0 1"));
  double x, y, z, w;
  if (!(is >> x >> y >> z >> w)) {
    throw FormatError("config key `" + key + "` is not a quaternion");
  }
  Eigen::Quaterniond q(w, x, y, z);
  q.normalize();
  return q;
}

}  // namespace

int write_dataset(const std::string& root, const AnalyticTrajectory& traj,
                  const PlanarEnvironment& env, const SensorSpec& spec) {
  fs::create_directories(fs::path(root) / "scans");

  // IMU stream.
  const auto imu = synth_imu(traj, spec);
  {
    std::ofstream f(fs::path(root) / "imu.txt");
    if (!f) throw FormatError("cannot write imu.txt under " + root);
    f << std::setprecision(17);
    for (const auto& s : imu) {
      f << s.t << ' ' << s.w.x() << ' ' << s.w.y() << ' ' << s.w.z() << ' '
        << s.a.x() << ' ' << s.a.y() << ' ' << s.a.z() << '\n';
    }
  }

  // Scans, one file per frame named by begin timestamp.
  const int n_scans =
      static_cast<int>(std::floor(traj.duration() * spec.lidar_rate + 1e-9));
  for (int k = 0; k < n_scans; ++k) {
    const ScanFrame frame = synth_scan(traj, env, spec, k);
    std::ostringstream name;
    name << std::fixed << std::setprecision(6) << frame.t_begin << ".txt";
    std::ofstream f(fs::path(root) / "scans" / name.str());
    if (!f) throw FormatError("cannot write scan file under " + root);
    f << std::setprecision(17);
    for (const auto& pt : frame.points) {
      f << pt.t << ' ' << pt.p.x() << ' ' << pt.p.y() << ' ' << pt.p.z()
        << '\n';
    }
  }

  // Ground truth at the LiDAR rate, stamped at scan ends.
  TrajectoryEstimate gt;
  for (int k = 0; k <= n_scans; ++k) {
    const double t = k / spec.lidar_rate;
    TrajectoryPose pose;
    pose.t = t;
    pose.p = traj.position(t);
    pose.q = Eigen::Quaterniond(traj.rotation(t));
    gt.push_back(pose);
  }
  write_trajectory(gt, (fs::path(root) / "gt.txt").string());

  // Metadata incl. the true initial state so runs need no bootstrap.
  Config meta;
  meta.set("imu_rate", std::to_string(spec.imu_rate));
  meta.set("lidar_rate", std::to_string(spec.lidar_rate));
  meta.set("sigma_range", std::to_string(spec.sigma_range));
  meta.set("range_min", std::to_string(spec.range_min));
  meta.set("range_max", std::to_string(spec.range_max));
  meta.set("trajectory", to_string(traj.kind()));
  meta.set("extrinsic_quat", quat_str(Eigen::Quaterniond(spec.extrinsic.R)));
  meta.set("extrinsic_trans", vec3_str(spec.extrinsic.t));
  meta.set("gravity", vec3_str(spec.gravity));
  meta.set("init_quat", quat_str(Eigen::Quaterniond(traj.rotation(0.0))));
  meta.set("init_pos", vec3_str(traj.position(0.0)));
  meta.set("init_vel", vec3_str(traj.velocity(0.0)));
  meta.set("imu_sigma_w", std::to_string(spec.imu_noise.sigma_w));
  meta.set("imu_sigma_a", std::to_string(spec.imu_noise.sigma_a));
  meta.set("imu_sigma_bw", std::to_string(spec.imu_noise.sigma_bw));
  meta.set("imu_sigma_ba", std::to_string(spec.imu_noise.sigma_ba));
  meta.set("seed", std::to_string(spec.seed));
  meta.save((fs::path(root) / "dataset.cfg").string());
  return n_scans;
}

Dataset load_dataset(const std::string& root) {
  Dataset ds;
  const fs::path base(root);
  if (fs::exists(base / "dataset.cfg")) {
    ds.meta = Config::load((base / "dataset.cfg").string());
  }
  const double lidar_rate = ds.meta.get_double("lidar_rate", 10.0);
  const double range_min = ds.meta.get_double("range_min", 0.5);
  const double range_max = ds.meta.get_double("range_max", 120.0);

  // IMU stream.
  {
    std::ifstream f(base / "imu.txt");
    if (!f) throw InputError("cannot open imu.txt under " + root);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream is(line);
      ImuSample s;
      if (!(is >> s.t >> s.w.x() >> s.w.y() >> s.w.z() >> s.a.x() >> s.a.y() >>
            s.a.z())) {
        std::ostringstream os;
        os << "imu.txt:" << lineno << ": expected `t wx wy wz ax ay az`";
        throw FormatError(os.str());
      }
      if (!ds.imu.empty() && s.t <= ds.imu.back().t) {
        std::ostringstream os;
        os << "imu.txt:" << lineno << ": timestamps not increasing";
        throw FormatError(os.str());
      }
      ds.imu.push_back(s);
    }
  }
  for (size_t k = 1; k < ds.imu.size(); ++k) {
    const double gap = ds.imu[k].t - ds.imu[k - 1].t;
    if (gap > kMaxImuDt) {
      std::ostringstream os;
      os << "IMU clock coverage gap of " << gap << " s between t="
         << ds.imu[k - 1].t << " and t=" << ds.imu[k].t;
      throw InputError(os.str());
    }
  }

  // Scan frames, sorted by timestamp regardless of directory order.
  const fs::path scan_dir = base / "scans";
  if (!fs::exists(scan_dir)) throw InputError("missing scans/ under " + root);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(scan_dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  const double period = 1.0 / lidar_rate;
  for (const auto& file : files) {
    std::ifstream f(file);
    ScanFrame frame;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream is(line);
      LidarPoint pt;
      if (!(is >> pt.t >> pt.p.x() >> pt.p.y() >> pt.p.z())) {
        std::ostringstream os;
        os << file.filename().string() << ":" << lineno
           << ": expected `t x y z`";
        throw FormatError(os.str());
      }
      if (!frame.points.empty() && pt.t < frame.points.back().t) {
        std::ostringstream os;
        os << file.filename().string() << ":" << lineno
           << ": point timestamps decreasing";
        throw FormatError(os.str());
      }
      const double range = pt.p.norm();
      if (range < range_min || range > range_max) continue;
      frame.points.push_back(pt);
    }
    if (frame.points.empty()) continue;
    frame.t_begin = std::stod(file.stem().string());
    frame.t_end = frame.t_begin + period;
    ds.frames.push_back(std::move(frame));
  }
  std::sort(ds.frames.begin(), ds.frames.end(),
            [](const ScanFrame& a, const ScanFrame& b) {
              return a.t_begin < b.t_begin;
            });

  // Every scan window must be covered by the IMU clock.
  for (const auto& frame : ds.frames) {
    if (ds.imu.empty() || ds.imu.front().t > frame.t_begin ||
        ds.imu.back().t < frame.t_end) {
      std::ostringstream os;
      os << "IMU does not cover scan window [" << frame.t_begin << ", "
         << frame.t_end << "]";
      throw InputError(os.str());
    }
  }

  if (fs::exists(base / "gt.txt")) {
    ds.ground_truth = load_trajectory((base / "gt.txt").string());
    ds.has_ground_truth = true;
  }
  return ds;
}

Extrinsic extrinsic_from_meta(const Config& meta) {
  Extrinsic ext;
  ext.R = quat_from_config(meta, "extrinsic_quat").toRotationMatrix();
  ext.t = meta.get_vec3("extrinsic_trans", Vec3::Zero());
  return ext;
}

NavState initial_state_from_meta(const Config& meta) {
  NavState x;
  x.t = 0.0;
  x.R = quat_from_config(meta, "init_quat").toRotationMatrix();
  x.p = meta.get_vec3("init_pos", Vec3::Zero());
  x.v = meta.get_vec3("init_vel", Vec3::Zero());
  x.g = meta.get_vec3("gravity", Vec3(0, 0, -9.81));
  return x;
}

}  // namespace lio
