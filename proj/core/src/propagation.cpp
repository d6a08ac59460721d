#include "lio/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lio/errors.hpp"

namespace lio {

namespace {

void check_dt(double t0, double dt) {
  if (!(dt > 0.0) || dt > kMaxImuDt) {
    std::ostringstream os;
    os << "bad IMU integration interval dt=" << dt << " starting at t=" << t0;
    throw InputError(os.str());
  }
}

}  // namespace

NavState propagate_mean(const NavState& x, const ImuSample& u, double dt) {
  check_dt(x.t, dt);
  const Vec3 w_hat = u.w - x.bw;
  const Vec3 a_hat = u.a - x.ba;
  const Vec3 acc = x.R * a_hat + x.g;  // global acceleration

  NavState out = x;
  out.t = x.t + dt;
  out.R = x.R * so3_exp(w_hat * dt);
  out.p = x.p + x.v * dt + 0.5 * acc * dt * dt;
  out.v = x.v + acc * dt;
  return out;
}

void propagate_jacobians(const NavState& x, const ImuSample& u, double dt,
                         Mat18& F_p, Mat18x12& F_n) {
  check_dt(x.t, dt);
  const Vec3 w_hat = u.w - x.bw;
  const Vec3 a_hat = u.a - x.ba;
  const Mat3 I3 = Mat3::Identity();
  const Mat3 jr = so3_right_jacobian(w_hat * dt);
  const Mat3 r_skew_a = x.R * skew(a_hat);

  F_p.setIdentity();
  F_p.block<3, 3>(kThetaBlock, kThetaBlock) = so3_exp(-w_hat * dt);
  F_p.block<3, 3>(kThetaBlock, kGyroBiasBlock) = -jr * dt;
  F_p.block<3, 3>(kPosBlock, kThetaBlock) = -r_skew_a * (0.5 * dt * dt);
  F_p.block<3, 3>(kPosBlock, kVelBlock) = I3 * dt;
  F_p.block<3, 3>(kPosBlock, kAccBiasBlock) = -x.R * (0.5 * dt * dt);
  F_p.block<3, 3>(kPosBlock, kGravityBlock) = I3 * (0.5 * dt * dt);
  F_p.block<3, 3>(kVelBlock, kThetaBlock) = -r_skew_a * dt;
  F_p.block<3, 3>(kVelBlock, kAccBiasBlock) = -x.R * dt;
  F_p.block<3, 3>(kVelBlock, kGravityBlock) = I3 * dt;

  // Noise order: n_w, n_a, n_bw, n_ba.
  F_n.setZero();
  F_n.block<3, 3>(kThetaBlock, 0) = -jr * dt;
  F_n.block<3, 3>(kPosBlock, 3) = -x.R * (0.5 * dt * dt);
  F_n.block<3, 3>(kVelBlock, 3) = -x.R * dt;
  F_n.block<3, 3>(kGyroBiasBlock, 6) = I3 * dt;
  F_n.block<3, 3>(kAccBiasBlock, 9) = I3 * dt;
}

Mat12 process_noise(const NoiseParams& np, double dt) {
  Mat12 q = Mat12::Zero();
  q.diagonal().segment<3>(0).setConstant(np.sigma_w * np.sigma_w / dt);
  q.diagonal().segment<3>(3).setConstant(np.sigma_a * np.sigma_a / dt);
  q.diagonal().segment<3>(6).setConstant(np.sigma_bw * np.sigma_bw / dt);
  q.diagonal().segment<3>(9).setConstant(np.sigma_ba * np.sigma_ba / dt);
  return q;
}

Mat18 propagate_covariance(const Mat18& P, const Mat18& F_p,
                           const Mat18x12& F_n, const Mat12& Q) {
  Mat18 out = F_p * P * F_p.transpose() + F_n * Q * F_n.transpose();
  return 0.5 * (out + out.transpose());
}

PriorChain build_prior_chain(const NavState& x0, const Mat18& P0,
                             std::span<const ImuSample> imu, double t_begin,
                             double t_end, int stride, const NoiseParams& np) {
  if (stride < 1) throw InputError("anchor stride must be >= 1");
  if (!(t_begin < t_end)) throw InputError("empty scan window");
  if (x0.t > t_begin + 1e-12)
    throw InputError("initial state is later than the window begin");
  if (imu.empty() || imu.front().t > t_begin || imu.back().t < t_end) {
    std::ostringstream os;
    os << "IMU stream does not bracket window [" << t_begin << ", " << t_end
       << "]";
    throw InputError(os.str());
  }
  for (size_t k = 1; k < imu.size(); ++k) {
    if (imu[k].t - imu[k - 1].t > kMaxImuDt) {
      std::ostringstream os;
      os << "IMU gap of " << imu[k].t - imu[k - 1].t << " s between t="
         << imu[k - 1].t << " and t=" << imu[k].t;
      throw InputError(os.str());
    }
  }

  // Segment boundaries: t_begin, the sample times strictly inside the
  // window, t_end. The measurement over each segment is the sample
  // at-or-before the segment start (zero-order hold).
  std::vector<double> times;
  times.push_back(t_begin);
  for (const auto& s : imu) {
    if (s.t > t_begin + 1e-12 && s.t < t_end - 1e-12) times.push_back(s.t);
  }
  times.push_back(t_end);

  PriorChain chain;
  chain.t_begin = t_begin;
  chain.t_end = t_end;

  NavState x = x0;
  Mat18 P = P0;
  size_t next = 0;  // first sample with t > x.t

  auto hold_sample = [&](double t) -> const ImuSample& {
    while (next < imu.size() && imu[next].t <= t + 1e-12) ++next;
    return imu[next == 0 ? 0 : next - 1];
  };

  auto step_to = [&](double t, Mat18& f_accum) {
    const double dt = t - x.t;
    if (dt <= 1e-12) {
      x.t = t;
      return;
    }
    const ImuSample& u = hold_sample(x.t);
    Mat18 fp;
    Mat18x12 fn;
    propagate_jacobians(x, u, dt, fp, fn);
    P = propagate_covariance(P, fp, fn, process_noise(np, dt));
    x = propagate_mean(x, u, dt);
    f_accum = fp * f_accum;
  };

  Mat18 f_accum = Mat18::Identity();
  step_to(t_begin, f_accum);

  auto record = [&](const Mat18& f_step) {
    Anchor a;
    a.state = x;
    a.P = P;
    a.F_step = chain.anchors.empty() ? Mat18::Identity() : f_step;
    a.index = static_cast<int>(chain.anchors.size());
    chain.anchors.push_back(std::move(a));
  };

  record(Mat18::Identity());
  f_accum.setIdentity();
  int since_anchor = 0;
  for (size_t i = 1; i < times.size(); ++i) {
    step_to(times[i], f_accum);
    ++since_anchor;
    const bool last = (i + 1 == times.size());
    if (last || since_anchor >= stride) {
      record(f_accum);
      f_accum.setIdentity();
      since_anchor = 0;
    }
  }
  return chain;
}

Mat18 compose_transition(const PriorChain& chain, int i, int j) {
  const int n = static_cast<int>(chain.anchors.size());
  if (i > j || i < 0 || j >= n) throw RangeError("bad anchor index pair");
  Mat18 f = Mat18::Identity();
  for (int k = i + 1; k <= j; ++k) f = chain.anchors[k].F_step * f;
  return f;
}

}  // namespace lio
