#pragma once

#include <span>
#include <vector>

#include "lio/manifold.hpp"

namespace lio {

struct ImuSample {
  double t = 0.0;
  Vec3 w = Vec3::Zero();  // measured angular rate, rad/s
  Vec3 a = Vec3::Zero();  // measured specific force, m/s^2
};

// Continuous-time noise densities (units per sqrt(Hz)).
struct NoiseParams {
  double sigma_w = 1e-3;
  double sigma_a = 1e-2;
  double sigma_bw = 1e-5;
  double sigma_ba = 1e-4;
};

struct Anchor {
  NavState state;
  Mat18 P = Mat18::Zero();
  Mat18 F_step = Mat18::Identity();  // transition from the previous anchor
  int index = 0;
};

// Ordered anchor states spanning one scan window, with per-step transition
// Jacobians and prior covariances.
struct PriorChain {
  std::vector<Anchor> anchors;
  double t_begin = 0.0;
  double t_end = 0.0;
};

// Largest tolerated IMU integration interval; larger gaps are treated as
// malformed input.
inline constexpr double kMaxImuDt = 0.1;

NavState propagate_mean(const NavState& x, const ImuSample& u, double dt);

// F_p is the Jacobian of (propagate_mean(x boxplus d) boxminus
// propagate_mean(x)) at d = 0; F_n maps the stacked per-sample noise
// (n_w, n_a, n_bw, n_ba) into the error state. Blocks (right perturbation,
// w_hat = w - bw, a_hat = a - ba):
//   dtheta+/dtheta = Exp(-w_hat dt)        dtheta+/dbw = -Jr(w_hat dt) dt
//   dp+/dv = I dt    dp+/dtheta = -R skew(a_hat) dt^2/2
//   dv+/dtheta = -R skew(a_hat) dt         dv+/dba = -R dt   dv+/dg = I dt
void propagate_jacobians(const NavState& x, const ImuSample& u, double dt,
                         Mat18& F_p, Mat18x12& F_n);

// Discrete per-sample noise covariance matching the F_n scaling above:
// diag(sigma^2)/dt, so that F_n Q F_n^T contributes sigma^2 * dt.
Mat12 process_noise(const NoiseParams& np, double dt);

// P+ = F_p P F_p^T + F_n Q F_n^T, symmetrized.
Mat18 propagate_covariance(const Mat18& P, const Mat18& F_p,
                           const Mat18x12& F_n, const Mat12& Q);

// Propagates per IMU sample from x0 (x0.t <= t_begin) and records an anchor
// at t_begin, every `stride` samples inside the window, and at t_end.
// F_step of a recorded anchor is the product of the per-sample Jacobians
// since the previous anchor. Measurements are zero-order held from the
// sample at-or-before each segment.
PriorChain build_prior_chain(const NavState& x0, const Mat18& P0,
                             std::span<const ImuSample> imu, double t_begin,
                             double t_end, int stride, const NoiseParams& np);

// Ordered product of F_step over (i, j]; identity when i == j.
Mat18 compose_transition(const PriorChain& chain, int i, int j);

}  // namespace lio
