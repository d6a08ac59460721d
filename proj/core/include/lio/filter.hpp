#pragma once

#include <Eigen/Cholesky>
#include <optional>
#include <vector>

#include "lio/criteria.hpp"
#include "lio/propagation.hpp"
#include "lio/registration.hpp"
#include "lio/smoother.hpp"
#include "lio/voxel_map.hpp"

namespace lio {

struct FilterConfig {
  int max_iterations = 4;
  double r_scalar = 4e-4;  // per-point measurement variance (sigma^2), m^2
  CriteriaConfig criteria;
  bool smoothing_enabled = true;
  int backprop_depth = -1;  // -1: full chain
  double update_epsilon = 1e-6;  // logged only; iterations are fixed
  NoiseParams noise;
  int anchor_stride = 1;
  RegistrationConfig registration;
};

struct ScanResult {
  NavState posterior;
  Mat18 P = Mat18::Zero();
  double apr_final = 0.0;
  int iterations_used = 0;
  int backprops_used = 0;
  std::vector<double> apr_trace;
  std::vector<GateReason> gate_trace;
  // Final intra-scan chain; the caller deskews the frame against it when
  // merging into the map.
  StateChain final_chain;
  bool update_skipped = false;  // correspondence starvation: state = prior
  double last_update_norm = 0.0;
};

struct UpdateCache {
  Mat18 info;           // H^T R^-1 H + P^-1
  Mat18 p_prior_inv;
  Eigen::LDLT<Mat18> info_ldlt;
};

// One iterated-update step: stacks the valid correspondences into H and z,
// computes the gain in information form (algebraically equal to the
// covariance form, cheaper for many points) and applies the on-manifold
// update with the prior pull-back term.
NavState kalman_update(const NavState& x_prior, const Mat18& P_prior,
                       const NavState& x_iter,
                       const std::vector<Correspondence>& correspondences,
                       const FilterConfig& cfg, UpdateCache& cache);

// Posterior covariance (I - K H) P_prior, evaluated as the inverse of the
// cached information matrix, symmetrized.
Mat18 finalize_covariance(const UpdateCache& cache);

class Filter {
 public:
  explicit Filter(FilterConfig cfg) : cfg_(std::move(cfg)) {}

  // Runs the full per-scan loop: prior chain, iterated registration and
  // update, gated backpropagation with re-compensation, finalize.
  ScanResult process_scan(const NavState& x_prev, const Mat18& P_prev,
                          std::span<const ImuSample> imu,
                          const ScanFrame& frame, const VoxelMap& map,
                          const Extrinsic& ext);

  double prev_frame_apr() const { return prev_frame_apr_; }
  const FilterConfig& config() const { return cfg_; }

 private:
  FilterConfig cfg_;
  double prev_frame_apr_ = kNoPreviousApr;
};

}  // namespace lio
