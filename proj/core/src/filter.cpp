#include "lio/filter.hpp"

#include <cmath>

#include "lio/errors.hpp"

namespace lio {

NavState kalman_update(const NavState& x_prior, const Mat18& P_prior,
                       const NavState& x_iter,
                       const std::vector<Correspondence>& correspondences,
                       const FilterConfig& cfg, UpdateCache& cache) {
  const double r_inv = 1.0 / cfg.r_scalar;

  // S = H^T R^-1 H, b = H^T R^-1 z, accumulated row by row.
  Mat18 s = Mat18::Zero();
  Vec18 b = Vec18::Zero();
  int rows = 0;
  for (const auto& c : correspondences) {
    if (!c.valid) continue;
    const Eigen::Matrix<double, 1, 18> h =
        measurement_jacobian(x_iter, c.p_body, c.u);
    s.noalias() += h.transpose() * (r_inv * h);
    b.noalias() += h.transpose() * (r_inv * c.z);
    ++rows;
  }
  if (rows < cfg.registration.min_matches) {
    throw StarvationError("too few valid correspondences for update");
  }

  Eigen::LDLT<Mat18> p_ldlt(P_prior);
  if (p_ldlt.info() != Eigen::Success) {
    throw SingularCovarianceError("prior covariance factorization failed");
  }
  cache.p_prior_inv = p_ldlt.solve(Mat18::Identity());
  cache.info = s + cache.p_prior_inv;
  cache.info_ldlt.compute(cache.info);
  if (cache.info_ldlt.info() != Eigen::Success) {
    throw SingularCovarianceError("information matrix factorization failed");
  }

  // Prior pull-back with the right-Jacobian correction on the attitude
  // block: A^-1 = blockdiag(Jr(dtheta), I).
  Vec18 delta = boxminus(x_iter, x_prior);
  Vec18 a_inv_delta = delta;
  a_inv_delta.segment<3>(kThetaBlock) =
      so3_right_jacobian(delta.segment<3>(kThetaBlock)) *
      delta.segment<3>(kThetaBlock);

  // dx = -K z - (I - K H) A^-1 delta
  //    = -info^-1 b - info^-1 P^-1 A^-1 delta
  const Vec18 dx =
      -cache.info_ldlt.solve(b + cache.p_prior_inv * a_inv_delta);
  return boxplus(x_iter, dx);
}

Mat18 finalize_covariance(const UpdateCache& cache) {
  // (I - K H) P = (S + P^-1)^-1 exactly.
  Mat18 p = cache.info_ldlt.solve(Mat18::Identity());
  return 0.5 * (p + p.transpose());
}

ScanResult Filter::process_scan(const NavState& x_prev, const Mat18& P_prev,
                                std::span<const ImuSample> imu,
                                const ScanFrame& frame, const VoxelMap& map,
                                const Extrinsic& ext) {
  PriorChain chain =
      build_prior_chain(x_prev, P_prev, imu, frame.t_begin, frame.t_end,
                        cfg_.anchor_stride, cfg_.noise);
  const NavState x_prior = chain.anchors.back().state;
  const Mat18 P_prior = chain.anchors.back().P;

  auto base_states = [&chain] {
    StateChain s;
    s.reserve(chain.anchors.size());
    for (const auto& a : chain.anchors) s.push_back(a.state);
    return s;
  };

  ScanResult result;
  result.posterior = x_prior;
  result.P = P_prior;
  result.final_chain = base_states();

  // Backward gains depend only on the prior chain; build once per scan.
  // A singular end covariance disables smoothing for this scan.
  std::optional<GainCache> gains;
  if (cfg_.smoothing_enabled) {
    try {
      gains.emplace(chain, cfg_.backprop_depth);
    } catch (const SingularCovarianceError&) {
      gains.reset();
    }
  }

  const double eta = eta_threshold(cfg_.criteria);
  StateChain working = result.final_chain;
  NavState x_iter = x_prior;
  UpdateCache cache;
  bool updated = false;
  bool latched = false;

  for (int j = 0; j < cfg_.max_iterations; ++j) {
    CorrespondenceSet corrs;
    try {
      corrs = build_correspondences(frame, map, working, ext,
                                    cfg_.registration);
    } catch (const StarvationError&) {
      result.update_skipped = true;
      break;
    }
    result.apr_trace.push_back(corrs.apr);

    // The gate is decided on the first registration of the scan and latched:
    // once the compensation is on, later iterations keep refining the same
    // smoothed chain instead of reverting to the rigid one the moment the
    // APR dips under the threshold.
    GateDecision decision{false, GateReason::kPrevNotConverged};
    if (cfg_.smoothing_enabled && gains.has_value()) {
      if (j == 0) {
        decision = gate(prev_frame_apr_, corrs.apr, eta);
        latched = decision.backpropagate;
      } else {
        decision.backpropagate = latched;
        decision.reason = latched ? GateReason::kTriggered
                                  : gate(prev_frame_apr_, corrs.apr, eta).reason;
      }
    }
    result.gate_trace.push_back(decision.reason);

    NavState x_next;
    try {
      x_next = kalman_update(x_prior, P_prior, x_iter, corrs.correspondences,
                             cfg_, cache);
    } catch (const StarvationError&) {
      result.update_skipped = true;
      break;
    }
    result.last_update_norm = boxminus(x_next, x_iter).norm();
    x_iter = x_next;
    updated = true;
    ++result.iterations_used;

    // The update term of the scan-end state, backpropagated through the
    // chain when the gate triggers; otherwise the whole window follows the
    // iterate rigidly (gain = identity at every anchor).
    const Vec18 d_end = boxminus(x_iter, x_prior);
    if (decision.backpropagate) {
      SmoothedChain smoothed = backpropagate_chain(chain, *gains, d_end, j);
      working = std::move(smoothed.states);
      ++result.backprops_used;
    } else {
      working = base_states();
      for (auto& s : working) s = boxplus(s, d_end);
    }
  }

  if (updated) {
    result.posterior = x_iter;
    result.P = finalize_covariance(cache);
    result.final_chain = working;
    // Final APR, after the last update; becomes the gate memory for the
    // next frame.
    try {
      const CorrespondenceSet final_corrs =
          build_correspondences(frame, map, working, ext, cfg_.registration);
      result.apr_final = final_corrs.apr;
      result.apr_trace.push_back(final_corrs.apr);
      prev_frame_apr_ = final_corrs.apr;
    } catch (const StarvationError&) {
      result.apr_final = result.apr_trace.empty() ? 0.0
                                                  : result.apr_trace.back();
      prev_frame_apr_ = kNoPreviousApr;
    }
  } else {
    prev_frame_apr_ = kNoPreviousApr;
  }
  return result;
}

}  // namespace lio
