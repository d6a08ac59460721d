#pragma once

#include <cmath>
#include <limits>

namespace lio {

enum class ResidualModel {
  kPaper,       // sigma_t = 2 sigma / pi
  kHalfNormal,  // sigma_t = sigma sqrt(2/pi) * 2/pi
};

struct CriteriaConfig {
  double sigma = 0.02;          // LiDAR ranging standard deviation, m
  double eta_multiplier = 1.5;  // eta = multiplier * sigma_t
  ResidualModel residual_model = ResidualModel::kPaper;
};

// Analytic expectation of the average point-to-plane residual under the
// ranging-noise model with uniformly distributed incident angle. The paper
// model takes the perpendicular residual mean as sigma; the half-normal
// model uses E|N(0, sigma^2)| = sigma sqrt(2/pi).
inline double expected_apr(const CriteriaConfig& cfg) {
  switch (cfg.residual_model) {
    case ResidualModel::kHalfNormal:
      return cfg.sigma * std::sqrt(2.0 / M_PI) * (2.0 / M_PI);
    case ResidualModel::kPaper:
    default:
      return 2.0 * cfg.sigma / M_PI;
  }
}

inline double eta_threshold(const CriteriaConfig& cfg) {
  return cfg.eta_multiplier * expected_apr(cfg);
}

enum class GateReason {
  kPrevNotConverged,
  kAlreadyConverged,
  kTriggered,
};

struct GateDecision {
  bool backpropagate = false;
  GateReason reason = GateReason::kPrevNotConverged;
};

// Sentinel for "no previous frame"; gates as not-converged.
inline constexpr double kNoPreviousApr = std::numeric_limits<double>::infinity();

// Backpropagation is allowed only when the previous frame converged
// (prev_apr < eta) while the current registration has not (curr_apr >= eta).
inline GateDecision gate(double prev_apr, double curr_apr, double eta) {
  if (!(prev_apr < eta)) return {false, GateReason::kPrevNotConverged};
  if (curr_apr < eta) return {false, GateReason::kAlreadyConverged};
  return {true, GateReason::kTriggered};
}

}  // namespace lio
