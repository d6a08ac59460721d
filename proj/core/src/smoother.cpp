#include "lio/smoother.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "lio/errors.hpp"

namespace lio {

namespace {

// LDLT of P_j with condition guard; regularizes once before giving up.
Eigen::LDLT<Mat18> factorize_guarded(const Mat18& P_j) {
  constexpr double kMaxCondition = 1e12;
  auto condition_of = [](const Eigen::LDLT<Mat18>& ldlt) {
    const auto d = ldlt.vectorD();
    const double dmax = d.maxCoeff();
    const double dmin = d.minCoeff();
    if (dmin <= 0.0) return std::numeric_limits<double>::infinity();
    return dmax / dmin;
  };

  Eigen::LDLT<Mat18> ldlt(P_j);
  if (ldlt.info() == Eigen::Success && condition_of(ldlt) < kMaxCondition) {
    return ldlt;
  }
  const double reg = 1e-12 * P_j.trace() / 18.0;
  Mat18 regularized = P_j + reg * Mat18::Identity();
  ldlt.compute(regularized);
  if (ldlt.info() != Eigen::Success || !(condition_of(ldlt) < kMaxCondition)) {
    throw SingularCovarianceError(
        "scan-end prior covariance is numerically singular");
  }
  return ldlt;
}

Mat18 gain_from_factor(const Mat18& P_i, const Mat18& F_comp,
                       const Eigen::LDLT<Mat18>& ldlt_j) {
  // G = P_i F^T P_j^{-1}  =>  G^T = P_j^{-1} F P_i  (P symmetric)
  Mat18 rhs = F_comp * P_i;
  Mat18 gt = ldlt_j.solve(rhs);
  return gt.transpose();
}

}  // namespace

Mat18 backward_gain(const Mat18& P_i, const Mat18& F_comp, const Mat18& P_j) {
  return gain_from_factor(P_i, F_comp, factorize_guarded(P_j));
}

GainCache::GainCache(const PriorChain& chain, int depth) {
  const int n = static_cast<int>(chain.anchors.size());
  const int end = n - 1;
  first_ = depth < 0 ? 0 : std::max(0, end - depth);

  const auto ldlt_end = factorize_guarded(chain.anchors[end].P);
  gains_.reserve(end - first_ + 1);
  Mat18 f_comp = Mat18::Identity();
  // Build composed transitions walking backward from the end anchor.
  std::vector<Mat18> comps(end - first_ + 1);
  comps[end - first_] = Mat18::Identity();
  for (int i = end - 1; i >= first_; --i) {
    f_comp = f_comp * chain.anchors[i + 1].F_step;
    comps[i - first_] = f_comp;
  }
  for (int i = first_; i <= end; ++i) {
    if (i == end) {
      gains_.push_back(Mat18::Identity());
    } else {
      gains_.push_back(
          gain_from_factor(chain.anchors[i].P, comps[i - first_], ldlt_end));
    }
  }
}

SmoothedChain backpropagate_chain(const PriorChain& chain,
                                  const GainCache& gains, const Vec18& d_end,
                                  int generation) {
  SmoothedChain out;
  out.base = &chain;
  out.generation = generation;
  const int n = static_cast<int>(chain.anchors.size());
  out.states.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (i < gains.first_smoothed()) {
      out.states.push_back(chain.anchors[i].state);
    } else {
      out.states.push_back(
          boxplus(chain.anchors[i].state, gains.gain(i) * d_end));
    }
  }
  return out;
}

SmoothedBegin finalize_smoothed(const SmoothedChain& chain,
                                const GainCache& gains, const Mat18& P_end,
                                bool with_covariance) {
  SmoothedBegin out;
  out.state = chain.states.front();
  if (with_covariance) {
    const Mat18& g = gains.gain(gains.first_smoothed());
    Mat18 p = g * P_end * g.transpose();
    out.P = 0.5 * (p + p.transpose());
    out.has_covariance = true;
  }
  return out;
}

}  // namespace lio
