#pragma once

#include <vector>

#include "lio/propagation.hpp"
#include "lio/registration.hpp"

namespace lio {

// Prior chain plus per-anchor smoothed states after backpropagating the
// current update term. The last smoothed state always equals the filter's
// current iterate exactly.
struct SmoothedChain {
  const PriorChain* base = nullptr;
  std::vector<NavState> states;
  int generation = 0;  // iteration index of the update term applied
};

// Per-anchor backward gains; depends only on the prior chain, so it is
// computed once per scan and reused across iterations.
class GainCache {
 public:
  // depth < 0 means full chain. Throws SingularCovarianceError when the end
  // covariance stays ill-conditioned after regularization.
  GainCache(const PriorChain& chain, int depth);

  int first_smoothed() const { return first_; }
  const Mat18& gain(int anchor) const { return gains_.at(anchor - first_); }

 private:
  int first_ = 0;
  std::vector<Mat18> gains_;
};

// G = P_i F_comp^T P_j^{-1}, solved through a symmetric factorization of
// P_j (regularized when near-singular).
Mat18 backward_gain(const Mat18& P_i, const Mat18& F_comp, const Mat18& P_j);

// Smoothed state for every cached anchor: base state boxplus (G_i * d_end),
// where d_end is the iterate-vs-prior update term of the scan-end state.
// Anchors before the cache depth keep their base states.
SmoothedChain backpropagate_chain(const PriorChain& chain,
                                  const GainCache& gains, const Vec18& d_end,
                                  int generation);

// Smoothed scan-begin state; covariance G P_end G^T only when requested.
struct SmoothedBegin {
  NavState state;
  bool has_covariance = false;
  Mat18 P = Mat18::Zero();
};
SmoothedBegin finalize_smoothed(const SmoothedChain& chain,
                                const GainCache& gains, const Mat18& P_end,
                                bool with_covariance);

}  // namespace lio
