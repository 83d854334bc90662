#pragma once

#include <utility>

#include "mspec/common/rng.hpp"
#include "mspec/env/types.hpp"
#include "mspec/nn/arch.hpp"
#include "mspec/nn/tape.hpp"

namespace mspec::nn {

// Samples each (BS, band) cell independently from its K-way softmax; the
// joint log-prob is the sum of per-cell log-probs. logits is [n_cells x K]
// (or the 3-D policy shape, interpreted row-wise).
std::pair<env::AllocationAction, double> sample_action(const Tensor& logits,
                                                       const PolicyDims& dims,
                                                       Rng& rng);

// log pi(action | logits) as a differentiable node.
ad::Var action_log_prob(ad::Var logits, const env::AllocationAction& action);

// Sum over cells of the categorical entropy; each cell's entropy is at most
// log K.
ad::Var action_entropy(ad::Var logits);

}  // namespace mspec::nn
