#pragma once

#include "mspec/nn/params.hpp"

namespace mspec::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment estimates, lazily shaped on the first step.
struct AdamState {
  ParamSet m;
  ParamSet v;
  long step = 0;
};

// Bias-corrected adaptive-moment update, applied in place.
void adam_step(ParamSet& params, const GradSet& grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace mspec::nn
