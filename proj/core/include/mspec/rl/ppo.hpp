#pragma once

#include <vector>

#include "mspec/nn/adam.hpp"
#include "mspec/rl/gae.hpp"
#include "mspec/rl/loss.hpp"
#include "mspec/rl/trajectory.hpp"

namespace mspec::rl {

struct PpoConfig {
  double clip_epsilon = 0.2;
  int epochs_per_batch = 4;
  int minibatch_size = 2;  // counted in trajectories (recurrent replay)
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double value_coeff = 0.5;
  double entropy_coeff = 0.01;

  void validate() const;
};

struct PpoStats {
  double total_loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// Clipped-surrogate update over a batch of trajectories: advantages are
// GAE-estimated and normalized across the batch, then `epochs_per_batch`
// passes run over shuffled trajectory minibatches. Stats are averaged over
// all minibatch updates.
PpoStats ppo_update(nn::ParamSet& params, nn::AdamState& opt_state,
                    const std::vector<Trajectory>& batch, const PpoConfig& cfg,
                    const nn::ArchSpec& spec, const env::NetworkConfig& env_cfg,
                    const nn::AdamConfig& adam_cfg, Rng& rng);

}  // namespace mspec::rl
