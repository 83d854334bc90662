#pragma once

#include <cstdint>
#include <vector>

#include "mspec/common/rng.hpp"
#include "mspec/env/env.hpp"
#include "mspec/nn/arch.hpp"
#include "mspec/nn/params.hpp"

namespace mspec::rl {

// One on-policy rollout. Parallel arrays, one entry per step; reward_parts
// kept so episode metrics can be recomputed from the stored data.
struct Trajectory {
  std::vector<std::vector<double>> observations;
  std::vector<env::AllocationAction> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<uint8_t> dones;
  std::vector<env::RewardBreakdown> reward_parts;
  uint64_t task_seed = 0;
  double bootstrap_value = 0.0;  // V(s_T) when the horizon cut an episode

  size_t size() const { return rewards.size(); }
};

nn::PolicyDims policy_dims(const env::NetworkConfig& cfg);

// Rolls the policy in the environment for `horizon` steps, resetting at
// episode boundaries (recurrent state resets with them). One rng drives
// both action sampling and environment noise; the draw order is fixed, so
// identical inputs give identical trajectories.
Trajectory collect_trajectory(const nn::ParamSet& params,
                              const nn::ArchSpec& spec,
                              const env::TaskSpec& task,
                              const env::NetworkConfig& cfg, int horizon,
                              Rng& rng);

}  // namespace mspec::rl
