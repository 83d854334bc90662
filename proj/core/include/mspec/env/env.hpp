#pragma once

#include <cstdint>
#include <vector>

#include "mspec/common/rng.hpp"
#include "mspec/env/ops.hpp"
#include "mspec/env/types.hpp"

namespace mspec::env {

// Uniform BS/UE placement in a square arena, per-task path-loss exponent and
// shadowing sigma, uniform initial interference map. Deterministic per seed.
TaskSpec sample_task(const TaskDistParams& dist, const NetworkConfig& cfg,
                     uint64_t seed);
TaskSpec sample_task(const TaskDistParams& dist, const NetworkConfig& cfg,
                     Rng& rng);

EnvState env_reset(const TaskSpec& task, const NetworkConfig& cfg, Rng& rng);

// One CMDP transition: map levels to powers, mask against the current
// interference map, associate users, score the step (throughput, fairness,
// cost, penalty on the updated QoS), then advance interference, fading and t.
StepOutcome env_step(const EnvState& state, const AllocationAction& a,
                     const NetworkConfig& cfg, const TaskSpec& task, Rng& rng);

int observation_size(const NetworkConfig& cfg);

// Fixed-length policy input: channel/100, (log10(I + 1e-15) + 15)/15,
// latency/L_max and throughput/(B*K) per UE, prev levels/(K-1), t/episode_len.
std::vector<double> flatten_observation(const EnvState& state,
                                        const NetworkConfig& cfg);

// Convenience wrapper owning (cfg, task, state); one instance per task.
class Env {
 public:
  Env(NetworkConfig cfg, TaskSpec task);

  const EnvState& reset(Rng& rng);
  StepOutcome step(const AllocationAction& a, Rng& rng);

  const EnvState& state() const { return state_; }
  const NetworkConfig& config() const { return cfg_; }
  const TaskSpec& task() const { return task_; }
  bool done() const { return state_.t >= cfg_.episode_len; }

 private:
  NetworkConfig cfg_;
  TaskSpec task_;
  EnvState state_;
  bool have_state_ = false;
};

}  // namespace mspec::env
