#include "mspec/rl/trajectory.hpp"

#include <stdexcept>

#include "mspec/nn/action.hpp"

namespace mspec::rl {

nn::PolicyDims policy_dims(const env::NetworkConfig& cfg) {
  nn::PolicyDims d;
  d.obs_dim = env::observation_size(cfg);
  d.n_bs = cfg.n_bs;
  d.n_bands = cfg.n_bands;
  d.n_levels = cfg.n_levels;
  return d;
}

Trajectory collect_trajectory(const nn::ParamSet& params,
                              const nn::ArchSpec& spec,
                              const env::TaskSpec& task,
                              const env::NetworkConfig& cfg, int horizon,
                              Rng& rng) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const nn::PolicyDims dims = policy_dims(cfg);

  Trajectory traj;
  traj.task_seed = task.seed;
  traj.observations.reserve(horizon);

  env::Env environment(cfg, task);
  environment.reset(rng);

  nn::ad::Tape tape;
  nn::VarSet vars = nn::lift(tape, params);
  nn::PolicyRollout policy(tape, vars, spec, dims);

  nn::PolicyNodes last_nodes;
  for (int step = 0; step < horizon; ++step) {
    std::vector<double> obs =
        env::flatten_observation(environment.state(), cfg);
    last_nodes = policy.step(obs);

    auto [action, log_prob] =
        nn::sample_action(last_nodes.logits.value(), dims, rng);
    const env::StepOutcome out = environment.step(action, rng);

    traj.observations.push_back(std::move(obs));
    traj.actions.push_back(action);
    traj.log_probs.push_back(log_prob);
    traj.rewards.push_back(out.reward);
    traj.values.push_back(last_nodes.value.scalar());
    traj.dones.push_back(out.done ? 1 : 0);
    traj.reward_parts.push_back(out.reward_parts);

    if (out.done) {
      if (step + 1 < horizon) {
        environment.reset(rng);
        policy.reset_episode();
      }
    }
  }

  if (!traj.dones.back()) {
    const std::vector<double> obs =
        env::flatten_observation(environment.state(), cfg);
    traj.bootstrap_value = policy.step(obs).value.scalar();
  }
  return traj;
}

}  // namespace mspec::rl
