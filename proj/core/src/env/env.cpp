#include "mspec/env/env.hpp"

#include <cmath>
#include <stdexcept>

#include "mspec/common/errors.hpp"

namespace mspec::env {

TaskSpec sample_task(const TaskDistParams& dist, const NetworkConfig& cfg,
                     uint64_t seed) {
  Rng rng(derive_seed(seed, 0xBA5E1234ull));
  TaskSpec task;
  task.seed = seed;
  task.bs_positions.reserve(cfg.n_bs);
  for (int i = 0; i < cfg.n_bs; ++i) {
    task.bs_positions.push_back(
        {rng.uniform(0.0, dist.arena_m), rng.uniform(0.0, dist.arena_m)});
  }
  task.ue_positions.reserve(cfg.n_ue);
  for (int u = 0; u < cfg.n_ue; ++u) {
    task.ue_positions.push_back(
        {rng.uniform(0.0, dist.arena_m), rng.uniform(0.0, dist.arena_m)});
  }
  task.eta_task = rng.uniform(dist.eta_lo, dist.eta_hi);
  task.shadow_sigma_task_db =
      rng.uniform(dist.shadow_sigma_lo, dist.shadow_sigma_hi);
  task.initial_interference_w = Grid<double>(cfg.n_bs, cfg.n_bands);
  for (double& v : task.initial_interference_w) {
    v = rng.uniform(0.0, dist.i0_max_w);
  }
  return task;
}

TaskSpec sample_task(const TaskDistParams& dist, const NetworkConfig& cfg,
                     Rng& rng) {
  return sample_task(dist, cfg, rng.next_u64());
}

EnvState env_reset(const TaskSpec& task, const NetworkConfig& cfg, Rng& rng) {
  cfg.validate();
  if (static_cast<int>(task.bs_positions.size()) != cfg.n_bs ||
      static_cast<int>(task.ue_positions.size()) != cfg.n_ue ||
      task.initial_interference_w.rows() != cfg.n_bs ||
      task.initial_interference_w.cols() != cfg.n_bands) {
    throw ConfigError("task geometry does not match network config");
  }
  EnvState s;
  s.channel_db = init_channel(task, cfg, rng);
  s.interference_w = task.initial_interference_w;
  s.qos = Grid<double>(cfg.n_ue, 2, 0.0);
  s.prev_action = Grid<int>(cfg.n_bs, cfg.n_bands, 0);
  s.prev_power_w = Grid<double>(cfg.n_bs, cfg.n_bands, 0.0);
  s.t = 0;
  return s;
}

StepOutcome env_step(const EnvState& state, const AllocationAction& a,
                     const NetworkConfig& cfg, const TaskSpec& task, Rng& rng) {
  if (state.t >= cfg.episode_len) {
    throw std::logic_error("env_step called on a finished episode");
  }

  const Grid<double> p_req = action_to_power(a, cfg);
  const Grid<double> p_safe =
      apply_safety_filter(p_req, state.interference_w, cfg.i_max_w);
  const Grid<int> assoc =
      associate_users(state.channel_db, cfg.n_bands, state.t);
  const Grid<double> sinr = compute_sinr_grid(p_safe, state.channel_db, assoc, cfg);

  const ThroughputResult tput = throughput_bps(sinr, p_safe, cfg);
  const Grid<double> qos_next = update_qos(state.qos, sinr, assoc, cfg);
  const PenaltyResult pen = step_penalty(sinr, p_safe, qos_next, cfg);

  RewardBreakdown parts;
  parts.throughput_bps = tput.total_bps;
  parts.fairness = fairness_index(tput.active_bps);
  parts.cost = step_cost(p_safe, state.prev_power_w, cfg);
  parts.penalty = pen.penalty;
  parts.sinr_violations = pen.sinr_violations;
  parts.latency_violations = pen.latency_violations;

  // executed action: requested level where transmission went through, else 0
  Grid<int> executed_levels(a.levels.rows(), a.levels.cols(), 0);
  for (int i = 0; i < a.levels.rows(); ++i) {
    for (int j = 0; j < a.levels.cols(); ++j) {
      executed_levels(i, j) = p_safe(i, j) > 0.0 ? a.levels(i, j) : 0;
    }
  }

  StepOutcome out;
  out.reward_parts = parts;
  out.reward = compute_reward(parts, cfg);
  out.executed_power_w = p_safe;
  out.sinr_linear = sinr;

  EnvState next;
  next.interference_w = update_interference(p_safe, task.bs_positions, cfg);
  next.channel_db = fading_step(state.channel_db, cfg.fading_kappa,
                                cfg.fading_sigma_db, rng);
  next.qos = qos_next;
  next.prev_action = executed_levels;
  next.prev_power_w = p_safe;
  next.t = state.t + 1;

  out.done = next.t >= cfg.episode_len;
  out.next_state = std::move(next);
  return out;
}

int observation_size(const NetworkConfig& cfg) {
  return cfg.n_ue * cfg.n_bs + cfg.n_bs * cfg.n_bands * 2 + cfg.n_ue * 2 + 1;
}

std::vector<double> flatten_observation(const EnvState& state,
                                        const NetworkConfig& cfg) {
  std::vector<double> obs;
  obs.reserve(observation_size(cfg));
  for (double v : state.channel_db) obs.push_back(v / 100.0);
  for (double v : state.interference_w) {
    obs.push_back((std::log10(v + 1e-15) + 15.0) / 15.0);
  }
  for (int u = 0; u < cfg.n_ue; ++u) {
    obs.push_back(state.qos(u, 0) / cfg.latency_max_ms);
    obs.push_back(state.qos(u, 1) / (cfg.bandwidth_hz * cfg.n_levels));
  }
  for (int v : state.prev_action) {
    obs.push_back(static_cast<double>(v) / (cfg.n_levels - 1));
  }
  obs.push_back(static_cast<double>(state.t) / cfg.episode_len);
  return obs;
}

Env::Env(NetworkConfig cfg, TaskSpec task)
    : cfg_(std::move(cfg)), task_(std::move(task)) {
  cfg_.validate();
}

const EnvState& Env::reset(Rng& rng) {
  state_ = env_reset(task_, cfg_, rng);
  have_state_ = true;
  return state_;
}

StepOutcome Env::step(const AllocationAction& a, Rng& rng) {
  if (!have_state_) throw std::logic_error("Env::step before reset");
  StepOutcome out = env_step(state_, a, cfg_, task_, rng);
  state_ = out.next_state;
  return out;
}

}  // namespace mspec::env
