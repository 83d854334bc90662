#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mspec/env/config_io.hpp"
#include "mspec/harness/metrics.hpp"
#include "mspec/meta/meta.hpp"
#include "mspec/nn/checkpoint.hpp"

namespace mspec::harness {

enum class Algorithm { kMamlMlp, kMamlRnn, kMamlRnnAttention, kPpo };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct RunConfig {
  Algorithm algorithm = Algorithm::kMamlMlp;
  env::NetworkConfig env_cfg;
  env::TaskDistParams dist;
  meta::MetaConfig meta_cfg;
  rl::PpoConfig ppo_cfg;
  rl::LossCoeffs loss_coeffs;

  double ppo_lr = 3e-4;
  int ppo_batch_episodes = 8;  // default matches the meta unit for parity

  int n_episodes = 300;
  int eval_interval = 8;
  int n_eval_tasks = 8;
  int n_eval_episodes = 3;

  int hidden_size = 64;
  int n_attention_heads = 1;

  uint64_t seed = 0;
  std::string out_dir = "out";

  void validate() const;
  nn::ArchSpec arch() const;

  // Episodes one training unit consumes (a meta iteration, or one PPO batch).
  int episodes_per_unit() const;
};

// Flat key-value run config; an `env_config = <path>` entry pulls env/dist
// keys from a second file (inline keys win). Unknown keys are rejected.
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from(const KeyValueFile& kv);

struct RunResult {
  std::vector<EpisodeMetrics> metrics_rows;
  nn::ParamSet final_params;
  int episodes_consumed = 0;
  std::string metrics_path;
  std::string checkpoint_path;
  std::string train_log_path;
};

// Trains under a shared episode budget (meta support+query episodes and PPO
// collection episodes all count), evaluating on held-out tasks every
// eval_interval consumed episodes. Writes metrics.csv, train_log.csv and
// checkpoint.bin into out_dir.
RunResult run_experiment(const RunConfig& cfg);

// Held-out evaluation of stored parameters: meta algorithms adapt to each
// task first, PPO rolls zero-shot.
std::vector<std::pair<uint64_t, EpisodeMetrics>> evaluate_checkpoint(
    const RunConfig& cfg, const nn::ParamSet& params, uint64_t task_seed_lo,
    uint64_t task_seed_hi);

// Save + load; returns the reloaded set (bit-identical to the input).
nn::ParamSet checkpoint_roundtrip(const nn::ParamSet& params,
                                  const nn::ArchSpec& spec,
                                  const std::string& path);

}  // namespace mspec::harness
