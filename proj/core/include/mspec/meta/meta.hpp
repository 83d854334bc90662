#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mspec/harness/metrics.hpp"
#include "mspec/nn/adam.hpp"
#include "mspec/rl/loss.hpp"
#include "mspec/rl/ppo.hpp"

namespace mspec::meta {

struct MetaConfig {
  double inner_lr = 0.01;   // alpha
  double meta_lr = 1e-3;    // beta
  int meta_batch_size = 4;  // B
  int inner_steps = 1;
  int support_horizon = 50;
  int query_horizon = 50;
  bool second_order = true;
  int n_meta_iters = 100;
  double gamma = 0.99;       // advantage estimation inside the loops
  double gae_lambda = 0.95;

  void validate() const;
};

struct AdaptationResult {
  nn::ParamSet adapted_params;
  double support_loss = 0.0;  // L(theta) on the first support trajectory
  double query_loss = 0.0;    // L(theta') on the query trajectory
  rl::Trajectory query_traj;
};

// Tape-bound per-task adaptation chain, for use inside a meta objective.
struct TaskAdaptNodes {
  nn::VarSet adapted;
  nn::ad::Var query_loss;
  double support_loss = 0.0;
  rl::Trajectory query_traj;
};

// Inner loop (support collection -> task loss -> functional update, repeated
// inner_steps times with re-collection), then the query loss at the adapted
// parameters. With second_order the whole chain stays differentiable w.r.t.
// theta; otherwise inner gradients are detached. Support stream k and the
// query stream derive deterministically from task.seed.
TaskAdaptNodes inner_adapt_on_tape(nn::ad::Tape& tape, const nn::VarSet& theta,
                                   const env::TaskSpec& task,
                                   const MetaConfig& mc,
                                   const nn::ArchSpec& arch,
                                   const env::NetworkConfig& cfg,
                                   const rl::LossCoeffs& coeffs = {});

// Standalone version on a private tape; meta params are never touched.
AdaptationResult inner_adapt(const nn::ParamSet& theta,
                             const env::TaskSpec& task, const MetaConfig& mc,
                             const nn::ArchSpec& arch,
                             const env::NetworkConfig& cfg,
                             const rl::LossCoeffs& coeffs = {});

struct MetaBatchNodes {
  nn::ad::Var loss;  // mean of per-task query losses
  std::vector<TaskAdaptNodes> tasks;
};

// Eq.-style meta objective over a task batch on one tape.
MetaBatchNodes meta_objective(nn::ad::Tape& tape, const nn::VarSet& theta,
                              const std::vector<env::TaskSpec>& batch,
                              const MetaConfig& mc, const nn::ArchSpec& arch,
                              const env::NetworkConfig& cfg,
                              const rl::LossCoeffs& coeffs = {});

struct MetaIterLog {
  int iteration = 0;
  double mean_support_loss = 0.0;
  double mean_query_loss = 0.0;
  double wall_time_s = 0.0;
};

struct MetaTrainResult {
  nn::ParamSet params;
  std::vector<MetaIterLog> log;
};

// Builds the batch loss for one meta iteration on the given tape.
using MetaBatchFn =
    std::function<MetaBatchNodes(nn::ad::Tape&, const nn::VarSet&, int iter)>;
// Invoked after each optimizer step; return false to stop early.
using MetaIterCallback =
    std::function<bool(int iter, const MetaBatchNodes&, const nn::ParamSet&)>;

// Generic bi-level loop: per iteration the batch callback builds the meta
// loss, the gradient is taken w.r.t. theta and fed to Adam. Throws
// DivergenceError when the loss or parameters go non-finite.
MetaTrainResult meta_train_generic(nn::ParamSet theta,
                                   const nn::AdamConfig& adam_cfg, int n_iters,
                                   const MetaBatchFn& batch_fn,
                                   const MetaIterCallback& on_iter = nullptr);

// Env-coupled meta training: samples meta_batch_size fresh tasks per
// iteration from the distribution (seeds derived from `seed`).
MetaTrainResult meta_train(const nn::ArchSpec& arch, const MetaConfig& mc,
                           const env::NetworkConfig& cfg,
                           const env::TaskDistParams& dist, uint64_t seed,
                           const rl::LossCoeffs& coeffs = {},
                           const MetaIterCallback& on_iter = nullptr);

struct EvalOutcome {
  harness::EpisodeMetrics metrics;  // mean over n_eval_episodes
  double pre_loss = 0.0;
  double post_loss = 0.0;
};

// Adapts to the task, then rolls the adapted policy for n_eval_episodes with
// no further updates.
EvalOutcome evaluate_adapted(const nn::ParamSet& theta,
                             const env::TaskSpec& task, const MetaConfig& mc,
                             const nn::ArchSpec& arch,
                             const env::NetworkConfig& cfg, uint64_t eval_seed,
                             int n_eval_episodes,
                             const rl::LossCoeffs& coeffs = {});

}  // namespace mspec::meta
