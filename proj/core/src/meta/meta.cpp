#include "mspec/meta/meta.hpp"

#include <chrono>
#include <cmath>

#include "mspec/common/errors.hpp"

namespace mspec::meta {

namespace ad = mspec::nn::ad;

namespace {
constexpr uint64_t kSupportStream = 0x5EED0001ull;
constexpr uint64_t kQueryStream = 0x5EED0002ull;
}  // namespace

void MetaConfig::validate() const {
  if (!(inner_lr >= 0.0)) throw ConfigError("inner_lr must be >= 0");
  if (!(meta_lr > 0.0)) throw ConfigError("meta_lr must be > 0");
  if (meta_batch_size < 1) throw ConfigError("meta_batch_size must be >= 1");
  if (inner_steps < 1) throw ConfigError("inner_steps must be >= 1");
  if (support_horizon < 1 || query_horizon < 1) {
    throw ConfigError("horizons must be >= 1");
  }
  if (n_meta_iters < 0) throw ConfigError("n_meta_iters must be >= 0");
}

TaskAdaptNodes inner_adapt_on_tape(ad::Tape& tape, const nn::VarSet& theta,
                                   const env::TaskSpec& task,
                                   const MetaConfig& mc,
                                   const nn::ArchSpec& arch,
                                   const env::NetworkConfig& cfg,
                                   const rl::LossCoeffs& coeffs) {
  mc.validate();
  TaskAdaptNodes out;
  nn::VarSet cur = theta;

  for (int step = 0; step < mc.inner_steps; ++step) {
    Rng collect_rng(derive_seed(task.seed, kSupportStream + step));
    const rl::Trajectory support = rl::collect_trajectory(
        cur.values(), arch, task, cfg, mc.support_horizon, collect_rng);

    std::vector<rl::AdvantageEstimate> adv = {
        rl::compute_gae(support, mc.gamma, mc.gae_lambda)};
    rl::normalize_advantages(adv);

    ad::Var loss = rl::task_loss(tape, cur, arch, support, adv[0], cfg, coeffs);
    if (step == 0) out.support_loss = loss.scalar();

    std::vector<ad::Var> wrt;
    for (const auto& [name, v] : cur.items()) wrt.push_back(v);
    std::vector<ad::Var> grads = ad::backward(loss, wrt);
    if (!mc.second_order) grads = nn::detach_all(grads);
    cur = nn::functional_update(cur, grads, mc.inner_lr);
  }

  Rng query_rng(derive_seed(task.seed, kQueryStream));
  out.query_traj = rl::collect_trajectory(cur.values(), arch, task, cfg,
                                          mc.query_horizon, query_rng);
  std::vector<rl::AdvantageEstimate> adv = {
      rl::compute_gae(out.query_traj, mc.gamma, mc.gae_lambda)};
  rl::normalize_advantages(adv);
  out.query_loss =
      rl::task_loss(tape, cur, arch, out.query_traj, adv[0], cfg, coeffs);
  out.adapted = std::move(cur);
  return out;
}

AdaptationResult inner_adapt(const nn::ParamSet& theta,
                             const env::TaskSpec& task, const MetaConfig& mc,
                             const nn::ArchSpec& arch,
                             const env::NetworkConfig& cfg,
                             const rl::LossCoeffs& coeffs) {
  ad::Tape tape;
  nn::VarSet theta_vars = nn::lift(tape, theta);
  TaskAdaptNodes nodes =
      inner_adapt_on_tape(tape, theta_vars, task, mc, arch, cfg, coeffs);

  AdaptationResult res;
  res.adapted_params = nodes.adapted.values();
  res.support_loss = nodes.support_loss;
  res.query_loss = nodes.query_loss.scalar();
  res.query_traj = std::move(nodes.query_traj);
  return res;
}

MetaBatchNodes meta_objective(ad::Tape& tape, const nn::VarSet& theta,
                              const std::vector<env::TaskSpec>& batch,
                              const MetaConfig& mc, const nn::ArchSpec& arch,
                              const env::NetworkConfig& cfg,
                              const rl::LossCoeffs& coeffs) {
  if (batch.empty()) throw std::invalid_argument("meta_objective: empty batch");
  MetaBatchNodes out;
  ad::Var sum;
  for (const env::TaskSpec& task : batch) {
    out.tasks.push_back(
        inner_adapt_on_tape(tape, theta, task, mc, arch, cfg, coeffs));
    const ad::Var& q = out.tasks.back().query_loss;
    sum = sum.valid() ? ad::add(sum, q) : q;
  }
  out.loss = ad::cmul(sum, 1.0 / static_cast<double>(batch.size()));
  return out;
}

MetaTrainResult meta_train_generic(nn::ParamSet theta,
                                   const nn::AdamConfig& adam_cfg, int n_iters,
                                   const MetaBatchFn& batch_fn,
                                   const MetaIterCallback& on_iter) {
  MetaTrainResult result;
  nn::AdamState opt;
  const auto t0 = std::chrono::steady_clock::now();

  for (int iter = 0; iter < n_iters; ++iter) {
    ad::Tape tape;
    nn::VarSet theta_vars = nn::lift(tape, theta);
    MetaBatchNodes batch = batch_fn(tape, theta_vars, iter);

    const double loss_value = batch.loss.scalar();
    if (!std::isfinite(loss_value)) {
      throw DivergenceError("meta loss diverged at iteration " +
                            std::to_string(iter));
    }

    std::vector<ad::Var> wrt;
    for (const auto& [name, v] : theta_vars.items()) wrt.push_back(v);
    const std::vector<nn::Tensor> grads = ad::grad_values(batch.loss, wrt);

    nn::GradSet grad_set;
    for (size_t i = 0; i < grads.size(); ++i) {
      grad_set.insert(theta_vars.items()[i].first, grads[i]);
    }
    nn::adam_step(theta, grad_set, opt, adam_cfg);
    if (!theta.all_finite()) {
      throw DivergenceError("meta parameters diverged at iteration " +
                            std::to_string(iter));
    }

    double support_sum = 0.0;
    for (const TaskAdaptNodes& t : batch.tasks) support_sum += t.support_loss;

    MetaIterLog log;
    log.iteration = iter;
    log.mean_support_loss =
        support_sum / static_cast<double>(batch.tasks.size());
    log.mean_query_loss = loss_value;
    log.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    result.log.push_back(log);

    if (on_iter && !on_iter(iter, batch, theta)) break;
  }
  result.params = std::move(theta);
  return result;
}

MetaTrainResult meta_train(const nn::ArchSpec& arch, const MetaConfig& mc,
                           const env::NetworkConfig& cfg,
                           const env::TaskDistParams& dist, uint64_t seed,
                           const rl::LossCoeffs& coeffs,
                           const MetaIterCallback& on_iter) {
  mc.validate();
  cfg.validate();
  nn::ParamSet theta =
      nn::init_params(arch, rl::policy_dims(cfg), derive_seed(seed, 0x1717ull));

  MetaBatchFn batch_fn = [&](ad::Tape& tape, const nn::VarSet& theta_vars,
                             int iter) {
    std::vector<env::TaskSpec> tasks;
    tasks.reserve(mc.meta_batch_size);
    for (int i = 0; i < mc.meta_batch_size; ++i) {
      // even offsets: training stream (odd offsets are held out for eval)
      const uint64_t task_seed =
          derive_seed(seed, 2ull * (static_cast<uint64_t>(iter) *
                                        mc.meta_batch_size +
                                    i));
      tasks.push_back(env::sample_task(dist, cfg, task_seed));
    }
    return meta_objective(tape, theta_vars, tasks, mc, arch, cfg, coeffs);
  };

  nn::AdamConfig adam_cfg;
  adam_cfg.lr = mc.meta_lr;
  return meta_train_generic(std::move(theta), adam_cfg, mc.n_meta_iters,
                            batch_fn, on_iter);
}

EvalOutcome evaluate_adapted(const nn::ParamSet& theta,
                             const env::TaskSpec& task, const MetaConfig& mc,
                             const nn::ArchSpec& arch,
                             const env::NetworkConfig& cfg, uint64_t eval_seed,
                             int n_eval_episodes,
                             const rl::LossCoeffs& coeffs) {
  EvalOutcome out;
  AdaptationResult adapted = inner_adapt(theta, task, mc, arch, cfg, coeffs);
  out.pre_loss = adapted.support_loss;
  out.post_loss = adapted.query_loss;

  std::vector<harness::EpisodeMetrics> episodes;
  for (int e = 0; e < n_eval_episodes; ++e) {
    Rng rng(derive_seed(eval_seed, 0xE7A1ull + e));
    const rl::Trajectory traj =
        rl::collect_trajectory(adapted.adapted_params, arch, task, cfg,
                               cfg.episode_len, rng);
    for (harness::EpisodeMetrics& m : harness::episodes_from_trajectory(traj)) {
      episodes.push_back(m);
    }
  }
  out.metrics = harness::mean_metrics(episodes);
  return out;
}

}  // namespace mspec::meta
