#include "mspec/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mspec/common/errors.hpp"
#include "mspec/nn/action.hpp"

namespace mspec::rl {

namespace ad = mspec::nn::ad;

void PpoConfig::validate() const {
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw ConfigError("clip_epsilon must be in (0, 1)");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ConfigError("gamma must be in (0, 1]");
  }
  if (gae_lambda < 0.0 || gae_lambda > 1.0) {
    throw ConfigError("gae_lambda must be in [0, 1]");
  }
  if (epochs_per_batch < 1 || minibatch_size < 1) {
    throw ConfigError("epochs_per_batch and minibatch_size must be >= 1");
  }
}

PpoStats ppo_update(nn::ParamSet& params, nn::AdamState& opt_state,
                    const std::vector<Trajectory>& batch, const PpoConfig& cfg,
                    const nn::ArchSpec& spec, const env::NetworkConfig& env_cfg,
                    const nn::AdamConfig& adam_cfg, Rng& rng) {
  cfg.validate();
  if (batch.empty()) throw std::invalid_argument("ppo_update: empty batch");

  std::vector<AdvantageEstimate> adv;
  adv.reserve(batch.size());
  for (const Trajectory& traj : batch) {
    adv.push_back(compute_gae(traj, cfg.gamma, cfg.gae_lambda));
  }
  normalize_advantages(adv);

  const nn::PolicyDims dims = policy_dims(env_cfg);
  PpoStats stats;
  int n_updates = 0;

  std::vector<size_t> order(batch.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    // Fisher-Yates with the caller's rng, so updates are seed-deterministic.
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1],
                order[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
    }

    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.minibatch_size)) {
      const size_t end = std::min(
          order.size(), start + static_cast<size_t>(cfg.minibatch_size));

      ad::Tape tape;
      nn::VarSet vars = nn::lift(tape, params);

      ad::Var pg_sum, value_sum, entropy_sum;
      auto acc = [](ad::Var& into, ad::Var term) {
        into = into.valid() ? ad::add(into, term) : term;
      };
      size_t n_steps = 0;
      double kl_sum = 0.0;
      int clipped = 0;

      for (size_t b = start; b < end; ++b) {
        const Trajectory& traj = batch[order[b]];
        const AdvantageEstimate& est = adv[order[b]];
        nn::PolicyRollout policy(tape, vars, spec, dims);

        for (size_t t = 0; t < traj.size(); ++t) {
          if (t > 0 && traj.dones[t - 1]) policy.reset_episode();
          nn::PolicyNodes nodes = policy.step(traj.observations[t]);

          ad::Var log_prob =
              nn::action_log_prob(nodes.logits, traj.actions[t]);
          ad::Var ratio = ad::exp_(ad::cadd(log_prob, -traj.log_probs[t]));
          const double r = ratio.scalar();
          const double a = est.advantages[t];

          ad::Var surr1 = ad::cmul(ratio, a);
          ad::Var surr2;
          if (r < 1.0 - cfg.clip_epsilon) {
            surr2 = ad::constant(tape,
                                 nn::Tensor::scalar((1.0 - cfg.clip_epsilon) * a));
            ++clipped;
          } else if (r > 1.0 + cfg.clip_epsilon) {
            surr2 = ad::constant(tape,
                                 nn::Tensor::scalar((1.0 + cfg.clip_epsilon) * a));
            ++clipped;
          } else {
            surr2 = surr1;
          }
          ad::Var surrogate =
              surr1.scalar() <= surr2.scalar() ? surr1 : surr2;
          acc(pg_sum, ad::cmul(surrogate, -1.0));

          acc(value_sum, ad::sq(ad::cadd(nodes.value, -est.returns[t])));
          acc(entropy_sum, nn::action_entropy(nodes.logits));

          kl_sum += traj.log_probs[t] - log_prob.scalar();
          ++n_steps;
        }
      }

      const double inv_n = 1.0 / static_cast<double>(n_steps);
      ad::Var loss =
          ad::add(ad::cmul(pg_sum, inv_n),
                  ad::cmul(value_sum, cfg.value_coeff * inv_n));
      loss = ad::sub(loss, ad::cmul(entropy_sum, cfg.entropy_coeff * inv_n));

      std::vector<ad::Var> wrt;
      for (const auto& [name, v] : vars.items()) wrt.push_back(v);
      const std::vector<nn::Tensor> grads = ad::grad_values(loss, wrt);

      nn::GradSet grad_set;
      for (size_t i = 0; i < grads.size(); ++i) {
        grad_set.insert(vars.items()[i].first, grads[i]);
      }
      nn::adam_step(params, grad_set, opt_state, adam_cfg);

      stats.total_loss += loss.scalar();
      stats.policy_loss += pg_sum.scalar() * inv_n;
      stats.value_loss += value_sum.scalar() * inv_n;
      stats.entropy += entropy_sum.scalar() * inv_n;
      stats.approx_kl += kl_sum * inv_n;
      stats.clip_fraction += static_cast<double>(clipped) / n_steps;
      ++n_updates;
    }
  }

  const double inv_u = 1.0 / static_cast<double>(n_updates);
  stats.total_loss *= inv_u;
  stats.policy_loss *= inv_u;
  stats.value_loss *= inv_u;
  stats.entropy *= inv_u;
  stats.approx_kl *= inv_u;
  stats.clip_fraction *= inv_u;
  return stats;
}

}  // namespace mspec::rl
