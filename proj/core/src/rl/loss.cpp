#include "mspec/rl/loss.hpp"

#include <stdexcept>

#include "mspec/nn/action.hpp"

namespace mspec::rl {

namespace ad = mspec::nn::ad;

ad::Var task_loss(ad::Tape& tape, const nn::VarSet& params,
                  const nn::ArchSpec& spec, const Trajectory& traj,
                  const AdvantageEstimate& adv, const env::NetworkConfig& cfg,
                  const LossCoeffs& coeffs) {
  const size_t n = traj.size();
  if (n == 0) throw std::invalid_argument("task_loss: empty trajectory");
  if (adv.advantages.size() != n || adv.returns.size() != n) {
    throw std::invalid_argument("task_loss: advantage/trajectory mismatch");
  }

  nn::PolicyRollout policy(tape, params, spec, policy_dims(cfg));

  ad::Var pg_sum, value_sum, entropy_sum;
  auto acc = [](ad::Var& into, ad::Var term) {
    into = into.valid() ? ad::add(into, term) : term;
  };

  for (size_t t = 0; t < n; ++t) {
    if (t > 0 && traj.dones[t - 1]) policy.reset_episode();
    nn::PolicyNodes nodes = policy.step(traj.observations[t]);

    ad::Var log_prob = nn::action_log_prob(nodes.logits, traj.actions[t]);
    acc(pg_sum, ad::cmul(log_prob, -adv.advantages[t]));

    ad::Var value_err = ad::cadd(nodes.value, -adv.returns[t]);
    acc(value_sum, ad::sq(value_err));

    if (coeffs.entropy_coeff != 0.0) {
      acc(entropy_sum, nn::action_entropy(nodes.logits));
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  ad::Var loss = ad::add(ad::cmul(pg_sum, inv_n),
                         ad::cmul(value_sum, coeffs.value_coeff * inv_n));
  if (entropy_sum.valid()) {
    loss = ad::sub(loss, ad::cmul(entropy_sum, coeffs.entropy_coeff * inv_n));
  }
  return loss;
}

}  // namespace mspec::rl
