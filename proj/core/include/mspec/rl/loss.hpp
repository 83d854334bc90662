#pragma once

#include "mspec/rl/gae.hpp"
#include "mspec/rl/trajectory.hpp"

namespace mspec::rl {

struct LossCoeffs {
  double value_coeff = 0.5;
  double entropy_coeff = 0.01;
};

// Task loss used by both meta levels (plain policy-gradient form):
//   L = -mean(log pi(a|s) * A) + c_v * mean((V - R)^2) - c_e * mean(H)
// Advantages are consumed as given; normalize upstream if desired. The
// result is a scalar node on `tape`, differentiable w.r.t. `params`.
nn::ad::Var task_loss(nn::ad::Tape& tape, const nn::VarSet& params,
                      const nn::ArchSpec& spec, const Trajectory& traj,
                      const AdvantageEstimate& adv,
                      const env::NetworkConfig& cfg,
                      const LossCoeffs& coeffs = {});

}  // namespace mspec::rl
