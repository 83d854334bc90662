#include "mspec/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace mspec::nn {

void adam_step(ParamSet& params, const GradSet& grads, AdamState& state,
               const AdamConfig& cfg) {
  if (!params.congruent_with(grads)) {
    throw std::invalid_argument("adam_step: incongruent gradient shapes");
  }
  if (state.step == 0) {
    for (const auto& [name, p] : params.items()) {
      state.m.insert(name, Tensor::zeros(p.shape));
      state.v.insert(name, Tensor::zeros(p.shape));
    }
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, state.step);
  const double bc2 = 1.0 - std::pow(cfg.beta2, state.step);

  for (size_t i = 0; i < params.items().size(); ++i) {
    Tensor& p = params.items()[i].second;
    const Tensor& g = grads.items()[i].second;
    Tensor& m = state.m.items()[i].second;
    Tensor& v = state.v.items()[i].second;
    for (size_t k = 0; k < p.values.size(); ++k) {
      m.values[k] = cfg.beta1 * m.values[k] + (1.0 - cfg.beta1) * g.values[k];
      v.values[k] =
          cfg.beta2 * v.values[k] + (1.0 - cfg.beta2) * g.values[k] * g.values[k];
      const double mhat = m.values[k] / bc1;
      const double vhat = v.values[k] / bc2;
      p.values[k] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace mspec::nn
