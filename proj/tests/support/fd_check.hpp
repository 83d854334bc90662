#pragma once

// Central finite-difference oracle for gradient checks. The builder maps
// leaf vars to a scalar loss; analytic gradients come from the tape, the
// reference from re-evaluating the builder at perturbed inputs.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "mspec/nn/tape.hpp"

namespace testutil {

namespace ad = mspec::nn::ad;
using mspec::nn::Tensor;

using LossBuilder =
    std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

struct FdReport {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  size_t checked = 0;
};

inline double eval_loss(const LossBuilder& build,
                        const std::vector<Tensor>& inputs) {
  ad::Tape tape;
  std::vector<ad::Var> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor& t : inputs) leaves.push_back(ad::leaf(tape, t));
  return build(tape, leaves).scalar();
}

// Checks every coordinate of every input unless stride > 1 (then every
// stride-th coordinate, deterministically).
inline FdReport fd_check(const LossBuilder& build,
                         const std::vector<Tensor>& inputs,
                         double eps = 1e-5, size_t stride = 1) {
  ad::Tape tape;
  std::vector<ad::Var> leaves;
  for (const Tensor& t : inputs) leaves.push_back(ad::leaf(tape, t));
  const ad::Var loss = build(tape, leaves);
  const std::vector<Tensor> analytic = ad::grad_values(loss, leaves);

  // the graph-building path must agree with the value path exactly-ish
  const std::vector<ad::Var> graph_grads = ad::backward(loss, leaves);
  for (size_t i = 0; i < analytic.size(); ++i) {
    const Tensor& a = analytic[i];
    const Tensor& g = graph_grads[i].value();
    for (size_t k = 0; k < a.values.size(); ++k) {
      if (std::fabs(a.values[k] - g.values[k]) > 1e-12) {
        FdReport bad;
        bad.max_rel_err = 1e9;
        return bad;
      }
    }
  }

  FdReport rep;
  std::vector<Tensor> work = inputs;
  for (size_t i = 0; i < inputs.size(); ++i) {
    for (size_t k = 0; k < inputs[i].values.size(); k += stride) {
      const double orig = work[i].values[k];
      work[i].values[k] = orig + eps;
      const double up = eval_loss(build, work);
      work[i].values[k] = orig - eps;
      const double down = eval_loss(build, work);
      work[i].values[k] = orig;

      const double fd = (up - down) / (2.0 * eps);
      const double an = analytic[i].values[k];
      const double abs_err = std::fabs(fd - an);
      const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-6});
      rep.max_abs_err = std::max(rep.max_abs_err, abs_err);
      rep.max_rel_err = std::max(rep.max_rel_err, abs_err / denom);
      ++rep.checked;
    }
  }
  return rep;
}

inline Tensor random_tensor(std::vector<int> shape, mspec::Rng& rng,
                            double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace testutil
