#include "mspec/nn/action.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mspec::nn {

namespace ad = mspec::nn::ad;

namespace {

// Stable per-row softmax log-probabilities on raw values.
std::vector<double> row_log_softmax(const Tensor& logits, int row) {
  const int k = logits.cols();
  double mx = logits.at(row, 0);
  for (int c = 1; c < k; ++c) mx = std::max(mx, logits.at(row, c));
  double lse = 0.0;
  for (int c = 0; c < k; ++c) lse += std::exp(logits.at(row, c) - mx);
  lse = std::log(lse);
  std::vector<double> out(k);
  for (int c = 0; c < k; ++c) out[c] = logits.at(row, c) - mx - lse;
  return out;
}

}  // namespace

std::pair<env::AllocationAction, double> sample_action(const Tensor& logits,
                                                       const PolicyDims& dims,
                                                       Rng& rng) {
  if (!logits.all_finite()) {
    throw std::invalid_argument("sample_action: non-finite logits");
  }
  const int cells = dims.n_cells();
  const int k = dims.n_levels;
  if (logits.rows() != cells || logits.cols() != k) {
    throw std::invalid_argument("sample_action: logits shape mismatch");
  }

  env::AllocationAction action;
  action.levels = Grid<int>(dims.n_bs, dims.n_bands);
  double log_prob = 0.0;
  for (int cell = 0; cell < cells; ++cell) {
    const std::vector<double> lp = row_log_softmax(logits, cell);
    const double u = rng.uniform();
    double cdf = 0.0;
    int choice = k - 1;
    for (int c = 0; c < k; ++c) {
      cdf += std::exp(lp[c]);
      if (u < cdf) {
        choice = c;
        break;
      }
    }
    action.levels(cell / dims.n_bands, cell % dims.n_bands) = choice;
    log_prob += lp[choice];
  }
  return {action, log_prob};
}

ad::Var action_log_prob(ad::Var logits, const env::AllocationAction& action) {
  const int cells = logits.value().rows();
  const int k = logits.value().cols();
  ad::Tape& tape = *logits.tape();

  ad::Var total;
  for (int cell = 0; cell < cells; ++cell) {
    ad::Var row = ad::slice_rows(logits, cell, 1);
    ad::Var lsm = ad::log_softmax_all(row);
    const int chosen =
        action.levels.data()[static_cast<size_t>(cell)];
    Tensor mask = Tensor::zeros({1, k});
    mask.values[chosen] = 1.0;
    ad::Var picked = ad::dot(lsm, ad::constant(tape, std::move(mask)));
    total = total.valid() ? ad::add(total, picked) : picked;
  }
  return total;
}

ad::Var action_entropy(ad::Var logits) {
  const int cells = logits.value().rows();
  ad::Var total;
  for (int cell = 0; cell < cells; ++cell) {
    ad::Var row = ad::slice_rows(logits, cell, 1);
    ad::Var lsm = ad::log_softmax_all(row);
    ad::Var p = ad::softmax_all(row);
    ad::Var h = ad::cmul(ad::dot(p, lsm), -1.0);
    total = total.valid() ? ad::add(total, h) : h;
  }
  return total;
}

}  // namespace mspec::nn
