#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mspec/nn/params.hpp"
#include "mspec/nn/tape.hpp"

namespace mspec::nn {

enum class ArchKind { kMlp, kRnn, kRnnAttention };

std::string to_string(ArchKind k);
ArchKind arch_kind_from_string(const std::string& s);

struct ArchSpec {
  ArchKind kind = ArchKind::kMlp;
  int hidden_size = 64;
  int n_attention_heads = 1;
  std::vector<int> layer_sizes = {64, 64};  // MLP trunk widths

  void validate() const;
  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

// Environment-derived sizes needed to shape a policy.
struct PolicyDims {
  int obs_dim = 0;
  int n_bs = 0;
  int n_bands = 0;
  int n_levels = 0;
  int n_cells() const { return n_bs * n_bands; }
};

struct PolicyOutput {
  Tensor logits;  // shape {n_bs, n_bands, K}
  double value = 0.0;
  std::optional<Tensor> hidden;  // recurrent carry, absent for MLP
};

// Gaussian fan-in init for weights, zero biases. Deterministic per seed.
ParamSet init_params(const ArchSpec& spec, const PolicyDims& dims,
                     uint64_t seed);

// x @ w + b, optionally followed by tanh. Output layers pass tanh_act=false.
ad::Var dense_forward(ad::Var x, ad::Var w, ad::Var b, bool tanh_act);

// Single GRU cell, gate blocks ordered [z, r, n] along the 3h axis:
//   z = sigmoid(x Wx[z] + bx[z] + h Wh[z] + bh[z])
//   r = sigmoid(x Wx[r] + bx[r] + h Wh[r] + bh[r])
//   n = tanh   (x Wx[n] + bx[n] + r * (h Wh[n] + bh[n]))
//   h' = (1 - z) * n + z * h
ad::Var recurrent_cell_step(ad::Var x, ad::Var h, ad::Var wx, ad::Var wh,
                            ad::Var bx, ad::Var bh);

// Scaled dot-product self-attention over a [T x d] sequence with residual
// connection (out = attn(seq) + seq). causal restricts row t to tokens <= t;
// the policy path uses causal=true so step-by-step sampling and sequence
// replay agree exactly. Optional weights output is [T x T], zero-padded
// above the diagonal in causal mode.
Tensor attention_forward(const Tensor& seq, const ParamSet& params,
                         const ArchSpec& spec, bool causal = false,
                         Tensor* weights_out = nullptr);

struct PolicyNodes {
  ad::Var logits;  // [n_cells x K]
  ad::Var value;   // [1 x 1]
  ad::Var hidden;  // [1 x h] for recurrent kinds, invalid for MLP
};

// Drives one policy over an episode on a tape; used both for action
// sampling during collection and for loss replay, so the two computations
// are identical by construction. Recurrent state persists across step()
// calls until reset_episode().
class PolicyRollout {
 public:
  PolicyRollout(ad::Tape& tape, const VarSet& params, const ArchSpec& spec,
                const PolicyDims& dims);

  PolicyNodes step(const std::vector<double>& obs);
  void reset_episode();

 private:
  PolicyNodes heads(ad::Var trunk);

  ad::Tape* tape_;
  const VarSet* params_;
  ArchSpec spec_;
  PolicyDims dims_;
  ad::Var h_;                     // recurrent carry
  std::vector<ad::Var> hist_h_;   // attention: hidden history
  std::vector<ad::Var> hist_k_;
  std::vector<ad::Var> hist_v_;
};

// Runs the policy over an observation sequence (a single observation is a
// length-1 sequence) and returns the last step's output. Recurrent kinds
// reject an empty sequence.
PolicyOutput policy_forward(const std::vector<std::vector<double>>& obs_seq,
                            const ParamSet& params, const ArchSpec& spec,
                            const PolicyDims& dims);

}  // namespace mspec::nn
