#include "mspec/nn/arch.hpp"

#include <cmath>
#include <stdexcept>

#include "mspec/common/errors.hpp"
#include "mspec/common/rng.hpp"

namespace mspec::nn {

namespace ad = mspec::nn::ad;

std::string to_string(ArchKind k) {
  switch (k) {
    case ArchKind::kMlp: return "mlp";
    case ArchKind::kRnn: return "rnn";
    case ArchKind::kRnnAttention: return "rnn_attention";
  }
  return "?";
}

ArchKind arch_kind_from_string(const std::string& s) {
  if (s == "mlp") return ArchKind::kMlp;
  if (s == "rnn") return ArchKind::kRnn;
  if (s == "rnn_attention") return ArchKind::kRnnAttention;
  throw ConfigError("unknown architecture kind '" + s + "'");
}

void ArchSpec::validate() const {
  if (hidden_size <= 0) throw ConfigError("hidden_size must be > 0");
  if (n_attention_heads <= 0 || hidden_size % n_attention_heads != 0) {
    throw ConfigError("attention heads must divide hidden_size");
  }
  for (int s : layer_sizes) {
    if (s <= 0) throw ConfigError("layer sizes must be > 0");
  }
  if (kind == ArchKind::kMlp && layer_sizes.empty()) {
    throw ConfigError("mlp needs at least one hidden layer");
  }
}

namespace {

Tensor gaussian_init(int rows, int cols, Rng& rng) {
  Tensor t({rows, cols});
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  for (double& v : t.values) v = rng.normal(0.0, scale);
  return t;
}

int trunk_width(const ArchSpec& spec) {
  return spec.kind == ArchKind::kMlp ? spec.layer_sizes.back()
                                     : spec.hidden_size;
}

}  // namespace

ParamSet init_params(const ArchSpec& spec, const PolicyDims& dims,
                     uint64_t seed) {
  spec.validate();
  Rng rng(derive_seed(seed, 0x1A17ull));
  ParamSet p;
  const int h = spec.hidden_size;

  if (spec.kind == ArchKind::kMlp) {
    int in = dims.obs_dim;
    for (size_t l = 0; l < spec.layer_sizes.size(); ++l) {
      const int out = spec.layer_sizes[l];
      p.insert("mlp.l" + std::to_string(l) + ".w", gaussian_init(in, out, rng));
      p.insert("mlp.l" + std::to_string(l) + ".b", Tensor::zeros({1, out}));
      in = out;
    }
  } else {
    p.insert("gru.wx", gaussian_init(dims.obs_dim, 3 * h, rng));
    p.insert("gru.wh", gaussian_init(h, 3 * h, rng));
    p.insert("gru.bx", Tensor::zeros({1, 3 * h}));
    p.insert("gru.bh", Tensor::zeros({1, 3 * h}));
    if (spec.kind == ArchKind::kRnnAttention) {
      p.insert("attn.wq", gaussian_init(h, h, rng));
      p.insert("attn.wk", gaussian_init(h, h, rng));
      p.insert("attn.wv", gaussian_init(h, h, rng));
    }
  }

  const int tw = trunk_width(spec);
  p.insert("head.policy.w",
           gaussian_init(tw, dims.n_cells() * dims.n_levels, rng));
  p.insert("head.policy.b",
           Tensor::zeros({1, dims.n_cells() * dims.n_levels}));
  p.insert("head.value.w", gaussian_init(tw, 1, rng));
  p.insert("head.value.b", Tensor::zeros({1, 1}));
  return p;
}

ad::Var dense_forward(ad::Var x, ad::Var w, ad::Var b, bool tanh_act) {
  ad::Var y = ad::add(ad::matmul(x, w), b);
  return tanh_act ? ad::tanh_(y) : y;
}

ad::Var recurrent_cell_step(ad::Var x, ad::Var h, ad::Var wx, ad::Var wh,
                            ad::Var bx, ad::Var bh) {
  const int hs = h.value().cols();
  ad::Var xa = ad::reshape(ad::add(ad::matmul(x, wx), bx), {3, hs});
  ad::Var ha = ad::reshape(ad::add(ad::matmul(h, wh), bh), {3, hs});
  ad::Var z = ad::sigmoid_(ad::add(ad::slice_rows(xa, 0, 1),
                                   ad::slice_rows(ha, 0, 1)));
  ad::Var r = ad::sigmoid_(ad::add(ad::slice_rows(xa, 1, 1),
                                   ad::slice_rows(ha, 1, 1)));
  ad::Var n = ad::tanh_(ad::add(ad::slice_rows(xa, 2, 1),
                                ad::mul(r, ad::slice_rows(ha, 2, 1))));
  // h' = (1 - z) n + z h
  ad::Var hr = ad::reshape(h, {1, hs});
  return ad::add(ad::sub(n, ad::mul(z, n)), ad::mul(z, hr));
}

namespace {

// One attention read for query index t over tokens [0, limit). ks/vs are
// cached per-token projections, [1 x h] each.
ad::Var attend(ad::Tape& tape, ad::Var q, const std::vector<ad::Var>& ks,
               const std::vector<ad::Var>& vs, int limit, int n_heads,
               std::vector<double>* weights_row = nullptr) {
  const int h = q.value().cols();
  const int dh = h / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  std::vector<ad::Var> head_ctx;
  head_ctx.reserve(n_heads);
  for (int m = 0; m < n_heads; ++m) {
    ad::Var qm = n_heads == 1
                     ? q
                     : ad::slice_rows(ad::reshape(q, {n_heads, dh}), m, 1);
    std::vector<ad::Var> krows, vrows;
    krows.reserve(limit);
    vrows.reserve(limit);
    for (int j = 0; j < limit; ++j) {
      if (n_heads == 1) {
        krows.push_back(ks[j]);
        vrows.push_back(vs[j]);
      } else {
        krows.push_back(
            ad::slice_rows(ad::reshape(ks[j], {n_heads, dh}), m, 1));
        vrows.push_back(
            ad::slice_rows(ad::reshape(vs[j], {n_heads, dh}), m, 1));
      }
    }
    ad::Var kmat = ad::concat_rows(tape, krows);           // [limit x dh]
    ad::Var vmat = ad::concat_rows(tape, vrows);           // [limit x dh]
    ad::Var scores = ad::cmul(ad::matmul(kmat, ad::transpose(qm)), scale);
    ad::Var w = ad::softmax_all(scores);                   // [limit x 1]
    if (weights_row && m == 0) {
      *weights_row = w.value().values;  // first head's weights, for tests
    }
    head_ctx.push_back(ad::matmul(ad::transpose(w), vmat));  // [1 x dh]
  }
  ad::Var ctx = n_heads == 1 ? head_ctx[0]
                             : ad::reshape(ad::concat_rows(tape, head_ctx),
                                           {1, h});
  return ctx;
}

}  // namespace

Tensor attention_forward(const Tensor& seq, const ParamSet& params,
                         const ArchSpec& spec, bool causal,
                         Tensor* weights_out) {
  if (seq.rows() < 1) throw std::invalid_argument("attention needs T >= 1");
  spec.validate();
  const int t_len = seq.rows();
  const int h = seq.cols();
  if (h != spec.hidden_size) {
    throw std::invalid_argument("attention: token width != hidden_size");
  }

  ad::Tape tape;
  ad::Var wq = ad::constant(tape, params.get("attn.wq"));
  ad::Var wk = ad::constant(tape, params.get("attn.wk"));
  ad::Var wv = ad::constant(tape, params.get("attn.wv"));

  std::vector<ad::Var> toks, ks, vs;
  for (int j = 0; j < t_len; ++j) {
    ad::Var tok = ad::constant(tape, t_slice_rows(seq, j, 1));
    toks.push_back(tok);
    ks.push_back(ad::matmul(tok, wk));
    vs.push_back(ad::matmul(tok, wv));
  }

  if (weights_out) *weights_out = Tensor::zeros({t_len, t_len});
  std::vector<ad::Var> out_rows;
  for (int t = 0; t < t_len; ++t) {
    const int limit = causal ? t + 1 : t_len;
    std::vector<double> wrow;
    ad::Var q = ad::matmul(toks[t], wq);
    ad::Var ctx = attend(tape, q, ks, vs, limit, spec.n_attention_heads,
                         weights_out ? &wrow : nullptr);
    out_rows.push_back(ad::add(ctx, toks[t]));  // residual
    if (weights_out) {
      for (int j = 0; j < limit; ++j) weights_out->at(t, j) = wrow[j];
    }
  }
  return ad::concat_rows(tape, out_rows).value();
}

PolicyRollout::PolicyRollout(ad::Tape& tape, const VarSet& params,
                             const ArchSpec& spec, const PolicyDims& dims)
    : tape_(&tape), params_(&params), spec_(spec), dims_(dims) {
  spec_.validate();
  reset_episode();
}

void PolicyRollout::reset_episode() {
  if (spec_.kind != ArchKind::kMlp) {
    h_ = ad::constant(*tape_, Tensor::zeros({1, spec_.hidden_size}));
  }
  hist_h_.clear();
  hist_k_.clear();
  hist_v_.clear();
}

PolicyNodes PolicyRollout::heads(ad::Var trunk) {
  PolicyNodes out;
  ad::Var flat = dense_forward(trunk, params_->get("head.policy.w"),
                               params_->get("head.policy.b"), false);
  out.logits = ad::reshape(flat, {dims_.n_cells(), dims_.n_levels});
  out.value = dense_forward(trunk, params_->get("head.value.w"),
                            params_->get("head.value.b"), false);
  return out;
}

PolicyNodes PolicyRollout::step(const std::vector<double>& obs) {
  if (static_cast<int>(obs.size()) != dims_.obs_dim) {
    throw std::invalid_argument("observation length mismatch");
  }
  ad::Var x = ad::constant(*tape_, Tensor::row(obs));

  if (spec_.kind == ArchKind::kMlp) {
    ad::Var cur = x;
    for (size_t l = 0; l < spec_.layer_sizes.size(); ++l) {
      const std::string base = "mlp.l" + std::to_string(l);
      cur = dense_forward(cur, params_->get(base + ".w"),
                          params_->get(base + ".b"), true);
    }
    return heads(cur);
  }

  h_ = recurrent_cell_step(x, h_, params_->get("gru.wx"),
                           params_->get("gru.wh"), params_->get("gru.bx"),
                           params_->get("gru.bh"));

  ad::Var trunk = h_;
  if (spec_.kind == ArchKind::kRnnAttention) {
    hist_h_.push_back(h_);
    hist_k_.push_back(ad::matmul(h_, params_->get("attn.wk")));
    hist_v_.push_back(ad::matmul(h_, params_->get("attn.wv")));
    ad::Var q = ad::matmul(h_, params_->get("attn.wq"));
    ad::Var ctx = attend(*tape_, q, hist_k_, hist_v_,
                         static_cast<int>(hist_k_.size()),
                         spec_.n_attention_heads);
    trunk = ad::add(ctx, h_);
  }

  PolicyNodes out = heads(trunk);
  out.hidden = h_;
  return out;
}

PolicyOutput policy_forward(const std::vector<std::vector<double>>& obs_seq,
                            const ParamSet& params, const ArchSpec& spec,
                            const PolicyDims& dims) {
  if (obs_seq.empty()) {
    throw std::invalid_argument("policy_forward: empty observation sequence");
  }
  ad::Tape tape;
  VarSet vars = lift(tape, params);
  PolicyRollout roll(tape, vars, spec, dims);
  PolicyNodes last;
  for (const auto& obs : obs_seq) last = roll.step(obs);

  PolicyOutput out;
  out.logits = t_reshape(last.logits.value(),
                         {dims.n_bs, dims.n_bands, dims.n_levels});
  out.value = last.value.scalar();
  if (last.hidden.valid()) out.hidden = last.hidden.value();
  return out;
}

}  // namespace mspec::nn
