#include "mspec/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mspec::nn::ad {

namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape() != b.tape()) {
    throw std::invalid_argument("vars live on different tapes");
  }
  return *a.tape();
}

Var make(Tape& t, Node&& n) {
  const int id = t.add(std::move(n));
  return Var(&t, id);
}

Node binary(Op op, Var a, Var b, Tensor v) {
  Node n;
  n.op = op;
  n.a = a.id();
  n.b = b.id();
  n.value = std::move(v);
  return n;
}

Node unary(Op op, Var a, Tensor v) {
  Node n;
  n.op = op;
  n.a = a.id();
  n.value = std::move(v);
  return n;
}

}  // namespace

Var leaf(Tape& t, Tensor v) {
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(v);
  return make(t, std::move(n));
}

Var constant(Tape& t, Tensor v) {
  Node n;
  n.op = Op::kConst;
  n.value = std::move(v);
  return make(t, std::move(n));
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  return make(t, binary(Op::kAdd, a, b, t_add(a.value(), b.value())));
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  return make(t, binary(Op::kSub, a, b, t_sub(a.value(), b.value())));
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  return make(t, binary(Op::kMul, a, b, t_mul(a.value(), b.value())));
}

Var smul(Var s, Var t) {
  Tape& tp = same_tape(s, t);
  if (!s.value().is_scalar()) {
    throw std::invalid_argument("smul: first arg must be scalar");
  }
  return make(tp, binary(Op::kSMul, s, t,
                         t_smul(s.value().values[0], t.value())));
}

Var cmul(Var a, double c) {
  Node n = unary(Op::kCMul, a, t_scale(a.value(), c));
  n.c = c;
  return make(*a.tape(), std::move(n));
}

Var cadd(Var a, double c) {
  Node n = unary(Op::kCAdd, a, t_offset(a.value(), c));
  n.c = c;
  return make(*a.tape(), std::move(n));
}

Var inv(Var a) {
  return make(*a.tape(), unary(Op::kInv, a, t_inv(a.value())));
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  return make(t, binary(Op::kMatMul, a, b, t_matmul(a.value(), b.value())));
}

Var transpose(Var a) {
  return make(*a.tape(), unary(Op::kTranspose, a, t_transpose(a.value())));
}

Var tanh_(Var a) {
  return make(*a.tape(), unary(Op::kTanh, a, t_tanh(a.value())));
}

Var sigmoid_(Var a) {
  return make(*a.tape(), unary(Op::kSigmoid, a, t_sigmoid(a.value())));
}

Var exp_(Var a) {
  return make(*a.tape(), unary(Op::kExp, a, t_exp(a.value())));
}

Var log_(Var a) {
  return make(*a.tape(), unary(Op::kLog, a, t_log(a.value())));
}

Var sum_all(Var a) {
  return make(*a.tape(), unary(Op::kSumAll, a, t_sum_all(a.value())));
}

Var concat_rows(Tape& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat of nothing");
  Node n;
  n.op = Op::kConcatRows;
  std::vector<const Tensor*> vals;
  vals.reserve(parts.size());
  for (Var p : parts) {
    if (p.tape() != &t) throw std::invalid_argument("tape mismatch in concat");
    n.inputs.push_back(p.id());
    vals.push_back(&p.value());
  }
  n.value = t_concat_rows(vals);
  return make(t, std::move(n));
}

Var slice_rows(Var a, int r0, int nrows) {
  Node n = unary(Op::kSliceRows, a, t_slice_rows(a.value(), r0, nrows));
  n.r0 = r0;
  n.nrows = nrows;
  return make(*a.tape(), std::move(n));
}

Var reshape(Var a, std::vector<int> shape) {
  return make(*a.tape(),
              unary(Op::kReshape, a, t_reshape(a.value(), std::move(shape))));
}

Var stop_grad(Var a) {
  return make(*a.tape(), unary(Op::kStopGrad, a, a.value()));
}

Var mean_all(Var a) {
  const double n = static_cast<double>(a.value().numel());
  return cmul(sum_all(a), 1.0 / n);
}

Var dot(Var a, Var b) { return sum_all(mul(a, b)); }

Var sq(Var a) { return mul(a, a); }

Var sadd(Var tensor, Var scalar) {
  Tape& t = same_tape(tensor, scalar);
  Var ones = constant(t, Tensor::full(tensor.value().shape, 1.0));
  return add(tensor, smul(scalar, ones));
}

Var softmax_all(Var a) {
  // The max shift is a value-level constant; softmax is shift-invariant so
  // the gradient is unaffected.
  const auto& vals = a.value().values;
  const double shift = *std::max_element(vals.begin(), vals.end());
  Var e = exp_(cadd(a, -shift));
  return smul(inv(sum_all(e)), e);
}

Var log_softmax_all(Var a) {
  const auto& vals = a.value().values;
  const double shift = *std::max_element(vals.begin(), vals.end());
  Var shifted = cadd(a, -shift);
  Var lse = log_(sum_all(exp_(shifted)));
  Var ones = constant(*a.tape(), Tensor::full(a.value().shape, 1.0));
  return sub(shifted, smul(lse, ones));
}

namespace {

// Copy of the node fields a reverse pass needs; taking copies up front keeps
// the walk safe while new nodes are appended.
struct NodeRef {
  Op op;
  int a, b;
  double c;
  int r0, nrows;
  std::vector<int> inputs;
};

NodeRef snapshot(const Node& n) {
  return {n.op, n.a, n.b, n.c, n.r0, n.nrows, n.inputs};
}

}  // namespace

std::vector<Var> backward(const Var& loss, const std::vector<Var>& wrt) {
  Tape& t = *loss.tape();
  if (!loss.value().is_scalar()) {
    throw std::invalid_argument("backward: loss must be scalar");
  }
  const int top = loss.id();
  std::vector<int> adj(static_cast<size_t>(top) + 1, -1);

  // Adjoints always carry the shape of the node they belong to; every rule
  // preserves numel, so a metadata reshape suffices.
  auto accum = [&](int target, Var g) {
    if (target < 0) return;
    const std::vector<int> want = t.value(target).shape;
    if (g.value().shape != want) g = reshape(g, want);
    if (adj[target] < 0) {
      adj[target] = g.id();
    } else {
      adj[target] = add(Var(&t, adj[target]), g).id();
    }
  };

  adj[top] = constant(t, Tensor::full(loss.value().shape, 1.0)).id();

  for (int i = top; i >= 0; --i) {
    if (adj[i] < 0) continue;
    const NodeRef n = snapshot(t.node(i));
    const Var g(&t, adj[i]);
    const Var self(&t, i);
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConst:
      case Op::kStopGrad:
        break;
      case Op::kAdd:
        accum(n.a, g);
        accum(n.b, g);
        break;
      case Op::kSub:
        accum(n.a, g);
        accum(n.b, cmul(g, -1.0));
        break;
      case Op::kMul:
        accum(n.a, mul(g, Var(&t, n.b)));
        accum(n.b, mul(g, Var(&t, n.a)));
        break;
      case Op::kSMul:
        accum(n.a, sum_all(mul(g, Var(&t, n.b))));
        accum(n.b, smul(Var(&t, n.a), g));
        break;
      case Op::kCMul:
        accum(n.a, cmul(g, n.c));
        break;
      case Op::kCAdd:
        accum(n.a, g);
        break;
      case Op::kInv:
        accum(n.a, cmul(mul(mul(g, self), self), -1.0));
        break;
      case Op::kMatMul:
        accum(n.a, matmul(g, transpose(Var(&t, n.b))));
        accum(n.b, matmul(transpose(Var(&t, n.a)), g));
        break;
      case Op::kTranspose:
        accum(n.a, transpose(g));
        break;
      case Op::kTanh:
        accum(n.a, mul(g, cadd(cmul(sq(self), -1.0), 1.0)));
        break;
      case Op::kSigmoid:
        accum(n.a, mul(g, mul(self, cadd(cmul(self, -1.0), 1.0))));
        break;
      case Op::kExp:
        accum(n.a, mul(g, self));
        break;
      case Op::kLog:
        accum(n.a, mul(g, inv(Var(&t, n.a))));
        break;
      case Op::kSumAll: {
        const std::vector<int> shape = t.value(n.a).shape;
        accum(n.a, smul(g, constant(t, Tensor::full(shape, 1.0))));
        break;
      }
      case Op::kConcatRows: {
        int off = 0;
        for (int in : n.inputs) {
          const int r = t.value(in).rows();
          accum(in, slice_rows(g, off, r));
          off += r;
        }
        break;
      }
      case Op::kSliceRows: {
        const int rows = t.value(n.a).rows(), cols = t.value(n.a).cols();
        std::vector<Var> parts;
        if (n.r0 > 0) {
          parts.push_back(constant(t, Tensor::zeros({n.r0, cols})));
        }
        parts.push_back(g);
        if (rows - n.r0 - n.nrows > 0) {
          parts.push_back(
              constant(t, Tensor::zeros({rows - n.r0 - n.nrows, cols})));
        }
        accum(n.a, parts.size() == 1 ? parts[0] : concat_rows(t, parts));
        break;
      }
      case Op::kReshape:
        accum(n.a, g);
        break;
    }
  }

  std::vector<Var> grads;
  grads.reserve(wrt.size());
  for (Var w : wrt) {
    if (w.tape() != &t) throw std::invalid_argument("wrt var on wrong tape");
    if (w.id() <= top && adj[w.id()] >= 0) {
      grads.push_back(Var(&t, adj[w.id()]));
    } else {
      grads.push_back(constant(t, Tensor::zeros(w.value().shape)));
    }
  }
  return grads;
}

std::vector<Tensor> grad_values(const Var& loss, const std::vector<Var>& wrt) {
  Tape& t = *loss.tape();
  if (!loss.value().is_scalar()) {
    throw std::invalid_argument("grad_values: loss must be scalar");
  }
  const int top = loss.id();
  std::vector<Tensor> adj(static_cast<size_t>(top) + 1);
  std::vector<bool> keep(static_cast<size_t>(top) + 1, false);
  for (Var w : wrt) {
    if (w.tape() != &t) throw std::invalid_argument("wrt var on wrong tape");
    if (w.id() <= top) keep[w.id()] = true;
  }

  // Adjoints take the shape of the node they belong to; numel always matches
  // by construction of the rules, so only metadata is adjusted.
  auto accum = [&](int target, const Tensor& g, double scale = 1.0) {
    if (target < 0) return;
    Tensor& acc = adj[target];
    if (acc.numel() == 0) {
      acc = t_scale(g, scale);
      acc.shape = t.value(target).shape;
    } else {
      for (size_t k = 0; k < acc.values.size(); ++k) {
        acc.values[k] += scale * g.values[k];
      }
    }
  };

  adj[top] = Tensor::full(loss.value().shape, 1.0);

  for (int i = top; i >= 0; --i) {
    if (adj[i].numel() == 0) continue;
    const Node& n = t.node(i);
    Tensor g;
    if (keep[i]) {
      g = adj[i];  // wrt target: keep the accumulated adjoint for collection
    } else {
      g = std::move(adj[i]);
      adj[i] = Tensor();
    }
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConst:
      case Op::kStopGrad:
        break;
      case Op::kAdd:
        accum(n.a, g);
        accum(n.b, g);
        break;
      case Op::kSub:
        accum(n.a, g);
        accum(n.b, g, -1.0);
        break;
      case Op::kMul:
        accum(n.a, t_mul(g, t.value(n.b)));
        accum(n.b, t_mul(g, t.value(n.a)));
        break;
      case Op::kSMul:
        accum(n.a, t_sum_all(t_mul(g, t.value(n.b))));
        accum(n.b, g, t.value(n.a).values[0]);
        break;
      case Op::kCMul:
        accum(n.a, g, n.c);
        break;
      case Op::kCAdd:
        accum(n.a, g);
        break;
      case Op::kInv: {
        const Tensor& y = n.value;
        accum(n.a, t_mul(t_mul(g, y), y), -1.0);
        break;
      }
      case Op::kMatMul:
        accum(n.a, t_matmul(g, t_transpose(t.value(n.b))));
        accum(n.b, t_matmul(t_transpose(t.value(n.a)), g));
        break;
      case Op::kTranspose:
        accum(n.a, t_transpose(g));
        break;
      case Op::kTanh: {
        Tensor d(n.value.shape);
        for (size_t k = 0; k < d.values.size(); ++k) {
          const double y = n.value.values[k];
          d.values[k] = g.values[k] * (1.0 - y * y);
        }
        accum(n.a, d);
        break;
      }
      case Op::kSigmoid: {
        Tensor d(n.value.shape);
        for (size_t k = 0; k < d.values.size(); ++k) {
          const double y = n.value.values[k];
          d.values[k] = g.values[k] * y * (1.0 - y);
        }
        accum(n.a, d);
        break;
      }
      case Op::kExp:
        accum(n.a, t_mul(g, n.value));
        break;
      case Op::kLog:
        accum(n.a, t_mul(g, t_inv(t.value(n.a))));
        break;
      case Op::kSumAll:
        accum(n.a, Tensor::full(t.value(n.a).shape, g.values[0]));
        break;
      case Op::kConcatRows: {
        int off = 0;
        for (int in : n.inputs) {
          const int r = t.value(in).rows();
          accum(in, t_slice_rows(g, off, r));
          off += r;
        }
        break;
      }
      case Op::kSliceRows: {
        const Tensor& src = t.value(n.a);
        if (adj[n.a].numel() == 0) adj[n.a] = Tensor::zeros(src.shape);
        const int cols = src.cols();
        for (int r = 0; r < n.nrows; ++r) {
          for (int c = 0; c < cols; ++c) {
            adj[n.a].values[static_cast<size_t>(n.r0 + r) * cols + c] +=
                g.at(r, c);
          }
        }
        break;
      }
      case Op::kReshape:
        accum(n.a, g);
        break;
    }
  }

  std::vector<Tensor> grads;
  grads.reserve(wrt.size());
  for (Var w : wrt) {
    if (w.id() <= top && adj[w.id()].numel() != 0) {
      grads.push_back(std::move(adj[w.id()]));
    } else {
      grads.push_back(Tensor::zeros(w.value().shape));
    }
  }
  return grads;
}

}  // namespace mspec::nn::ad
