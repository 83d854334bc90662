#pragma once

#include <cstdint>
#include <vector>

#include "mspec/nn/tensor.hpp"

namespace mspec::nn::ad {

enum class Op : uint8_t {
  kLeaf,        // differentiable input
  kConst,       // non-differentiable input
  kAdd,
  kSub,
  kMul,         // elementwise, same shape
  kSMul,        // scalar var (a) * tensor var (b)
  kCMul,        // tensor * compile-time scalar c
  kCAdd,        // tensor + c
  kInv,         // elementwise reciprocal
  kMatMul,
  kTranspose,
  kTanh,
  kSigmoid,
  kExp,
  kLog,
  kSumAll,      // -> scalar
  kConcatRows,
  kSliceRows,
  kReshape,
  kStopGrad,
};

struct Node {
  Op op = Op::kConst;
  int a = -1;
  int b = -1;
  double c = 0.0;              // payload of kCMul / kCAdd
  int r0 = 0;                  // payload of kSliceRows
  int nrows = 0;
  std::vector<int> inputs;     // payload of kConcatRows
  Tensor value;                // forward value, computed eagerly
};

// Append-only arena of eagerly evaluated nodes. Reverse passes walk ids in
// descending order, which is a valid topological order by construction.
class Tape {
 public:
  int add(Node&& n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }
  const Node& node(int id) const { return nodes_[id]; }
  const Tensor& value(int id) const { return nodes_[id].value; }
  int size() const { return static_cast<int>(nodes_.size()); }
  void reserve(size_t n) { nodes_.reserve(n); }

 private:
  std::vector<Node> nodes_;
};

// Cheap handle to a tape node.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr && id_ >= 0; }
  const Tensor& value() const { return tape_->value(id_); }
  double scalar() const { return value().values[0]; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

Var leaf(Tape& t, Tensor v);
Var constant(Tape& t, Tensor v);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var smul(Var s, Var t);          // broadcast scalar var
Var cmul(Var a, double c);
Var cadd(Var a, double c);
Var inv(Var a);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var tanh_(Var a);
Var sigmoid_(Var a);
Var exp_(Var a);
Var log_(Var a);
Var sum_all(Var a);
Var concat_rows(Tape& t, const std::vector<Var>& parts);
Var slice_rows(Var a, int r0, int nrows);
Var reshape(Var a, std::vector<int> shape);
Var stop_grad(Var a);

// composites
Var mean_all(Var a);
Var dot(Var a, Var b);
Var sq(Var a);
Var sadd(Var tensor, Var scalar);        // tensor + s
Var softmax_all(Var a);                  // whole tensor as one distribution
Var log_softmax_all(Var a);

// Reverse-mode gradients of a scalar loss. Builds gradient nodes on the same
// tape with differentiable primitives, so the result can itself be
// differentiated (the second-order path). Vars not reached by the loss get a
// zero gradient.
std::vector<Var> backward(const Var& loss, const std::vector<Var>& wrt);

// Same gradients as plain tensors, without recording anything. Used where
// the gradient itself never needs differentiating (outer-loop updates).
std::vector<Tensor> grad_values(const Var& loss, const std::vector<Var>& wrt);

}  // namespace mspec::nn::ad
