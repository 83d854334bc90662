#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mspec/nn/tape.hpp"
#include "mspec/nn/tensor.hpp"

namespace mspec::nn {

// Ordered name -> tensor collection; insertion order is the canonical
// iteration order everywhere (updates, checkpoints, gradients).
class ParamSet {
 public:
  using Item = std::pair<std::string, Tensor>;

  void insert(std::string name, Tensor value);
  bool has(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);

  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const std::vector<Item>& items() const { return items_; }
  std::vector<Item>& items() { return items_; }

  size_t total_scalars() const;
  bool congruent_with(const ParamSet& o) const;  // same names and shapes
  bool all_finite() const;

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<Item> items_;
};

// Gradients share the layout of the ParamSet they were taken against.
using GradSet = ParamSet;

// Tape-bound view of a parameter collection.
class VarSet {
 public:
  using Item = std::pair<std::string, ad::Var>;

  void insert(std::string name, ad::Var v);
  const ad::Var& get(const std::string& name) const;

  size_t size() const { return items_.size(); }
  const std::vector<Item>& items() const { return items_; }

  // Current values as plain tensors.
  ParamSet values() const;

 private:
  std::vector<Item> items_;
};

// Places every parameter on the tape as a differentiable leaf.
VarSet lift(ad::Tape& tape, const ParamSet& params);

// theta' = theta - alpha * grad, as a new collection; inputs untouched.
ParamSet functional_update(const ParamSet& params, const GradSet& grads,
                           double alpha);

// Tape version: the result stays differentiable w.r.t. the inputs.
VarSet functional_update(const VarSet& params,
                         const std::vector<ad::Var>& grads, double alpha);

// Detached copies of each gradient var (first-order meta path).
std::vector<ad::Var> detach_all(const std::vector<ad::Var>& grads);

}  // namespace mspec::nn
