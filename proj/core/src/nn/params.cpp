#include "mspec/nn/params.hpp"

#include <stdexcept>

namespace mspec::nn {

void ParamSet::insert(std::string name, Tensor value) {
  if (has(name)) throw std::invalid_argument("duplicate parameter " + name);
  items_.emplace_back(std::move(name), std::move(value));
}

bool ParamSet::has(const std::string& name) const {
  for (const auto& [n, v] : items_) {
    if (n == name) return true;
  }
  return false;
}

const Tensor& ParamSet::get(const std::string& name) const {
  for (const auto& [n, v] : items_) {
    if (n == name) return v;
  }
  throw std::out_of_range("no parameter named " + name);
}

Tensor& ParamSet::get(const std::string& name) {
  for (auto& [n, v] : items_) {
    if (n == name) return v;
  }
  throw std::out_of_range("no parameter named " + name);
}

size_t ParamSet::total_scalars() const {
  size_t n = 0;
  for (const auto& [name, v] : items_) n += v.numel();
  return n;
}

bool ParamSet::congruent_with(const ParamSet& o) const {
  if (items_.size() != o.items_.size()) return false;
  for (size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].first != o.items_[i].first) return false;
    if (items_[i].second.shape != o.items_[i].second.shape) return false;
  }
  return true;
}

bool ParamSet::all_finite() const {
  for (const auto& [name, v] : items_) {
    if (!v.all_finite()) return false;
  }
  return true;
}

void VarSet::insert(std::string name, ad::Var v) {
  for (const auto& [n, _] : items_) {
    if (n == name) throw std::invalid_argument("duplicate parameter " + name);
  }
  items_.emplace_back(std::move(name), v);
}

const ad::Var& VarSet::get(const std::string& name) const {
  for (const auto& [n, v] : items_) {
    if (n == name) return v;
  }
  throw std::out_of_range("no parameter named " + name);
}

ParamSet VarSet::values() const {
  ParamSet out;
  for (const auto& [n, v] : items_) out.insert(n, v.value());
  return out;
}

VarSet lift(ad::Tape& tape, const ParamSet& params) {
  VarSet out;
  for (const auto& [n, v] : params.items()) out.insert(n, ad::leaf(tape, v));
  return out;
}

ParamSet functional_update(const ParamSet& params, const GradSet& grads,
                           double alpha) {
  if (!params.congruent_with(grads)) {
    throw std::invalid_argument("functional_update: incongruent shapes");
  }
  ParamSet out;
  for (size_t i = 0; i < params.items().size(); ++i) {
    const auto& [name, p] = params.items()[i];
    const Tensor& g = grads.items()[i].second;
    Tensor updated = p;
    t_axpy(updated, g, -alpha);
    out.insert(name, std::move(updated));
  }
  return out;
}

VarSet functional_update(const VarSet& params,
                         const std::vector<ad::Var>& grads, double alpha) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("functional_update: grad count mismatch");
  }
  VarSet out;
  for (size_t i = 0; i < params.items().size(); ++i) {
    const auto& [name, p] = params.items()[i];
    if (grads[i].value().shape != p.value().shape) {
      throw std::invalid_argument("functional_update: incongruent shapes");
    }
    out.insert(name, ad::sub(p, ad::cmul(grads[i], alpha)));
  }
  return out;
}

std::vector<ad::Var> detach_all(const std::vector<ad::Var>& grads) {
  std::vector<ad::Var> out;
  out.reserve(grads.size());
  for (ad::Var g : grads) out.push_back(ad::stop_grad(g));
  return out;
}

}  // namespace mspec::nn
