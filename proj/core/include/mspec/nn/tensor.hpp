#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mspec::nn {

// Dense 64-bit float tensor. Stored row-major; operations interpret it as a
// 2-D matrix with cols = shape.back() and rows = numel / cols, so a 1-D
// vector behaves as a single row and higher-rank shapes as stacked rows.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);
  Tensor(std::vector<int> s, std::vector<double> v);

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int> s, double fill);
  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor row(std::vector<double> v);

  size_t numel() const { return values.size(); }
  int rows() const;
  int cols() const;

  double& at(int r, int c);
  double at(int r, int c) const;

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool is_scalar() const { return numel() == 1; }
  bool all_finite() const;

  std::string shape_str() const;
};

// Elementwise / linear-algebra kernels used by the tape. All check shapes
// and throw std::invalid_argument on mismatch.
Tensor t_add(const Tensor& a, const Tensor& b);
Tensor t_sub(const Tensor& a, const Tensor& b);
Tensor t_mul(const Tensor& a, const Tensor& b);
Tensor t_scale(const Tensor& a, double c);
Tensor t_offset(const Tensor& a, double c);
Tensor t_smul(double s, const Tensor& a);  // broadcast scalar * tensor
Tensor t_inv(const Tensor& a);
Tensor t_matmul(const Tensor& a, const Tensor& b);
Tensor t_transpose(const Tensor& a);
Tensor t_tanh(const Tensor& a);
Tensor t_sigmoid(const Tensor& a);
Tensor t_exp(const Tensor& a);
Tensor t_log(const Tensor& a);
Tensor t_sum_all(const Tensor& a);
Tensor t_concat_rows(const std::vector<const Tensor*>& parts);
Tensor t_slice_rows(const Tensor& a, int r0, int nrows);
Tensor t_reshape(const Tensor& a, std::vector<int> s);

void t_axpy(Tensor& acc, const Tensor& x, double a = 1.0);  // acc += a * x

}  // namespace mspec::nn
