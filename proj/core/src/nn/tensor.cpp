#include "mspec/nn/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mspec::nn {

namespace {

size_t shape_numel(const std::vector<int>& s) {
  size_t n = 1;
  for (int d : s) {
    if (d <= 0) throw std::invalid_argument("tensor dims must be positive");
    n *= static_cast<size_t>(d);
  }
  return s.empty() ? 0 : n;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                a.shape_str() + " vs " + b.shape_str());
  }
}

template <typename F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.shape);
  for (size_t i = 0; i < a.values.size(); ++i) out.values[i] = f(a.values[i]);
  return out;
}

}  // namespace

Tensor::Tensor(std::vector<int> s)
    : shape(std::move(s)), values(shape_numel(shape), 0.0) {}

Tensor::Tensor(std::vector<int> s, std::vector<double> v)
    : shape(std::move(s)), values(std::move(v)) {
  if (shape_numel(shape) != values.size()) {
    throw std::invalid_argument("tensor shape/data size mismatch");
  }
}

Tensor Tensor::full(std::vector<int> s, double fill) {
  Tensor t(std::move(s));
  std::fill(t.values.begin(), t.values.end(), fill);
  return t;
}

Tensor Tensor::row(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return Tensor({1, n}, std::move(v));
}

int Tensor::cols() const { return shape.empty() ? 0 : shape.back(); }

int Tensor::rows() const {
  const int c = cols();
  return c == 0 ? 0 : static_cast<int>(numel()) / c;
}

double& Tensor::at(int r, int c) {
  return values[static_cast<size_t>(r) * cols() + c];
}

double Tensor::at(int r, int c) const {
  return values[static_cast<size_t>(r) * cols() + c];
}

bool Tensor::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor t_add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  Tensor out(a.shape);
  for (size_t i = 0; i < a.values.size(); ++i) {
    out.values[i] = a.values[i] + b.values[i];
  }
  return out;
}

Tensor t_sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  Tensor out(a.shape);
  for (size_t i = 0; i < a.values.size(); ++i) {
    out.values[i] = a.values[i] - b.values[i];
  }
  return out;
}

Tensor t_mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  Tensor out(a.shape);
  for (size_t i = 0; i < a.values.size(); ++i) {
    out.values[i] = a.values[i] * b.values[i];
  }
  return out;
}

Tensor t_scale(const Tensor& a, double c) {
  return map(a, [c](double v) { return v * c; });
}

Tensor t_offset(const Tensor& a, double c) {
  return map(a, [c](double v) { return v + c; });
}

Tensor t_smul(double s, const Tensor& a) { return t_scale(a, s); }

Tensor t_inv(const Tensor& a) {
  return map(a, [](double v) { return 1.0 / v; });
}

Tensor t_matmul(const Tensor& a, const Tensor& b) {
  const int m = a.rows(), k = a.cols(), k2 = b.rows(), n = b.cols();
  if (k != k2) {
    throw std::invalid_argument("matmul: inner dims " + a.shape_str() + " vs " +
                                b.shape_str());
  }
  Tensor out({m, n});
  for (int i = 0; i < m; ++i) {
    const double* arow = &a.values[static_cast<size_t>(i) * k];
    double* orow = &out.values[static_cast<size_t>(i) * n];
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = &b.values[static_cast<size_t>(p) * n];
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Tensor t_transpose(const Tensor& a) {
  const int m = a.rows(), n = a.cols();
  Tensor out({n, m});
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
  }
  return out;
}

Tensor t_tanh(const Tensor& a) {
  return map(a, [](double v) { return std::tanh(v); });
}

Tensor t_sigmoid(const Tensor& a) {
  return map(a, [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Tensor t_exp(const Tensor& a) {
  return map(a, [](double v) { return std::exp(v); });
}

Tensor t_log(const Tensor& a) {
  return map(a, [](double v) { return std::log(v); });
}

Tensor t_sum_all(const Tensor& a) {
  return Tensor::scalar(
      std::accumulate(a.values.begin(), a.values.end(), 0.0));
}

Tensor t_concat_rows(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat of nothing");
  const int cols = parts[0]->cols();
  int rows = 0;
  for (const Tensor* p : parts) {
    if (p->cols() != cols) {
      throw std::invalid_argument("concat_rows: column mismatch");
    }
    rows += p->rows();
  }
  Tensor out({rows, cols});
  size_t off = 0;
  for (const Tensor* p : parts) {
    std::copy(p->values.begin(), p->values.end(), out.values.begin() + off);
    off += p->values.size();
  }
  return out;
}

Tensor t_slice_rows(const Tensor& a, int r0, int nrows) {
  if (r0 < 0 || nrows <= 0 || r0 + nrows > a.rows()) {
    throw std::invalid_argument("slice_rows out of range");
  }
  const int c = a.cols();
  Tensor out({nrows, c});
  std::copy(a.values.begin() + static_cast<size_t>(r0) * c,
            a.values.begin() + static_cast<size_t>(r0 + nrows) * c,
            out.values.begin());
  return out;
}

Tensor t_reshape(const Tensor& a, std::vector<int> s) {
  Tensor out(std::move(s), a.values);
  return out;
}

void t_axpy(Tensor& acc, const Tensor& x, double a) {
  check_same_shape(acc, x, "axpy");
  for (size_t i = 0; i < acc.values.size(); ++i) {
    acc.values[i] += a * x.values[i];
  }
}

}  // namespace mspec::nn
