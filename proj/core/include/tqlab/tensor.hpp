#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tq {

/// Dense row-major tensor of doubles. The universal value carrier: samples,
/// activations, weights, temporal features all use this type.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::int64_t> s, std::vector<double> d);

  static Tensor zeros(std::vector<std::int64_t> shape);
  static Tensor full(std::vector<std::int64_t> shape, double value);
  static Tensor scalar(double value);
  static Tensor row(std::vector<double> values);  // shape [1 x n]

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }

  // 2-D helpers; most of the artifact works on matrices and row vectors.
  std::int64_t rows() const;
  std::int64_t cols() const;
  double& at(std::int64_t r, std::int64_t c);
  double at(std::int64_t r, std::int64_t c) const;

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
  std::string shape_str() const;
};

bool operator==(const Tensor& a, const Tensor& b);

std::int64_t shape_numel(const std::vector<std::int64_t>& shape);

// Plain (untracked) math. Tracked counterparts live in autodiff.hpp and share
// these kernels.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);  // b may broadcast along leading axes
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor silu(const Tensor& a);
Tensor concat(const Tensor& a, const Tensor& b);  // along last axis
double sum(const Tensor& a);
double mean(const Tensor& a);
double squared_norm(const Tensor& a);
double dot(const Tensor& a, const Tensor& b);

/// True when `b` broadcasts against `a`: identical shape, or b is an
/// [n]/[1 x n] row applied to every row of a 2-D `a`.
bool broadcastable(const Tensor& a, const Tensor& b);

/// out[r, :] = rows[row_of[r]]; rows are [1 x w].
Tensor stack_rows(const std::vector<Tensor>& rows, const std::vector<int>& row_of);

void check_finite(const Tensor& t, const char* what);

}  // namespace tq
