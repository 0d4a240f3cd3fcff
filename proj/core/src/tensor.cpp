#include "tqlab/tensor.hpp"

#include <cmath>
#include <sstream>

#include "tqlab/error.hpp"

namespace tq {

std::int64_t shape_numel(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    if (d <= 0) throw DimensionError("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<std::int64_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (shape_numel(shape) != numel())
    throw DimensionError("shape " + shape_str() + " does not match data length " +
                         std::to_string(data.size()));
}

Tensor Tensor::zeros(std::vector<std::int64_t> shape) {
  auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

Tensor Tensor::full(std::vector<std::int64_t> shape, double value) {
  auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::row(std::vector<double> values) {
  auto n = static_cast<std::int64_t>(values.size());
  return Tensor({1, n}, std::move(values));
}

std::int64_t Tensor::rows() const {
  if (ndim() == 1) return 1;
  if (ndim() == 2) return shape[0];
  throw DimensionError("rows() requires a 1-D or 2-D tensor, got " + shape_str());
}

std::int64_t Tensor::cols() const {
  if (ndim() == 1) return shape[0];
  if (ndim() == 2) return shape[1];
  throw DimensionError("cols() requires a 1-D or 2-D tensor, got " + shape_str());
}

double& Tensor::at(std::int64_t r, std::int64_t c) {
  return data[static_cast<std::size_t>(r * cols() + c)];
}

double Tensor::at(std::int64_t r, std::int64_t c) const {
  return data[static_cast<std::size_t>(r * cols() + c)];
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << "]";
  return os.str();
}

bool operator==(const Tensor& a, const Tensor& b) {
  return a.shape == b.shape && a.data == b.data;
}

void check_finite(const Tensor& t, const char* what) {
  if (!t.all_finite()) throw OptimError(std::string(what) + ": non-finite values");
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
}

}  // namespace

bool broadcastable(const Tensor& a, const Tensor& b) {
  if (a.same_shape(b)) return true;
  if (a.ndim() != 2) return false;
  if (b.ndim() == 1 && b.shape[0] == a.shape[1]) return true;
  if (b.ndim() == 2 && b.shape[0] == 1 && b.shape[1] == a.shape[1]) return true;
  return false;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2)
    throw DimensionError("matmul: operands must be 2-D, got " + a.shape_str() + " and " +
                         b.shape_str());
  if (a.shape[1] != b.shape[0])
    throw DimensionError("matmul: inner dimensions disagree, " + a.shape_str() + " vs " +
                         b.shape_str());
  const std::int64_t m = a.shape[0], k = a.shape[1], p = b.shape[1];
  Tensor out = Tensor::zeros({m, p});
  // i-k-j loop order keeps b and out accesses contiguous.
  for (std::int64_t i = 0; i < m; ++i) {
    const double* arow = a.data.data() + i * k;
    double* orow = out.data.data() + i * p;
    for (std::int64_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      const double* brow = b.data.data() + kk * p;
      for (std::int64_t j = 0; j < p; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  if (a.ndim() != 2) throw DimensionError("transpose: 2-D required, got " + a.shape_str());
  const std::int64_t m = a.shape[0], n = a.shape[1];
  Tensor out = Tensor::zeros({n, m});
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < n; ++j) out.data[j * m + i] = a.data[i * n + j];
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.same_shape(b)) {
    Tensor out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
  }
  if (!broadcastable(a, b))
    throw DimensionError("add: incompatible shapes " + a.shape_str() + " and " + b.shape_str());
  const std::int64_t n = a.shape[0], c = a.shape[1];
  Tensor out = a;
  for (std::int64_t r = 0; r < n; ++r)
    for (std::int64_t j = 0; j < c; ++j) out.data[r * c + j] += b.data[j];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
  return out;
}

Tensor scale(const Tensor& a, double c) {
  Tensor out = a;
  for (double& v : out.data) v *= c;
  return out;
}

Tensor silu(const Tensor& a) {
  Tensor out = a;
  for (double& v : out.data) v = v / (1.0 + std::exp(-v));
  return out;
}

Tensor concat(const Tensor& a, const Tensor& b) {
  if (a.ndim() == 1 && b.ndim() == 1) {
    Tensor out = Tensor::zeros({a.shape[0] + b.shape[0]});
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.shape[0]);
    return out;
  }
  if (a.ndim() == 2 && b.ndim() == 2 && a.shape[0] == b.shape[0]) {
    const std::int64_t n = a.shape[0], ca = a.shape[1], cb = b.shape[1];
    Tensor out = Tensor::zeros({n, ca + cb});
    for (std::int64_t r = 0; r < n; ++r) {
      for (std::int64_t j = 0; j < ca; ++j) out.data[r * (ca + cb) + j] = a.data[r * ca + j];
      for (std::int64_t j = 0; j < cb; ++j) out.data[r * (ca + cb) + ca + j] = b.data[r * cb + j];
    }
    return out;
  }
  throw DimensionError("concat: incompatible shapes " + a.shape_str() + " and " + b.shape_str());
}

double sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data) s += v;
  return s;
}

double mean(const Tensor& a) { return sum(a) / static_cast<double>(a.numel()); }

double squared_norm(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return s;
}

Tensor stack_rows(const std::vector<Tensor>& rows, const std::vector<int>& row_of) {
  if (rows.empty()) throw DimensionError("stack_rows: no rows");
  const std::int64_t w = rows[0].cols();
  Tensor out = Tensor::zeros({static_cast<std::int64_t>(row_of.size()), w});
  for (std::size_t r = 0; r < row_of.size(); ++r) {
    const auto src = static_cast<std::size_t>(row_of[r]);
    if (src >= rows.size()) throw DimensionError("stack_rows: assignment out of range");
    if (rows[src].cols() != w || rows[src].rows() != 1)
      throw DimensionError("stack_rows: rows must be [1 x w]");
    for (std::int64_t j = 0; j < w; ++j)
      out.data[static_cast<std::int64_t>(r) * w + j] = rows[src].data[static_cast<std::size_t>(j)];
  }
  return out;
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

}  // namespace tq
