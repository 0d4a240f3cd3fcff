#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "tqlab/tensor.hpp"

namespace tq {

class Tape;

/// Handle to a tensor recorded on a tape.
struct Value {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor& tensor() const;
};

/// Gradients keyed by parameter name, produced by Tape::backward.
class GradMap {
 public:
  void set(const std::string& name, Tensor grad) { grads_[name] = std::move(grad); }
  /// Throws ContractError when `name` was never registered on the tape.
  const Tensor& get(const std::string& name) const;
  const std::map<std::string, Tensor>& all() const { return grads_; }

 private:
  std::map<std::string, Tensor> grads_;
};

/// Reverse-mode tape over the small operator set the artifact needs.
/// One tape per optimization run; single-threaded.
class Tape {
 public:
  /// Registers a trainable leaf. Names must be unique per tape.
  Value param(const std::string& name, Tensor init);
  /// Untracked leaf (no gradient accumulated).
  Value input(Tensor v);

  /// Gradients of a scalar loss w.r.t. every registered parameter.
  /// Unused parameters get zero gradients of their own shape.
  GradMap backward(const Value& loss);

  const Tensor& tensor(int id) const { return nodes_[static_cast<std::size_t>(id)].out; }
  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    kLeaf,
    kParam,
    kMatMul,
    kAdd,
    kAddBroadcast,
    kSub,
    kMul,
    kScale,
    kSilu,
    kConcat,
    kSum,
    kMean,
    kSquaredNorm,
    kCosine,
    kStackRows,
    kRoundSte,
    kClampSte,
    kFakeQuant,
  };

  struct Node {
    Op op = Op::kLeaf;
    std::array<int, 3> in{-1, -1, -1};
    Tensor out;
    Tensor aux;              // op-specific saved state
    double c0 = 0, c1 = 0;   // scalar arguments (clamp bounds, scale factor)
    int axis = -1;           // fake_quant channel axis
    std::vector<int> multi_in;     // stack_rows inputs
    std::vector<int> row_of;       // stack_rows assignment
  };

  int push(Node n);
  friend Value matmul(const Value&, const Value&);
  friend Value add(const Value&, const Value&);
  friend Value sub(const Value&, const Value&);
  friend Value mul(const Value&, const Value&);
  friend Value scale(const Value&, double);
  friend Value silu(const Value&);
  friend Value concat(const Value&, const Value&);
  friend Value sum(const Value&);
  friend Value mean(const Value&);
  friend Value squared_norm(const Value&);
  friend Value cosine_similarity(const Value&, const Value&);
  friend Value stack_rows(const std::vector<Value>&, const std::vector<int>&);
  friend Value round_ste(const Value&);
  friend Value clamp_ste(const Value&, double, double);
  friend Value fake_quant(const Value& x, const Value& s, const Value& z, int bits, int axis);

  std::vector<Node> nodes_;
  std::map<std::string, int> params_;
};

// Tracked operations. Mirror the plain-tensor functions in tensor.hpp; every
// call records one node on the owning tape.
Value matmul(const Value& a, const Value& b);
Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value scale(const Value& a, double c);
Value silu(const Value& a);
Value concat(const Value& a, const Value& b);
Value sum(const Value& a);
Value mean(const Value& a);
Value squared_norm(const Value& a);
Value cosine_similarity(const Value& a, const Value& b);

/// out[r, :] = rows[row_of[r]]; rows are [1 x w] values. Used to gather
/// per-timestep temporal features into a batch.
Value stack_rows(const std::vector<Value>& rows, const std::vector<int>& row_of);

/// Round to nearest (half-to-even) with straight-through gradient.
Value round_ste(const Value& a);
/// Clamp with straight-through gradient inside [lo, hi], zero outside.
Value clamp_ste(const Value& a, double lo, double hi);

/// Quantize-dequantize in real arithmetic, recorded as one primitive.
///
/// Forward: code = clamp(round(x/s) + z, 0, 2^bits - 1); out = s * (code - z).
/// z is continuously relaxed. s and z are [1] (per-tensor) or length-C
/// vectors over `axis` of a 2-D x (axis < 0 means per-tensor).
///
/// Backward: d/dx is straight-through (1 where the pre-clamp code is in
/// range, 0 where clipped); d/ds is the piecewise-true derivative (code - z),
/// which central finite differences measure away from code boundaries;
/// d/dz is -s on clipped elements and 0 in range.
Value fake_quant(const Value& x, const Value& s, const Value& z, int bits, int axis = -1);

}  // namespace tq
