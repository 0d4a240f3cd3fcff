#include "tqlab/autodiff.hpp"

#include <cmath>

#include "tqlab/error.hpp"

namespace tq {

const Tensor& Value::tensor() const {
  if (!tape || id < 0) throw ContractError("Value not bound to a tape");
  return tape->tensor(id);
}

const Tensor& GradMap::get(const std::string& name) const {
  auto it = grads_.find(name);
  if (it == grads_.end()) throw ContractError("parameter not on tape: " + name);
  return it->second;
}

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Value Tape::param(const std::string& name, Tensor init) {
  if (params_.count(name)) throw ContractError("duplicate parameter on tape: " + name);
  Node n;
  n.op = Op::kParam;
  n.out = std::move(init);
  int id = push(std::move(n));
  params_[name] = id;
  return {this, id};
}

Value Tape::input(Tensor v) {
  Node n;
  n.op = Op::kLeaf;
  n.out = std::move(v);
  return {this, push(std::move(n))};
}

namespace {

Tape* common_tape(const Value& a, const Value& b, const char* op) {
  if (!a.tape || !b.tape || a.tape != b.tape)
    throw ContractError(std::string(op) + ": operands must live on the same tape");
  return a.tape;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

#define TQ_NODE(tp, node) Value{tp, (tp)->push(std::move(node))}

Value matmul(const Value& a, const Value& b) {
  Tape* t = common_tape(a, b, "matmul");
  Tape::Node n;
  n.op = Tape::Op::kMatMul;
  n.in = {a.id, b.id, -1};
  n.out = matmul(a.tensor(), b.tensor());
  return TQ_NODE(t, n);
}

Value add(const Value& a, const Value& b) {
  Tape* t = common_tape(a, b, "add");
  Tape::Node n;
  n.op = a.tensor().same_shape(b.tensor()) ? Tape::Op::kAdd : Tape::Op::kAddBroadcast;
  n.in = {a.id, b.id, -1};
  n.out = add(a.tensor(), b.tensor());
  return TQ_NODE(t, n);
}

Value sub(const Value& a, const Value& b) {
  Tape* t = common_tape(a, b, "sub");
  Tape::Node n;
  n.op = Tape::Op::kSub;
  n.in = {a.id, b.id, -1};
  n.out = sub(a.tensor(), b.tensor());
  return TQ_NODE(t, n);
}

Value mul(const Value& a, const Value& b) {
  Tape* t = common_tape(a, b, "mul");
  Tape::Node n;
  n.op = Tape::Op::kMul;
  n.in = {a.id, b.id, -1};
  n.out = mul(a.tensor(), b.tensor());
  return TQ_NODE(t, n);
}

Value scale(const Value& a, double c) {
  Tape::Node n;
  n.op = Tape::Op::kScale;
  n.in = {a.id, -1, -1};
  n.c0 = c;
  n.out = scale(a.tensor(), c);
  return TQ_NODE(a.tape, n);
}

Value silu(const Value& a) {
  Tape::Node n;
  n.op = Tape::Op::kSilu;
  n.in = {a.id, -1, -1};
  n.out = silu(a.tensor());
  return TQ_NODE(a.tape, n);
}

Value concat(const Value& a, const Value& b) {
  Tape* t = common_tape(a, b, "concat");
  Tape::Node n;
  n.op = Tape::Op::kConcat;
  n.in = {a.id, b.id, -1};
  n.out = concat(a.tensor(), b.tensor());
  return TQ_NODE(t, n);
}

Value sum(const Value& a) {
  Tape::Node n;
  n.op = Tape::Op::kSum;
  n.in = {a.id, -1, -1};
  n.out = Tensor::scalar(sum(a.tensor()));
  return TQ_NODE(a.tape, n);
}

Value mean(const Value& a) {
  Tape::Node n;
  n.op = Tape::Op::kMean;
  n.in = {a.id, -1, -1};
  n.out = Tensor::scalar(mean(a.tensor()));
  return TQ_NODE(a.tape, n);
}

Value squared_norm(const Value& a) {
  Tape::Node n;
  n.op = Tape::Op::kSquaredNorm;
  n.in = {a.id, -1, -1};
  n.out = Tensor::scalar(squared_norm(a.tensor()));
  return TQ_NODE(a.tape, n);
}

Value cosine_similarity(const Value& a, const Value& b) {
  Tape* t = common_tape(a, b, "cosine_similarity");
  if (!a.tensor().same_shape(b.tensor()))
    throw DimensionError("cosine_similarity: shape mismatch");
  Tape::Node n;
  n.op = Tape::Op::kCosine;
  n.in = {a.id, b.id, -1};
  const double d = dot(a.tensor(), b.tensor());
  const double na = std::sqrt(squared_norm(a.tensor()));
  const double nb = std::sqrt(squared_norm(b.tensor()));
  n.out = Tensor::scalar(d / (na * nb));
  return TQ_NODE(t, n);
}

Value stack_rows(const std::vector<Value>& rows, const std::vector<int>& row_of) {
  if (rows.empty()) throw ContractError("stack_rows: no rows");
  Tape* t = rows[0].tape;
  const std::int64_t w = rows[0].tensor().cols();
  Tape::Node n;
  n.op = Tape::Op::kStackRows;
  n.row_of = row_of;
  n.multi_in.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.tape != t) throw ContractError("stack_rows: rows on different tapes");
    if (r.tensor().cols() != w || r.tensor().rows() != 1)
      throw DimensionError("stack_rows: rows must be [1 x w]");
    n.multi_in.push_back(r.id);
  }
  const auto nrows = static_cast<std::int64_t>(row_of.size());
  Tensor out = Tensor::zeros({nrows, w});
  for (std::int64_t r = 0; r < nrows; ++r) {
    const int src = row_of[static_cast<std::size_t>(r)];
    if (src < 0 || src >= static_cast<int>(rows.size()))
      throw ContractError("stack_rows: assignment out of range");
    const Tensor& row = rows[static_cast<std::size_t>(src)].tensor();
    for (std::int64_t j = 0; j < w; ++j) out.data[r * w + j] = row.data[j];
  }
  n.out = std::move(out);
  return TQ_NODE(t, n);
}

Value round_ste(const Value& a) {
  Tape::Node n;
  n.op = Tape::Op::kRoundSte;
  n.in = {a.id, -1, -1};
  Tensor out = a.tensor();
  for (double& v : out.data) v = std::nearbyint(v);
  n.out = std::move(out);
  return TQ_NODE(a.tape, n);
}

Value clamp_ste(const Value& a, double lo, double hi) {
  Tape::Node n;
  n.op = Tape::Op::kClampSte;
  n.in = {a.id, -1, -1};
  n.c0 = lo;
  n.c1 = hi;
  Tensor out = a.tensor();
  for (double& v : out.data) v = v < lo ? lo : (v > hi ? hi : v);
  n.out = std::move(out);
  return TQ_NODE(a.tape, n);
}

Value fake_quant(const Value& x, const Value& s, const Value& z, int bits, int axis) {
  Tape* t = common_tape(x, s, "fake_quant");
  common_tape(x, z, "fake_quant");
  if (bits < 2) throw ContractError("fake_quant: bits must be >= 2");
  const Tensor& xv = x.tensor();
  const Tensor& sv = s.tensor();
  const Tensor& zv = z.tensor();
  if (!sv.same_shape(zv)) throw DimensionError("fake_quant: s and z shapes differ");
  const std::int64_t nch = sv.numel();
  if (nch != 1) {
    if (axis < 0 || xv.ndim() != 2 || xv.shape[axis] != nch)
      throw DimensionError("fake_quant: per-channel s/z must match x along axis");
  }
  const double qmax = static_cast<double>((std::int64_t{1} << bits) - 1);

  Tape::Node n;
  n.op = Tape::Op::kFakeQuant;
  n.in = {x.id, s.id, z.id};
  n.axis = axis;
  Tensor out = xv;
  // aux holds the clamped code minus zero offset per element; sign of the
  // stored value's companion mask is encoded via a parallel buffer appended
  // after the codes: aux = [code-z ...][mask ...].
  Tensor aux = Tensor::zeros({2 * xv.numel()});
  const std::int64_t cols = xv.ndim() == 2 ? xv.shape[1] : xv.numel();
  for (std::int64_t e = 0; e < xv.numel(); ++e) {
    std::int64_t ch = 0;
    if (nch != 1) ch = (axis == 0) ? e / cols : e % cols;
    const double sc = sv.data[static_cast<std::size_t>(ch)];
    const double zc = zv.data[static_cast<std::size_t>(ch)];
    const double pre = std::nearbyint(xv.data[static_cast<std::size_t>(e)] / sc) + zc;
    const bool in_range = pre >= 0.0 && pre <= qmax;
    const double code = pre < 0.0 ? 0.0 : (pre > qmax ? qmax : pre);
    out.data[static_cast<std::size_t>(e)] = sc * (code - zc);
    aux.data[static_cast<std::size_t>(e)] = code - zc;
    aux.data[static_cast<std::size_t>(xv.numel() + e)] = in_range ? 1.0 : 0.0;
  }
  n.out = std::move(out);
  n.aux = std::move(aux);
  return TQ_NODE(t, n);
}

GradMap Tape::backward(const Value& loss) {
  if (loss.tape != this) throw ContractError("backward: loss lives on another tape");
  if (loss.tensor().numel() != 1) throw ContractError("backward: loss must be a scalar");

  std::vector<Tensor> grad(nodes_.size());
  std::vector<bool> has(nodes_.size(), false);
  auto accum = [&](int id, const Tensor& g) {
    auto idx = static_cast<std::size_t>(id);
    if (!has[idx]) {
      grad[idx] = g;
      has[idx] = true;
    } else {
      for (std::size_t i = 0; i < g.data.size(); ++i) grad[idx].data[i] += g.data[i];
    }
  };

  grad[static_cast<std::size_t>(loss.id)] = Tensor::scalar(1.0);
  has[static_cast<std::size_t>(loss.id)] = true;

  for (int i = loss.id; i >= 0; --i) {
    const auto idx = static_cast<std::size_t>(i);
    if (!has[idx]) continue;
    const Node& n = nodes_[idx];
    const Tensor& g = grad[idx];
    switch (n.op) {
      case Op::kLeaf:
      case Op::kParam:
        break;
      case Op::kMatMul: {
        const Tensor& a = tensor(n.in[0]);
        const Tensor& b = tensor(n.in[1]);
        accum(n.in[0], matmul(g, transpose(b)));
        accum(n.in[1], matmul(transpose(a), g));
        break;
      }
      case Op::kAdd:
        accum(n.in[0], g);
        accum(n.in[1], g);
        break;
      case Op::kAddBroadcast: {
        accum(n.in[0], g);
        const Tensor& b = tensor(n.in[1]);
        Tensor gb = Tensor::zeros(b.shape);
        const std::int64_t c = g.shape[1];
        for (std::int64_t r = 0; r < g.shape[0]; ++r)
          for (std::int64_t j = 0; j < c; ++j) gb.data[static_cast<std::size_t>(j)] += g.data[r * c + j];
        accum(n.in[1], gb);
        break;
      }
      case Op::kSub:
        accum(n.in[0], g);
        accum(n.in[1], scale(g, -1.0));
        break;
      case Op::kMul:
        accum(n.in[0], mul(g, tensor(n.in[1])));
        accum(n.in[1], mul(g, tensor(n.in[0])));
        break;
      case Op::kScale:
        accum(n.in[0], scale(g, n.c0));
        break;
      case Op::kSilu: {
        const Tensor& x = tensor(n.in[0]);
        Tensor gx = g;
        for (std::size_t e = 0; e < gx.data.size(); ++e) {
          const double sg = sigmoid(x.data[e]);
          gx.data[e] *= sg * (1.0 + x.data[e] * (1.0 - sg));
        }
        accum(n.in[0], gx);
        break;
      }
      case Op::kConcat: {
        const Tensor& a = tensor(n.in[0]);
        const Tensor& b = tensor(n.in[1]);
        Tensor ga = Tensor::zeros(a.shape), gb = Tensor::zeros(b.shape);
        if (a.ndim() == 1) {
          for (std::int64_t j = 0; j < a.shape[0]; ++j) ga.data[static_cast<std::size_t>(j)] = g.data[static_cast<std::size_t>(j)];
          for (std::int64_t j = 0; j < b.shape[0]; ++j)
            gb.data[static_cast<std::size_t>(j)] = g.data[static_cast<std::size_t>(a.shape[0] + j)];
        } else {
          const std::int64_t ca = a.shape[1], cb = b.shape[1];
          for (std::int64_t r = 0; r < a.shape[0]; ++r) {
            for (std::int64_t j = 0; j < ca; ++j) ga.data[r * ca + j] = g.data[r * (ca + cb) + j];
            for (std::int64_t j = 0; j < cb; ++j) gb.data[r * cb + j] = g.data[r * (ca + cb) + ca + j];
          }
        }
        accum(n.in[0], ga);
        accum(n.in[1], gb);
        break;
      }
      case Op::kSum:
        accum(n.in[0], Tensor::full(tensor(n.in[0]).shape, g.data[0]));
        break;
      case Op::kMean: {
        const Tensor& a = tensor(n.in[0]);
        accum(n.in[0], Tensor::full(a.shape, g.data[0] / static_cast<double>(a.numel())));
        break;
      }
      case Op::kSquaredNorm:
        accum(n.in[0], scale(tensor(n.in[0]), 2.0 * g.data[0]));
        break;
      case Op::kCosine: {
        const Tensor& a = tensor(n.in[0]);
        const Tensor& b = tensor(n.in[1]);
        const double d = dot(a, b);
        const double na2 = squared_norm(a), nb2 = squared_norm(b);
        const double na = std::sqrt(na2), nb = std::sqrt(nb2);
        const double cosv = d / (na * nb);
        Tensor ga = a, gb = b;
        for (std::size_t e = 0; e < a.data.size(); ++e) {
          ga.data[e] = g.data[0] * (b.data[e] / (na * nb) - cosv * a.data[e] / na2);
          gb.data[e] = g.data[0] * (a.data[e] / (na * nb) - cosv * b.data[e] / nb2);
        }
        accum(n.in[0], ga);
        accum(n.in[1], gb);
        break;
      }
      case Op::kStackRows: {
        const std::int64_t w = n.out.shape[1];
        for (std::size_t r = 0; r < n.row_of.size(); ++r) {
          Tensor gr = Tensor::zeros({1, w});
          for (std::int64_t j = 0; j < w; ++j)
            gr.data[static_cast<std::size_t>(j)] = g.data[static_cast<std::int64_t>(r) * w + j];
          accum(n.multi_in[static_cast<std::size_t>(n.row_of[r])], gr);
        }
        break;
      }
      case Op::kRoundSte:
        accum(n.in[0], g);
        break;
      case Op::kClampSte: {
        const Tensor& x = tensor(n.in[0]);
        Tensor gx = g;
        for (std::size_t e = 0; e < gx.data.size(); ++e)
          if (x.data[e] < n.c0 || x.data[e] > n.c1) gx.data[e] = 0.0;
        accum(n.in[0], gx);
        break;
      }
      case Op::kFakeQuant: {
        const Tensor& x = tensor(n.in[0]);
        const Tensor& s = tensor(n.in[1]);
        const std::int64_t nel = x.numel();
        const std::int64_t nch = s.numel();
        const std::int64_t cols = x.ndim() == 2 ? x.shape[1] : nel;
        Tensor gx = g;
        Tensor gs = Tensor::zeros(s.shape);
        Tensor gz = Tensor::zeros(s.shape);
        for (std::int64_t e = 0; e < nel; ++e) {
          std::int64_t ch = 0;
          if (nch != 1) ch = (n.axis == 0) ? e / cols : e % cols;
          const double code_minus_z = n.aux.data[static_cast<std::size_t>(e)];
          const bool in_range = n.aux.data[static_cast<std::size_t>(nel + e)] != 0.0;
          const double ge = g.data[static_cast<std::size_t>(e)];
          if (!in_range) gx.data[static_cast<std::size_t>(e)] = 0.0;
          gs.data[static_cast<std::size_t>(ch)] += ge * code_minus_z;
          if (!in_range) gz.data[static_cast<std::size_t>(ch)] += ge * (-s.data[static_cast<std::size_t>(ch)]);
        }
        accum(n.in[0], gx);
        accum(n.in[1], gs);
        accum(n.in[2], gz);
        break;
      }
    }
  }

  GradMap out;
  for (const auto& [name, id] : params_) {
    const auto idx = static_cast<std::size_t>(id);
    out.set(name, has[idx] ? std::move(grad[idx]) : Tensor::zeros(nodes_[idx].out.shape));
  }
  return out;
}

}  // namespace tq
