#include "tqlab/lsq.hpp"

#include <algorithm>
#include <cmath>

#include "tqlab/error.hpp"

namespace tq {

namespace {

constexpr double kScaleFloor = 1e-12;

double realized_objective(const Tensor& x, const Tensor& y, double s, double z_cont, int bits) {
  const double qmax = static_cast<double>((std::int64_t{1} << bits) - 1);
  const double z = std::max(0.0, std::min(qmax, round_half_even(z_cont)));
  double sse = 0.0;
  for (std::size_t e = 0; e < x.data.size(); ++e) {
    const double pre = round_half_even(x.data[e] / s) + z;
    const double code = pre < 0.0 ? 0.0 : (pre > qmax ? qmax : pre);
    const double err = s * (code - z) - y.data[e];
    sse += err * err;
  }
  return sse;
}

struct Grads {
  double gs = 0.0;
  double gz = 0.0;
  double objective = 0.0;
};

// d/ds uses LSQ's estimator: (round(u) - u) inside the clamp range, the
// clipped (code - z) outside; d/dz is -s on clipped elements only.
Grads lsq_grads(const Tensor& x, const Tensor& y, double s, double z, int bits) {
  const double qmax = static_cast<double>((std::int64_t{1} << bits) - 1);
  Grads g;
  for (std::size_t e = 0; e < x.data.size(); ++e) {
    const double u = x.data[e] / s;
    const double pre = round_half_even(u) + z;
    const bool in_range = pre >= 0.0 && pre <= qmax;
    const double code = pre < 0.0 ? 0.0 : (pre > qmax ? qmax : pre);
    const double xhat = s * (code - z);
    const double r = xhat - y.data[e];
    g.objective += r * r;
    const double dxhat_ds = in_range ? (round_half_even(u) - u) : (code - z);
    g.gs += 2.0 * r * dxhat_ds;
    if (!in_range) g.gz += 2.0 * r * (-s);
  }
  return g;
}

LsqResult run(const std::function<Tensor()>& provider, const Tensor& eval, const QuantParams& p0,
              int iters, double lr, const Tensor* target) {
  if (iters < 1) throw ContractError("lsq_optimize: iters must be >= 1");
  p0.validate();
  if (p0.channels() != 1) throw ContractError("lsq_optimize: per-tensor parameters only");
  const int bits = p0.bits;
  const Tensor& y_eval = target ? *target : eval;
  if (!y_eval.same_shape(eval)) throw DimensionError("lsq_optimize: target shape mismatch");

  double s = p0.scale[0];
  double z = static_cast<double>(p0.zero[0]);

  double best_obj = realized_objective(eval, y_eval, s, z, bits);
  double best_s = s, best_z = z;
  const double init_obj = best_obj;
  auto consider = [&](double cs, double cz) {
    const double obj = realized_objective(eval, y_eval, cs, cz, bits);
    if (obj < best_obj) {
      best_obj = obj;
      best_s = cs;
      best_z = cz;
    }
  };

  // Deterministic scan over shrink factors of the initial scale before the
  // descent; filters out grossly misfit inits cheaply.
  for (int k = 0; k < 32; ++k) {
    const double f = 0.125 + static_cast<double>(k) * (1.25 - 0.125) / 31.0;
    consider(std::max(kScaleFloor, s * f), z);
  }
  s = best_s;
  z = best_z;

  const double qmax_d = static_cast<double>(p0.qmax());
  const double grad_scale = 1.0 / std::sqrt(static_cast<double>(eval.numel()) * qmax_d);
  for (int it = 0; it < iters; ++it) {
    const Tensor x = provider();
    const Tensor& y = target ? *target : x;
    const Grads g = lsq_grads(x, y, s, z, bits);
    if (!std::isfinite(g.objective) || !std::isfinite(g.gs) || !std::isfinite(g.gz))
      throw OptimError("lsq_optimize: non-finite loss");
    s = std::max(kScaleFloor, s - lr * grad_scale * g.gs);
    z = z - lr * grad_scale * g.gz;
    z = std::max(0.0, std::min(qmax_d, z));
    consider(s, z);
  }

  LsqResult res;
  res.params = p0;
  res.params.scale = {best_s};
  res.params.zero = {static_cast<std::int32_t>(
      std::max(0.0, std::min(qmax_d, round_half_even(best_z))))};
  res.params.validate();
  res.initial_objective = init_obj;
  res.final_objective = best_obj;
  return res;
}

}  // namespace

LsqResult lsq_optimize(const Tensor& x, const QuantParams& p0, int iters, double lr,
                       const Tensor* target) {
  return run([&x]() { return x; }, x, p0, iters, lr, target);
}

LsqResult lsq_optimize(const std::function<Tensor()>& provider, const Tensor& eval,
                       const QuantParams& p0, int iters, double lr, const Tensor* target) {
  return run(provider, eval, p0, iters, lr, target);
}

}  // namespace tq
