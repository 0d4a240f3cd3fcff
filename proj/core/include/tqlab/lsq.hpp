#pragma once

#include <functional>

#include "tqlab/quant.hpp"

namespace tq {

struct LsqResult {
  QuantParams params;
  double initial_objective = 0.0;
  double final_objective = 0.0;
};

/// Learned-step-size refinement of per-tensor quantizer parameters,
/// minimizing ||fake_quant(x; s, z) - target||_F^2 (target defaults to x).
///
/// The scale gradient follows LSQ (round(u) - u inside the clamp range, the
/// clipped code value outside), with the 1/sqrt(N * qmax) gradient scaling;
/// the zero offset descends as a continuous variable and is rounded on
/// return. A deterministic coarse scan over shrink factors of the initial
/// scale seeds the descent. Best-so-far is tracked on realized (rounded-z)
/// parameters across the init, every scan candidate, and every iterate, so
/// the returned objective is never worse than p0's.
LsqResult lsq_optimize(const Tensor& x, const QuantParams& p0, int iters, double lr,
                       const Tensor* target = nullptr);

/// Provider form: the sample is re-drawn each iteration (e.g. a stochastic
/// calibration stream). The best-so-far objective is evaluated on `eval`.
LsqResult lsq_optimize(const std::function<Tensor()>& provider, const Tensor& eval,
                       const QuantParams& p0, int iters, double lr,
                       const Tensor* target = nullptr);

}  // namespace tq
