#include "tqlab/sampler.hpp"

#include <cmath>

#include "tqlab/contexts.hpp"
#include "tqlab/error.hpp"
#include "tqlab/forward.hpp"
#include "tqlab/rng.hpp"

namespace tq {

EpsilonFn fp_epsilon(const DenoiserGraph& model) {
  return [&model](const Tensor& x, int t) {
    EvalCtx ctx(model);
    return predict_noise(model, ctx, x, t);
  };
}

Tensor q_sample(const Tensor& x0, int t, const Tensor& noise, const NoiseSchedule& sched) {
  sched.check_t(t);
  if (!x0.same_shape(noise)) throw DimensionError("q_sample: noise shape mismatch");
  const double ab = sched.alpha_bar_t(t);
  Tensor out = x0;
  const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = a * x0.data[i] + b * noise.data[i];
  return out;
}

Tensor denoise_step(const EpsilonFn& eps, const Tensor& x_t, int t, const NoiseSchedule& sched,
                    const Tensor& z) {
  sched.check_t(t);
  if (!x_t.same_shape(z)) throw DimensionError("denoise_step: z shape mismatch");
  if (t == 1) {
    for (double v : z.data)
      if (v != 0.0) throw ContractError("denoise_step: z must be zero at t == 1");
  }
  const Tensor e = eps(x_t, t);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha_t(t));
  const double coef = sched.beta_t(t) / std::sqrt(1.0 - sched.alpha_bar_t(t));
  const double sig = sched.sigma_t(t);
  Tensor out = x_t;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = inv_sqrt_alpha * (x_t.data[i] - coef * e.data[i]) + sig * z.data[i];
  return out;
}

Tensor ddim_step(const EpsilonFn& eps, const Tensor& x_t, int t, int t_prev,
                 const NoiseSchedule& sched, double eta, const Tensor& z) {
  sched.check_t(t);
  if (t_prev < 0 || t_prev >= t) throw ContractError("ddim_step: need 0 <= t_prev < t");
  const Tensor e = eps(x_t, t);
  const double ab_t = sched.alpha_bar_t(t);
  const double ab_p = sched.alpha_bar_t(t_prev);
  const double sigma =
      eta * std::sqrt((1.0 - ab_p) / (1.0 - ab_t)) * std::sqrt(1.0 - ab_t / ab_p);
  const double dir = std::sqrt(std::max(0.0, 1.0 - ab_p - sigma * sigma));
  Tensor out = x_t;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double x0_hat = (x_t.data[i] - std::sqrt(1.0 - ab_t) * e.data[i]) / std::sqrt(ab_t);
    out.data[i] = std::sqrt(ab_p) * x0_hat + dir * e.data[i] + sigma * z.data[i];
  }
  return out;
}

std::vector<int> ddim_timesteps(int T, int steps) {
  if (steps < 1 || steps > T) throw ConfigError("ddim_steps must be in [1, T]");
  std::vector<int> ts(static_cast<std::size_t>(steps));
  if (steps == 1) {
    ts[0] = T;
    return ts;
  }
  for (int j = 0; j < steps; ++j) {
    const double pos = 1.0 + static_cast<double>(j) * static_cast<double>(T - 1) /
                                 static_cast<double>(steps - 1);
    ts[static_cast<std::size_t>(j)] = static_cast<int>(std::nearbyint(pos));
  }
  ts.back() = T;
  return ts;
}

namespace {

Tensor draw_normal(Rng& rng, std::int64_t rows, std::int64_t cols) {
  Tensor t = Tensor::zeros({rows, cols});
  for (double& v : t.data) v = rng.normal();
  return t;
}

Tensor sample_batch(const EpsilonFn& eps, std::int64_t rows, const NoiseSchedule& sched,
                    const SampleOptions& opts, std::uint64_t stream_seed, int data_dim) {
  Rng rng(stream_seed);
  Tensor x = draw_normal(rng, rows, data_dim);
  if (opts.sampler == SamplerKind::kDdpm) {
    for (int t = sched.T; t >= 1; --t) {
      Tensor z = t > 1 ? draw_normal(rng, rows, data_dim) : Tensor::zeros({rows, data_dim});
      x = denoise_step(eps, x, t, sched, z);
    }
  } else {
    const int steps = opts.ddim_steps > 0 ? opts.ddim_steps : sched.T;
    const auto ts = ddim_timesteps(sched.T, steps);
    const Tensor z0 = Tensor::zeros({rows, data_dim});
    for (int j = static_cast<int>(ts.size()) - 1; j >= 0; --j) {
      const int t = ts[static_cast<std::size_t>(j)];
      const int prev = j > 0 ? ts[static_cast<std::size_t>(j - 1)] : 0;
      x = ddim_step(eps, x, t, prev, sched, /*eta=*/0.0, z0);
    }
  }
  return x;
}

}  // namespace

Tensor sample(const EpsilonFn& eps, std::int64_t count, const NoiseSchedule& sched,
              const SampleOptions& opts) {
  if (count < 1) throw ConfigError("sample: count must be >= 1");
  const int d = 2;
  Tensor out = Tensor::zeros({count, d});
  std::int64_t done = 0;
  std::int64_t batch_index = 0;
  while (done < count) {
    const std::int64_t rows = std::min<std::int64_t>(opts.batch, count - done);
    const Tensor part = sample_batch(eps, rows, sched, opts,
                                     derive_seed(opts.seed, "sample-batch", {batch_index}), d);
    for (std::int64_t r = 0; r < rows; ++r)
      for (int j = 0; j < d; ++j) out.at(done + r, j) = part.at(r, j);
    done += rows;
    ++batch_index;
  }
  return out;
}

CalibSet collect_trajectories(const EpsilonFn& eps, const NoiseSchedule& sched,
                              std::int64_t n_traj, int stride, int data_dim,
                              std::uint64_t seed) {
  if (n_traj < 1 || stride < 1) throw ConfigError("collect_trajectories: bad arguments");
  CalibSet cs;
  Rng rng(derive_seed(seed, "calib"));
  Tensor x = draw_normal(rng, n_traj, data_dim);
  for (int t = sched.T; t >= 1; --t) {
    if ((sched.T - t) % stride == 0) {
      cs.ts.push_back(t);
      cs.x_at[t] = x;
    }
    Tensor z = t > 1 ? draw_normal(rng, n_traj, data_dim)
                     : Tensor::zeros({n_traj, data_dim});
    x = denoise_step(eps, x, t, sched, z);
  }
  return cs;
}

}  // namespace tq
