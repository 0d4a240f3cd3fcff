#include "tqlab/trainer.hpp"

#include <cmath>
#include <string>

#include "tqlab/autodiff.hpp"
#include "tqlab/contexts.hpp"
#include "tqlab/error.hpp"
#include "tqlab/forward.hpp"
#include "tqlab/rng.hpp"

namespace tq {

namespace {

struct Batch {
  Tensor x_t;  // noised inputs
  Tensor noise;
  std::vector<int> ts;
};

Batch draw_batch(const ToyDataset& data, const NoiseSchedule& sched, std::int64_t count,
                 Rng& rng) {
  const std::int64_t n = data.points.rows();
  const std::int64_t d = data.points.cols();
  std::vector<std::int64_t> idx(static_cast<std::size_t>(count));
  for (auto& i : idx) i = rng.uniform_int(0, n - 1);
  Batch b;
  b.ts.resize(static_cast<std::size_t>(count));
  for (auto& t : b.ts) t = static_cast<int>(rng.uniform_int(1, sched.T));
  const Tensor x0 = take_rows(data.points, idx);
  b.noise = Tensor::zeros({count, d});
  for (double& v : b.noise.data) v = rng.normal();
  b.x_t = Tensor::zeros({count, d});
  for (std::int64_t r = 0; r < count; ++r) {
    const double ab = sched.alpha_bar_t(b.ts[static_cast<std::size_t>(r)]);
    const double ca = std::sqrt(ab), cb = std::sqrt(1.0 - ab);
    for (std::int64_t j = 0; j < d; ++j)
      b.x_t.at(r, j) = ca * x0.at(r, j) + cb * b.noise.at(r, j);
  }
  return b;
}

}  // namespace

double holdout_mse(const DenoiserGraph& model, const ToyDataset& data,
                   const NoiseSchedule& sched, std::int64_t count, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "holdout"));
  const Batch b = draw_batch(data, sched, count, rng);
  EvalCtx ctx(model);
  const Tensor pred = predict_noise_mixed(model, ctx, b.x_t, b.ts);
  return squared_norm(sub(pred, b.noise)) / static_cast<double>(pred.numel());
}

TrainResult train(DenoiserGraph& model, const ToyDataset& data, const NoiseSchedule& sched,
                  int steps, double lr, std::int64_t batch, std::uint64_t seed) {
  if (steps < 1) throw ConfigError("train: steps must be >= 1");
  if (batch < 1) throw ConfigError("train: batch must be >= 1");

  TrainResult result;
  result.steps = steps;
  result.initial_holdout_mse = holdout_mse(model, data, sched, 512, seed);

  for (int step = 0; step < steps; ++step) {
    Rng rng(derive_seed(seed, "train-step", {step}));
    const Batch b = draw_batch(data, sched, batch, rng);

    Tape tape;
    TrainCtx ctx(model, tape);
    const Value pred = predict_noise_mixed(model, ctx, tape.input(b.x_t), b.ts);
    const Value err = sub(pred, tape.input(b.noise));
    const Value loss = mean(mul(err, err));
    const double loss_v = loss.tensor().data[0];
    if (!std::isfinite(loss_v))
      throw OptimError("training diverged at step " + std::to_string(step) +
                       " (loss non-finite)");

    const GradMap grads = tape.backward(loss);
    for (auto& [name, p] : model.mutable_params()) {
      const Tensor& g = grads.get(name);
      for (std::size_t i = 0; i < p.data.size(); ++i) p.data[i] -= lr * g.data[i];
    }
  }

  result.final_holdout_mse = holdout_mse(model, data, sched, 512, seed);
  return result;
}

}  // namespace tq
