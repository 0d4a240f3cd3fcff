#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tqlab/denoiser.hpp"
#include "tqlab/schedule.hpp"

namespace tq {

/// Any noise predictor: the full-precision model, a quantized assembly, or an
/// instrumented wrapper. x is [N x d], t in [1, T]; returns epsilon-hat.
using EpsilonFn = std::function<Tensor(const Tensor& x, int t)>;

EpsilonFn fp_epsilon(const DenoiserGraph& model);

/// Closed-form forward noising: sqrt(abar_t) x0 + sqrt(1 - abar_t) noise.
Tensor q_sample(const Tensor& x0, int t, const Tensor& noise, const NoiseSchedule& sched);

/// One reverse DDPM update. z must be zero when t == 1 (the last step is
/// deterministic; sigma_1 == 0).
Tensor denoise_step(const EpsilonFn& eps, const Tensor& x_t, int t, const NoiseSchedule& sched,
                    const Tensor& z);

/// Generalized DDIM update from t to t_prev (t_prev == 0 lands on x0, with
/// abar_0 := 1). The public samplers use eta == 0 only; eta == 1 with z == 0
/// reproduces the deterministic part of the DDPM update and is used to
/// cross-check the two samplers.
Tensor ddim_step(const EpsilonFn& eps, const Tensor& x_t, int t, int t_prev,
                 const NoiseSchedule& sched, double eta, const Tensor& z);

enum class SamplerKind { kDdpm, kDdim };

struct SampleOptions {
  SamplerKind sampler = SamplerKind::kDdpm;
  int ddim_steps = 0;  // 0 means T
  std::int64_t batch = 256;
  std::uint64_t seed = 0;
};

/// Generates `count` 2-D points. Batches draw from independent seeded noise
/// streams keyed by batch index, so the output equals the single-threaded
/// concatenation regardless of scheduling.
Tensor sample(const EpsilonFn& eps, std::int64_t count, const NoiseSchedule& sched,
              const SampleOptions& opts);

/// Uniform ddim subsequence tau_1 < ... < tau_S == T.
std::vector<int> ddim_timesteps(int T, int steps);

/// Calibration pairs (x_t, t): trajectories from the supplied predictor,
/// subsampled every `stride` timesteps.
struct CalibSet {
  std::vector<int> ts;          // sorted descending
  std::map<int, Tensor> x_at;   // t -> [n_traj x d]
};

CalibSet collect_trajectories(const EpsilonFn& eps, const NoiseSchedule& sched,
                              std::int64_t n_traj, int stride, int data_dim,
                              std::uint64_t seed);

}  // namespace tq
