#pragma once

#include <cstdint>

#include "tqlab/dataset.hpp"
#include "tqlab/denoiser.hpp"
#include "tqlab/schedule.hpp"

namespace tq {

struct TrainResult {
  double initial_holdout_mse = 0.0;
  double final_holdout_mse = 0.0;
  int steps = 0;
};

/// Noise-prediction training with plain fixed-rate gradient descent (no
/// momentum, no EMA). Deterministic given the seed. Throws OptimError with a
/// step diagnostic when the loss goes non-finite.
TrainResult train(DenoiserGraph& model, const ToyDataset& data, const NoiseSchedule& sched,
                  int steps, double lr, std::int64_t batch, std::uint64_t seed);

/// Mean squared noise-prediction error on a seeded held-out batch.
double holdout_mse(const DenoiserGraph& model, const ToyDataset& data,
                   const NoiseSchedule& sched, std::int64_t count, std::uint64_t seed);

}  // namespace tq
