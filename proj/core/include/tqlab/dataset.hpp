#pragma once

#include <cstdint>
#include <string>

#include "tqlab/tensor.hpp"

namespace tq {

/// Reproducible 2-D point distributions standing in for image datasets.
struct ToyDataset {
  std::string name;
  Tensor points;  // [n x 2]
  std::uint64_t seed = 0;
};

/// name: "gaussian-mixture-8" (eight modes on a circle) or "swiss-roll".
ToyDataset make_dataset(const std::string& name, std::int64_t count, std::uint64_t seed);

/// Rows `index[i]` of `points` gathered into a batch.
Tensor take_rows(const Tensor& points, const std::vector<std::int64_t>& index);

}  // namespace tq
