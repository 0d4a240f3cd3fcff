#include "tqlab/dataset.hpp"

#include <cmath>

#include "tqlab/error.hpp"
#include "tqlab/rng.hpp"

namespace tq {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Tensor gaussian_mixture_8(std::int64_t count, Rng& rng) {
  // Eight modes on a circle of radius 1.6, mode noise 0.12; roughly unit
  // scale overall so the standard q_sample coefficients work unchanged.
  Tensor pts = Tensor::zeros({count, 2});
  for (std::int64_t i = 0; i < count; ++i) {
    const auto mode = rng.uniform_int(0, 7);
    const double ang = kTwoPi * static_cast<double>(mode) / 8.0;
    pts.at(i, 0) = 1.6 * std::cos(ang) + 0.12 * rng.normal();
    pts.at(i, 1) = 1.6 * std::sin(ang) + 0.12 * rng.normal();
  }
  return pts;
}

Tensor swiss_roll(std::int64_t count, Rng& rng) {
  Tensor pts = Tensor::zeros({count, 2});
  for (std::int64_t i = 0; i < count; ++i) {
    const double u = rng.uniform();
    const double a = 1.5 * kTwoPi * (0.25 + 0.75 * u);  // 1.5 turns
    const double r = a / (1.5 * kTwoPi);
    pts.at(i, 0) = 2.0 * r * std::cos(a) + 0.05 * rng.normal();
    pts.at(i, 1) = 2.0 * r * std::sin(a) + 0.05 * rng.normal();
  }
  return pts;
}

}  // namespace

ToyDataset make_dataset(const std::string& name, std::int64_t count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("make_dataset: count must be >= 1");
  Rng rng(derive_seed(seed, "dataset"));
  ToyDataset ds;
  ds.name = name;
  ds.seed = seed;
  if (name == "gaussian-mixture-8") {
    ds.points = gaussian_mixture_8(count, rng);
  } else if (name == "swiss-roll") {
    ds.points = swiss_roll(count, rng);
  } else {
    throw ConfigError("unknown dataset: " + name);
  }
  return ds;
}

Tensor take_rows(const Tensor& points, const std::vector<std::int64_t>& index) {
  const std::int64_t c = points.cols();
  Tensor out = Tensor::zeros({static_cast<std::int64_t>(index.size()), c});
  for (std::size_t i = 0; i < index.size(); ++i)
    for (std::int64_t j = 0; j < c; ++j)
      out.data[static_cast<std::int64_t>(i) * c + j] = points.at(index[i], j);
  return out;
}

}  // namespace tq
