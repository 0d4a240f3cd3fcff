#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tqlab/tensor.hpp"

namespace tq {

enum class Granularity { kPerTensor, kPerChannel };

/// Uniform affine quantizer parameters for one tensor site:
/// code = clamp(round(x/s) + z, 0, 2^bits - 1), dequant x_hat = s * (code - z).
struct QuantParams {
  std::vector<double> scale;      // size 1, or C for per-channel
  std::vector<std::int32_t> zero; // same length as scale, in [0, 2^bits - 1]
  int bits = 8;
  Granularity granularity = Granularity::kPerTensor;
  int axis = -1;  // channel axis for per-channel (2-D tensors)

  static QuantParams per_tensor(double s, std::int32_t z, int bits);

  std::int64_t channels() const { return static_cast<std::int64_t>(scale.size()); }
  std::int64_t qmax() const { return (std::int64_t{1} << bits) - 1; }
  void validate() const;  // throws ContractError on violated invariants
};

/// Integer codes produced by quantize(); same shape as the source tensor.
struct IntCodes {
  std::vector<std::int64_t> shape;
  std::vector<std::int32_t> data;
};

/// Round half to even; the artifact's fixed tie-breaking rule.
double round_half_even(double v);

IntCodes quantize(const Tensor& x, const QuantParams& p);
Tensor dequantize(const IntCodes& codes, const QuantParams& p);
/// dequantize(quantize(x, p), p) without materializing the codes.
Tensor fake_quant(const Tensor& x, const QuantParams& p);

/// Representable input interval [s*(0-z), s*(qmax-z)] for channel ch.
std::pair<double, double> representable_range(const QuantParams& p, std::int64_t ch = 0);

}  // namespace tq
