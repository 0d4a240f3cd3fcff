#pragma once

#include <string>
#include <vector>

#include "tqlab/quant.hpp"

namespace tq {

/// Range estimation rules for calibration. Percentile is fixed at 99.9%
/// two-sided; KL uses a 2048-bin histogram.
enum class RangeMethod { kMinMax, kMse, kPercentile, kKl };

RangeMethod range_method_from_string(const std::string& name);
std::string to_string(RangeMethod m);

/// Estimates quantizer parameters from sample tensors.
///
/// Asymmetric ranges are extended to include zero so the offset is always
/// representable. Symmetric uses z = 2^(bits-1) and s = maxabs/(2^(bits-1)-1).
/// Degenerate all-constant inputs: s floored at 1e-8 for zero input, s = |c|
/// with a mid-range offset otherwise, which keeps constants exact.
QuantParams estimate_range(const std::vector<Tensor>& samples, RangeMethod method, int bits,
                           Granularity granularity = Granularity::kPerTensor, int axis = -1,
                           bool symmetric = false);

inline QuantParams estimate_range(const Tensor& sample, RangeMethod method, int bits,
                                  Granularity granularity = Granularity::kPerTensor,
                                  int axis = -1, bool symmetric = false) {
  return estimate_range(std::vector<Tensor>{sample}, method, bits, granularity, axis, symmetric);
}

/// (scale, zero) for an explicit asymmetric clamp range; exposed for tests.
QuantParams params_from_range(double lo, double hi, int bits);

}  // namespace tq
