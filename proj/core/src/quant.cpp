#include "tqlab/quant.hpp"

#include <cfenv>
#include <cmath>

#include "tqlab/error.hpp"

namespace tq {

double round_half_even(double v) {
  // nearbyint honors the default FE_TONEAREST mode, which is half-to-even.
  return std::nearbyint(v);
}

QuantParams QuantParams::per_tensor(double s, std::int32_t z, int bits) {
  QuantParams p;
  p.scale = {s};
  p.zero = {z};
  p.bits = bits;
  return p;
}

void QuantParams::validate() const {
  if (bits < 2) throw ContractError("QuantParams: bits must be >= 2");
  if (scale.empty() || scale.size() != zero.size())
    throw ContractError("QuantParams: scale/zero size mismatch");
  if (granularity == Granularity::kPerChannel && axis < 0)
    throw ContractError("QuantParams: per-channel requires an axis");
  const auto q = qmax();
  for (std::size_t c = 0; c < scale.size(); ++c) {
    if (!(scale[c] > 0.0)) throw ContractError("QuantParams: scale must be positive");
    if (zero[c] < 0 || zero[c] > q) throw ContractError("QuantParams: zero offset out of range");
  }
}

namespace {

std::int64_t channel_of(const Tensor& x, const QuantParams& p, std::int64_t e) {
  if (p.channels() == 1) return 0;
  if (x.ndim() != 2 || x.shape[p.axis] != p.channels())
    throw DimensionError("per-channel params do not match tensor " + x.shape_str());
  return p.axis == 0 ? e / x.shape[1] : e % x.shape[1];
}

}  // namespace

IntCodes quantize(const Tensor& x, const QuantParams& p) {
  p.validate();
  const double qmax = static_cast<double>(p.qmax());
  IntCodes codes;
  codes.shape = x.shape;
  codes.data.resize(x.data.size());
  for (std::int64_t e = 0; e < x.numel(); ++e) {
    const auto ch = static_cast<std::size_t>(channel_of(x, p, e));
    const double pre = round_half_even(x.data[static_cast<std::size_t>(e)] / p.scale[ch]) +
                       static_cast<double>(p.zero[ch]);
    const double clamped = pre < 0.0 ? 0.0 : (pre > qmax ? qmax : pre);
    codes.data[static_cast<std::size_t>(e)] = static_cast<std::int32_t>(clamped);
  }
  return codes;
}

Tensor dequantize(const IntCodes& codes, const QuantParams& p) {
  p.validate();
  const auto qmax = static_cast<std::int32_t>(p.qmax());
  Tensor out = Tensor::zeros(codes.shape);
  for (std::int64_t e = 0; e < out.numel(); ++e) {
    const std::int32_t c = codes.data[static_cast<std::size_t>(e)];
    if (c < 0 || c > qmax) throw ContractError("dequantize: code out of range");
    const auto ch = static_cast<std::size_t>(channel_of(out, p, e));
    out.data[static_cast<std::size_t>(e)] = p.scale[ch] * static_cast<double>(c - p.zero[ch]);
  }
  return out;
}

Tensor fake_quant(const Tensor& x, const QuantParams& p) {
  p.validate();
  const double qmax = static_cast<double>(p.qmax());
  Tensor out = x;
  for (std::int64_t e = 0; e < x.numel(); ++e) {
    const auto ch = static_cast<std::size_t>(channel_of(x, p, e));
    const double s = p.scale[ch];
    const double z = static_cast<double>(p.zero[ch]);
    const double pre = round_half_even(x.data[static_cast<std::size_t>(e)] / s) + z;
    const double code = pre < 0.0 ? 0.0 : (pre > qmax ? qmax : pre);
    out.data[static_cast<std::size_t>(e)] = s * (code - z);
  }
  return out;
}

std::pair<double, double> representable_range(const QuantParams& p, std::int64_t ch) {
  const auto c = static_cast<std::size_t>(ch);
  const double s = p.scale[c];
  const double z = static_cast<double>(p.zero[c]);
  return {s * (0.0 - z), s * (static_cast<double>(p.qmax()) - z)};
}

}  // namespace tq
