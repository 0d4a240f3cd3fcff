#include "tqlab/contexts.hpp"

#include <cmath>

namespace tq {

QuantVar QuantVar::from(const QuantParams& p) {
  QuantVar v;
  v.s = p.scale;
  v.z.reserve(p.zero.size());
  for (auto z : p.zero) v.z.push_back(static_cast<double>(z));
  v.bits = p.bits;
  v.granularity = p.granularity;
  v.axis = p.axis;
  return v;
}

QuantParams QuantVar::realized() const {
  QuantParams p;
  p.bits = bits;
  p.granularity = granularity;
  p.axis = axis;
  p.scale = s;
  const double qmax = static_cast<double>((std::int64_t{1} << bits) - 1);
  p.zero.reserve(z.size());
  for (double zc : z) {
    const double r = std::max(0.0, std::min(qmax, round_half_even(zc)));
    p.zero.push_back(static_cast<std::int32_t>(r));
  }
  p.validate();
  return p;
}

std::string scale_param_name(const std::string& site) { return site + "#s"; }
std::string zero_param_name(const std::string& site) { return site + "#z"; }

Value ReconCtx::make_weight(const std::string& site) {
  if (optimized_) {
    auto it = optimized_->find(site);
    if (it != optimized_->end()) {
      const QuantVar& qv = it->second;
      const auto nch = static_cast<std::int64_t>(qv.s.size());
      Value w = tape_->input(g_->param(site));
      Value s = tape_->param(scale_param_name(site), Tensor({nch}, qv.s));
      Value z = tape_->param(zero_param_name(site), Tensor({nch}, qv.z));
      return fake_quant(w, s, z, qv.bits, qv.axis);
    }
  }
  if (frozen_) {
    auto it = frozen_->find(site);
    if (it != frozen_->end()) return tape_->input(it->second);
  }
  return tape_->input(g_->param(site));
}

}  // namespace tq
