#pragma once

#include <map>
#include <string>
#include <vector>

#include "tqlab/quant.hpp"

namespace tq {

/// Activation-site entry: one shared parameter set, or a per-timestep table
/// of exactly T sets (finite-set calibration).
struct ActQuant {
  std::vector<QuantParams> table;  // size 1 (shared) or T (per-timestep)

  bool per_timestep() const { return table.size() > 1; }
  /// t is 1-based.
  const QuantParams& at_t(int t) const {
    return table.size() == 1 ? table[0] : table[static_cast<std::size_t>(t - 1)];
  }
};

/// Keyed quantizer parameters for every weight and activation site.
struct QuantParamSet {
  std::map<std::string, QuantParams> weights;
  std::map<std::string, ActQuant> activations;

  bool has_weight(const std::string& site) const { return weights.count(site) != 0; }
  bool has_activation(const std::string& site) const { return activations.count(site) != 0; }
  /// Per-timestep tables must have exactly T entries; all params valid.
  void validate(int timesteps) const;
};

void save_qparams(const QuantParamSet& qset, const std::string& path);
QuantParamSet load_qparams(const std::string& path);

}  // namespace tq
