#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tqlab/tensor.hpp"

namespace tq {

struct DenoiserConfig {
  int timesteps = 100;     // T
  int blocks = 4;          // n residual bottleneck blocks
  int hidden = 64;         // block width
  int time_embed_dim = 32; // sinusoidal encoding width
  int data_dim = 2;

  bool operator==(const DenoiserConfig&) const = default;
};

/// The toy noise-prediction network. Structure per block i:
///
///   u -> in_proj -> (+ g_i(h(t))) -> fc1 -> silu -> fc2 -> (+ skip(u)) -> u'
///
/// with a shared time-embed subnetwork h (sinusoidal encoding, two linear
/// layers with silu between) and per-block embedding layers g_i (silu then
/// linear) that consume only the timestep, never the sample. Parameters are
/// stored flat under unique "block-path/tensor-name" keys.
class DenoiserGraph {
 public:
  DenoiserGraph() = default;
  DenoiserGraph(DenoiserConfig cfg, std::uint64_t seed);
  DenoiserGraph(DenoiserConfig cfg, std::map<std::string, Tensor> params);

  const DenoiserConfig& config() const { return cfg_; }
  const std::map<std::string, Tensor>& params() const { return params_; }
  std::map<std::string, Tensor>& mutable_params() { return params_; }
  const Tensor& param(const std::string& name) const;

  /// [1 x time_embed_dim] encoding of integer timestep t (base 10000).
  Tensor sinusoidal_encoding(int t) const;

  /// Quantizable linear-weight site names (biases stay full precision).
  std::vector<std::string> weight_sites() const;
  std::vector<std::string> activation_sites() const;
  /// The temporal information block: h plus every g_i.
  std::vector<std::string> tib_weight_sites() const;
  std::vector<std::string> tib_activation_sites() const;

  static std::string embed_base(int i) { return "embed_" + std::to_string(i); }
  static std::string block_base(int i) { return "block_" + std::to_string(i); }
  /// Activation site carrying the i-th temporal feature g_i(h(t)).
  static std::string temporal_output_site(int i) { return embed_base(i) + "/out"; }

 private:
  void init_params(std::uint64_t seed);

  DenoiserConfig cfg_;
  std::map<std::string, Tensor> params_;
};

/// Checkpoint I/O: `<prefix>.json` manifest (names, shapes, byte offsets)
/// plus `<prefix>.bin`, little-endian float64 in row-major order. Bit-exact
/// round trip.
void save_checkpoint(const DenoiserGraph& model, const std::string& prefix);
DenoiserGraph load_checkpoint(const std::string& prefix);

}  // namespace tq
