#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tqlab/autodiff.hpp"
#include "tqlab/denoiser.hpp"
#include "tqlab/error.hpp"
#include "tqlab/qparams_set.hpp"
#include "tqlab/quant.hpp"

namespace tq {

/// Plain-tensor execution with optional knobs: substituted (fake-quantized)
/// weights, activation quantization from a QuantParamSet, and a mutation hook
/// used for activation capture and noise injection.
class EvalCtx {
 public:
  using value_type = Tensor;
  using Mutator = std::function<void(const std::string& site, int t, Tensor& x)>;

  explicit EvalCtx(const DenoiserGraph& g) : g_(&g) {}

  void set_weights(const std::map<std::string, Tensor>* weights) { weights_ = weights; }
  void set_act_params(const QuantParamSet* qset) { act_qset_ = qset; }
  void set_mutator(Mutator m) { mutator_ = std::move(m); }

  Tensor constant(Tensor t) const { return t; }

  Tensor weight(const std::string& site) const {
    if (weights_) {
      auto it = weights_->find(site);
      if (it != weights_->end()) return it->second;
    }
    return g_->param(site);
  }

  Tensor bias(const std::string& name) const { return g_->param(name); }

  Tensor act(const std::string& site, int t, Tensor x) const {
    if (act_qset_) {
      auto it = act_qset_->activations.find(site);
      if (it != act_qset_->activations.end()) {
        if (it->second.per_timestep() && t < 1)
          throw ContractError("per-timestep activation params need a concrete t at " + site);
        x = fake_quant(x, it->second.at_t(t));
      }
    }
    if (mutator_) mutator_(site, t, x);
    return x;
  }

 private:
  const DenoiserGraph* g_;
  const std::map<std::string, Tensor>* weights_ = nullptr;
  const QuantParamSet* act_qset_ = nullptr;
  Mutator mutator_;
};

/// Tape-tracked execution with every model parameter trainable.
class TrainCtx {
 public:
  using value_type = Value;

  TrainCtx(const DenoiserGraph& g, Tape& tape) : g_(&g), tape_(&tape) {}

  Value constant(Tensor t) { return tape_->input(std::move(t)); }
  Value weight(const std::string& site) { return param_value(site); }
  Value bias(const std::string& name) { return param_value(name); }
  Value act(const std::string&, int, Value x) { return x; }

 private:
  Value param_value(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    Value v = tape_->param(name, g_->param(name));
    cache_.emplace(name, v);
    return v;
  }

  const DenoiserGraph* g_;
  Tape* tape_;
  std::map<std::string, Value> cache_;
};

/// Continuous quantizer variables for one weight site during optimization.
struct QuantVar {
  std::vector<double> s;
  std::vector<double> z;  // continuously relaxed
  int bits = 8;
  Granularity granularity = Granularity::kPerTensor;
  int axis = -1;

  static QuantVar from(const QuantParams& p);
  /// Rounds and clamps z back to integers; validates.
  QuantParams realized() const;
};

using QuantVarMap = std::map<std::string, QuantVar>;

/// Tape-tracked execution where a chosen set of weight sites carries
/// fake-quantization with trainable (s, z); other quantized sites use fixed
/// parameters; the rest stay full precision. Weights themselves are
/// constants: only quantizer parameters train (the reconstruction setting).
/// Activations run full precision; the sites touched are recorded so tests
/// can assert sample independence of TIB optimization.
class ReconCtx {
 public:
  using value_type = Value;

  ReconCtx(const DenoiserGraph& g, Tape& tape, QuantVarMap* optimized,
           const std::map<std::string, Tensor>* frozen_fq)
      : g_(&g), tape_(&tape), optimized_(optimized), frozen_(frozen_fq) {}

  Value constant(Tensor t) { return tape_->input(std::move(t)); }

  Value weight(const std::string& site) {
    auto it = cache_.find(site);
    if (it != cache_.end()) return it->second;
    Value v = make_weight(site);
    cache_.emplace(site, v);
    return v;
  }

  Value bias(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    Value v = tape_->input(g_->param(name));
    cache_.emplace(name, v);
    return v;
  }

  Value act(const std::string& site, int t, Value x) {
    (void)t;
    seen_.insert(site);
    return x;
  }

  const std::set<std::string>& sites_seen() const { return seen_; }

 private:
  Value make_weight(const std::string& site);

  const DenoiserGraph* g_;
  Tape* tape_;
  QuantVarMap* optimized_;
  const std::map<std::string, Tensor>* frozen_;
  std::map<std::string, Value> cache_;
  std::set<std::string> seen_;
};

/// Parameter names used for a site's scale/zero on a reconstruction tape.
std::string scale_param_name(const std::string& site);
std::string zero_param_name(const std::string& site);

}  // namespace tq
