#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "tqlab/denoiser.hpp"

namespace tq {

template <class Ctx>
using ValueOf = typename Ctx::value_type;

// Single generic definition of the network; every execution mode (plain,
// training tape, quantized-parameter tape, quantized inference with hooks)
// supplies a context with:
//   value_type
//   value_type constant(Tensor)
//   value_type weight(const std::string& site)   // may be fake-quantized
//   value_type bias(const std::string& name)
//   value_type act(const std::string& site, int t, value_type x)

template <class Ctx>
ValueOf<Ctx> linear(Ctx& ctx, const std::string& base, const ValueOf<Ctx>& x) {
  return add(matmul(x, ctx.weight(base + "/weight")), ctx.bias(base + "/bias"));
}

/// h(t): sinusoidal encoding through two linear layers with silu.
template <class Ctx>
ValueOf<Ctx> time_embed(const DenoiserGraph& g, Ctx& ctx, int t) {
  auto enc = ctx.act("time_embed/enc", t, ctx.constant(g.sinusoidal_encoding(t)));
  auto a1 = ctx.act("time_embed/fc1/out", t, linear(ctx, "time_embed/fc1", enc));
  auto a1s = ctx.act("time_embed/fc1/act", t, silu(a1));
  return ctx.act("time_embed/fc2/out", t, linear(ctx, "time_embed/fc2", a1s));
}

/// g_i(h): silu then linear; the i-th temporal feature when h = h(t).
template <class Ctx>
ValueOf<Ctx> embed_feature(const DenoiserGraph& g, Ctx& ctx, int i, const ValueOf<Ctx>& h,
                           int t) {
  (void)g;
  const std::string base = DenoiserGraph::embed_base(i);
  auto a = ctx.act(base + "/act", t, silu(h));
  return ctx.act(base + "/out", t, linear(ctx, base + "/linear", a));
}

/// All n temporal features at timestep t.
template <class Ctx>
std::vector<ValueOf<Ctx>> temporal_features(const DenoiserGraph& g, Ctx& ctx, int t) {
  auto h = time_embed(g, ctx, t);
  std::vector<ValueOf<Ctx>> feats;
  feats.reserve(static_cast<std::size_t>(g.config().blocks));
  for (int i = 0; i < g.config().blocks; ++i) feats.push_back(embed_feature(g, ctx, i, h, t));
  return feats;
}

/// f_i: in_proj, additive temporal injection, two linear layers with silu,
/// residual skip (projected for block 0 where widths differ).
template <class Ctx>
ValueOf<Ctx> block_forward(const DenoiserGraph& g, Ctx& ctx, int i, const ValueOf<Ctx>& u,
                           const ValueOf<Ctx>& temporal, int t) {
  (void)g;
  const std::string base = DenoiserGraph::block_base(i);
  auto v = ctx.act(base + "/in_proj/out", t, linear(ctx, base + "/in_proj", u));
  v = ctx.act(base + "/inject", t, add(v, temporal));
  auto w1 = ctx.act(base + "/fc1/out", t, linear(ctx, base + "/fc1", v));
  auto w1s = ctx.act(base + "/fc1/act", t, silu(w1));
  auto w2 = ctx.act(base + "/fc2/out", t, linear(ctx, base + "/fc2", w1s));
  auto skip = (i == 0) ? ctx.act("block_0/skip/out", t,
                                 matmul(u, ctx.weight("block_0/skip/weight")))
                       : u;
  return ctx.act(base + "/out", t, add(w2, skip));
}

/// epsilon prediction for a batch sharing one timestep, with the temporal
/// feature for block i supplied by `feature(i)` (lets quantized models source
/// features from a cache without touching h or g_i).
template <class Ctx, class FeatureFn>
ValueOf<Ctx> predict_noise_with(const DenoiserGraph& g, Ctx& ctx, const ValueOf<Ctx>& x, int t,
                                FeatureFn&& feature) {
  ValueOf<Ctx> u = x;
  for (int i = 0; i < g.config().blocks; ++i) u = block_forward(g, ctx, i, u, feature(i), t);
  return ctx.act("head/out", t, linear(ctx, "head", u));
}

template <class Ctx>
ValueOf<Ctx> predict_noise(const DenoiserGraph& g, Ctx& ctx, const ValueOf<Ctx>& x, int t) {
  std::optional<ValueOf<Ctx>> h;
  return predict_noise_with(g, ctx, x, t, [&](int i) {
    if (!h) h = time_embed(g, ctx, t);
    return embed_feature(g, ctx, i, *h, t);
  });
}

/// Mixed-timestep batch (training): rows of x carry individual timesteps.
/// Temporal features are computed once per distinct t and gathered per row.
template <class Ctx>
ValueOf<Ctx> predict_noise_mixed(const DenoiserGraph& g, Ctx& ctx, const ValueOf<Ctx>& x,
                                 const std::vector<int>& ts) {
  std::vector<int> uniq;
  std::vector<int> row_of(ts.size());
  for (std::size_t r = 0; r < ts.size(); ++r) {
    int idx = -1;
    for (std::size_t k = 0; k < uniq.size(); ++k)
      if (uniq[k] == ts[r]) {
        idx = static_cast<int>(k);
        break;
      }
    if (idx < 0) {
      uniq.push_back(ts[r]);
      idx = static_cast<int>(uniq.size()) - 1;
    }
    row_of[r] = idx;
  }

  const int n = g.config().blocks;
  std::vector<std::vector<ValueOf<Ctx>>> feats;  // [uniq][block]
  feats.reserve(uniq.size());
  for (int t : uniq) feats.push_back(temporal_features(g, ctx, t));

  ValueOf<Ctx> u = x;
  for (int i = 0; i < n; ++i) {
    std::vector<ValueOf<Ctx>> rows;
    rows.reserve(uniq.size());
    for (auto& f : feats) rows.push_back(f[static_cast<std::size_t>(i)]);
    u = block_forward(g, ctx, i, u, stack_rows(rows, row_of), /*t=*/-1);
  }
  return ctx.act("head/out", -1, linear(ctx, "head", u));
}

}  // namespace tq
