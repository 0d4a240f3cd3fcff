#include "tqlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tqlab/error.hpp"

namespace tq {

namespace {

constexpr double kDegenerateScaleFloor = 1e-8;
constexpr int kShrinkCandidates = 100;
constexpr int kKlBins = 2048;
constexpr double kPercentileTail = 0.0005;  // 99.9% two-sided

struct ScalarParams {
  double scale;
  std::int32_t zero;
};

ScalarParams degenerate_params(double constant, int bits) {
  const auto mid = static_cast<std::int32_t>(std::int64_t{1} << (bits - 1));
  if (constant == 0.0) return {kDegenerateScaleFloor, 0};
  return {std::fabs(constant), mid};
}

// Affine rule for a non-degenerate range. The range is first extended to
// include zero so z lands inside the code range.
ScalarParams affine_params(double lo, double hi, int bits) {
  lo = std::min(lo, 0.0);
  hi = std::max(hi, 0.0);
  const double qmax = static_cast<double>((std::int64_t{1} << bits) - 1);
  const double s = (hi - lo) / qmax;
  double z = round_half_even(-lo / s);
  z = std::max(0.0, std::min(qmax, z));
  return {s, static_cast<std::int32_t>(z)};
}

ScalarParams symmetric_params(double lo, double hi, int bits) {
  const double m = std::max(std::fabs(lo), std::fabs(hi));
  const auto mid = static_cast<std::int32_t>(std::int64_t{1} << (bits - 1));
  if (m == 0.0) return {kDegenerateScaleFloor, mid};
  const double levels = static_cast<double>((std::int64_t{1} << (bits - 1)) - 1);
  return {m / levels, mid};
}

double recon_sse(const std::vector<double>& xs, const ScalarParams& sp, int bits) {
  const double qmax = static_cast<double>((std::int64_t{1} << bits) - 1);
  const double z = static_cast<double>(sp.zero);
  double sse = 0.0;
  for (double x : xs) {
    const double pre = round_half_even(x / sp.scale) + z;
    const double code = pre < 0.0 ? 0.0 : (pre > qmax ? qmax : pre);
    const double err = x - sp.scale * (code - z);
    sse += err * err;
  }
  return sse;
}

ScalarParams minmax_rule(const std::vector<double>& xs, int bits, bool symmetric) {
  auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  const double lo = *lo_it, hi = *hi_it;
  if (symmetric) {
    if (lo == hi && lo != 0.0) return degenerate_params(lo, bits);
    return symmetric_params(lo, hi, bits);
  }
  if (lo == hi) return degenerate_params(lo, bits);
  return affine_params(lo, hi, bits);
}

ScalarParams mse_rule(const std::vector<double>& xs, int bits, bool symmetric) {
  auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) return minmax_rule(xs, bits, symmetric);
  if (!symmetric) {
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
  }
  ScalarParams best{};
  double best_sse = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kShrinkCandidates; ++k) {
    const double f = 1.0 - 0.01 * static_cast<double>(k);
    const double clo = lo * f, chi = hi * f;
    if (clo == chi) continue;
    const ScalarParams cand =
        symmetric ? symmetric_params(clo, chi, bits) : affine_params(clo, chi, bits);
    const double sse = recon_sse(xs, cand, bits);
    if (sse < best_sse) {
      best_sse = sse;
      best = cand;
    }
  }
  return best;
}

double quantile(std::vector<double> sorted, double q) {
  const auto n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = q * static_cast<double>(n - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= n) return sorted[n - 1];
  const double frac = pos - static_cast<double>(i);
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

ScalarParams percentile_rule(const std::vector<double>& xs, int bits, bool symmetric) {
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const double lo = quantile(sorted, kPercentileTail);
  const double hi = quantile(sorted, 1.0 - kPercentileTail);
  if (lo == hi) return minmax_rule(xs, bits, symmetric);
  return symmetric ? symmetric_params(lo, hi, bits) : affine_params(lo, hi, bits);
}

// KL(P || Q) over the 2048-bin reference histogram, where Q pools P's mass
// through the b-bit quantization grid of a candidate clamp range. Candidate
// ranges are proportional shrinks of the (zero-extended) min-max range; the
// candidate with minimal divergence wins.
ScalarParams kl_rule(const std::vector<double>& xs, int bits, bool symmetric) {
  auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) return minmax_rule(xs, bits, symmetric);
  if (!symmetric) {
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
  }

  std::vector<double> hist(kKlBins, 0.0);
  const double width = (hi - lo) / kKlBins;
  for (double x : xs) {
    auto b = static_cast<std::int64_t>((x - lo) / width);
    b = std::max<std::int64_t>(0, std::min<std::int64_t>(kKlBins - 1, b));
    hist[static_cast<std::size_t>(b)] += 1.0;
  }
  const double total = static_cast<double>(xs.size());

  const double qmax = static_cast<double>((std::int64_t{1} << bits) - 1);
  ScalarParams best{};
  double best_kl = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kShrinkCandidates; ++k) {
    const double f = 1.0 - 0.01 * static_cast<double>(k);
    const double clo = lo * f, chi = hi * f;
    if (clo == chi) continue;
    const ScalarParams cand =
        symmetric ? symmetric_params(clo, chi, bits) : affine_params(clo, chi, bits);
    const double z = static_cast<double>(cand.zero);

    // Mass of P per quantized level, and bin count per level.
    std::vector<double> level_mass;
    std::vector<double> level_bins;
    const auto nlevels = static_cast<std::size_t>(qmax) + 1;
    level_mass.assign(nlevels, 0.0);
    level_bins.assign(nlevels, 0.0);
    std::vector<std::size_t> level_of(kKlBins);
    for (int b = 0; b < kKlBins; ++b) {
      const double center = lo + (static_cast<double>(b) + 0.5) * width;
      double pre = round_half_even(center / cand.scale) + z;
      pre = pre < 0.0 ? 0.0 : (pre > qmax ? qmax : pre);
      const auto lvl = static_cast<std::size_t>(pre);
      level_of[static_cast<std::size_t>(b)] = lvl;
      level_mass[lvl] += hist[static_cast<std::size_t>(b)];
      level_bins[lvl] += 1.0;
    }

    double kl = 0.0;
    const double eps = 1e-12;
    for (int b = 0; b < kKlBins; ++b) {
      const double p = hist[static_cast<std::size_t>(b)] / total;
      if (p <= 0.0) continue;
      const auto lvl = level_of[static_cast<std::size_t>(b)];
      const double q = level_mass[lvl] / (level_bins[lvl] * total);
      kl += p * std::log(p / std::max(q, eps));
    }
    if (kl < best_kl) {
      best_kl = kl;
      best = cand;
    }
  }
  return best;
}

ScalarParams apply_rule(const std::vector<double>& xs, RangeMethod method, int bits,
                        bool symmetric) {
  switch (method) {
    case RangeMethod::kMinMax:
      return minmax_rule(xs, bits, symmetric);
    case RangeMethod::kMse:
      return mse_rule(xs, bits, symmetric);
    case RangeMethod::kPercentile:
      return percentile_rule(xs, bits, symmetric);
    case RangeMethod::kKl:
      return kl_rule(xs, bits, symmetric);
  }
  throw ContractError("unknown range method");
}

}  // namespace

RangeMethod range_method_from_string(const std::string& name) {
  if (name == "min-max" || name == "minmax") return RangeMethod::kMinMax;
  if (name == "mse") return RangeMethod::kMse;
  if (name == "percentile") return RangeMethod::kPercentile;
  if (name == "kl") return RangeMethod::kKl;
  throw ConfigError("unknown range estimator: " + name);
}

std::string to_string(RangeMethod m) {
  switch (m) {
    case RangeMethod::kMinMax:
      return "min-max";
    case RangeMethod::kMse:
      return "mse";
    case RangeMethod::kPercentile:
      return "percentile";
    case RangeMethod::kKl:
      return "kl";
  }
  return "?";
}

QuantParams params_from_range(double lo, double hi, int bits) {
  QuantParams p;
  p.bits = bits;
  if (lo == hi) {
    const auto sp = degenerate_params(lo, bits);
    p.scale = {sp.scale};
    p.zero = {sp.zero};
  } else {
    const auto sp = affine_params(lo, hi, bits);
    p.scale = {sp.scale};
    p.zero = {sp.zero};
  }
  p.validate();
  return p;
}

QuantParams estimate_range(const std::vector<Tensor>& samples, RangeMethod method, int bits,
                           Granularity granularity, int axis, bool symmetric) {
  if (samples.empty()) throw ConfigError("estimate_range: no samples");
  if (bits < 2) throw ConfigError("estimate_range: bits must be >= 2");

  QuantParams p;
  p.bits = bits;
  p.granularity = granularity;
  p.axis = granularity == Granularity::kPerChannel ? axis : -1;

  if (granularity == Granularity::kPerTensor) {
    std::vector<double> pooled;
    for (const auto& t : samples) pooled.insert(pooled.end(), t.data.begin(), t.data.end());
    const auto sp = apply_rule(pooled, method, bits, symmetric);
    p.scale = {sp.scale};
    p.zero = {sp.zero};
  } else {
    if (axis < 0 || samples[0].ndim() != 2)
      throw ConfigError("estimate_range: per-channel requires 2-D samples and an axis");
    const std::int64_t nch = samples[0].shape[axis];
    p.scale.resize(static_cast<std::size_t>(nch));
    p.zero.resize(static_cast<std::size_t>(nch));
    std::vector<double> chan;
    for (std::int64_t c = 0; c < nch; ++c) {
      chan.clear();
      for (const auto& t : samples) {
        if (t.ndim() != 2 || t.shape[axis] != nch)
          throw DimensionError("estimate_range: sample shape mismatch");
        const std::int64_t cols = t.shape[1];
        if (axis == 0) {
          for (std::int64_t j = 0; j < cols; ++j) chan.push_back(t.data[c * cols + j]);
        } else {
          for (std::int64_t r = 0; r < t.shape[0]; ++r) chan.push_back(t.data[r * cols + c]);
        }
      }
      const auto sp = apply_rule(chan, method, bits, symmetric);
      p.scale[static_cast<std::size_t>(c)] = sp.scale;
      p.zero[static_cast<std::size_t>(c)] = sp.zero;
    }
  }
  p.validate();
  return p;
}

}  // namespace tq
