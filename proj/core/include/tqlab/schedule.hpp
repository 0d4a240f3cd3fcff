#pragma once

#include <vector>

namespace tq {

/// Per-timestep diffusion coefficients. Indexing is 1-based (t in [1, T]);
/// alpha_bar(0) is defined as 1 so sigma(1) == 0.
struct NoiseSchedule {
  int T = 0;
  std::vector<double> beta;       // size T
  std::vector<double> alpha;      // 1 - beta[t]
  std::vector<double> alpha_bar;  // running product of alpha
  std::vector<double> sigma;      // fixed-variance choice

  double beta_t(int t) const { return beta[static_cast<std::size_t>(t - 1)]; }
  double alpha_t(int t) const { return alpha[static_cast<std::size_t>(t - 1)]; }
  double alpha_bar_t(int t) const {
    return t == 0 ? 1.0 : alpha_bar[static_cast<std::size_t>(t - 1)];
  }
  double sigma_t(int t) const { return sigma[static_cast<std::size_t>(t - 1)]; }

  void check_t(int t) const;  // throws std::out_of_range
};

/// Linear beta interpolation between beta_start and beta_end over T steps.
NoiseSchedule make_schedule(int T, double beta_start, double beta_end);

}  // namespace tq
