#include "tqlab/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tqlab/error.hpp"

namespace tq {

void NoiseSchedule::check_t(int t) const {
  if (t < 1 || t > T)
    throw std::out_of_range("timestep " + std::to_string(t) + " outside [1, " +
                            std::to_string(T) + "]");
}

NoiseSchedule make_schedule(int T, double beta_start, double beta_end) {
  if (T < 2) throw ConfigError("make_schedule: T must be >= 2");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
    throw ConfigError("make_schedule: require 0 < beta_start <= beta_end < 1");

  NoiseSchedule s;
  s.T = T;
  s.beta.resize(static_cast<std::size_t>(T));
  s.alpha.resize(static_cast<std::size_t>(T));
  s.alpha_bar.resize(static_cast<std::size_t>(T));
  s.sigma.resize(static_cast<std::size_t>(T));

  double prod = 1.0;
  for (int t = 1; t <= T; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    s.beta[i] = beta_start + (beta_end - beta_start) * static_cast<double>(t - 1) /
                                 static_cast<double>(T - 1);
    s.alpha[i] = 1.0 - s.beta[i];
    prod *= s.alpha[i];
    s.alpha_bar[i] = prod;
    const double ab_prev = t == 1 ? 1.0 : s.alpha_bar[i - 1];
    s.sigma[i] = std::sqrt(s.beta[i] * (1.0 - ab_prev) / (1.0 - s.alpha_bar[i]));
  }
  return s;
}

}  // namespace tq
