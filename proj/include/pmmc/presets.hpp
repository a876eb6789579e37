#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "pmmc/model.hpp"
#include "pmmc/problem.hpp"

namespace pmmc::presets {

inline constexpr double kHorizon = 10.0;
inline constexpr double kDelta = 0x1.0p-10;
inline constexpr std::int64_t kSteps = 10240;  // kHorizon / kDelta
inline constexpr int kBridgeLevels = 9;
inline constexpr int kSmoothingLevels = 7;
inline constexpr double kObservationVariance = 0.01;

/// Double-well bridge pinned at 0 on both ends.
inline ProblemSpec<DoubleWell> double_well_bridge(double horizon = kHorizon, std::int64_t steps = kSteps) {
  return ProblemSpec<DoubleWell>::bridge(DoubleWell{}, horizon, steps, 0.0, 0.0);
}

/// Observations -1 at t = 0..5 and +1 at t = 6..10 with N(0, 0.01) noise,
/// Z(0) ~ exp(-(x^2 - 1)^2), identity link.
inline ObservationModel sign_change_observations(double horizon, std::int64_t steps) {
  ObservationModel obs;
  const auto count = static_cast<std::int64_t>(std::llround(horizon));
  for (std::int64_t j = 0; j <= count; ++j) {
    obs.times.push_back(j * steps / count);
    obs.values.push_back(static_cast<double>(j) <= 5.0 ? -1.0 : 1.0);
  }
  obs.noise_log_density = [](double chi) {
    return -0.5 * chi * chi / kObservationVariance - 0.5 * std::log(2.0 * std::numbers::pi * kObservationVariance);
  };
  obs.initial_log_density = [](double x) { return -(x * x - 1.0) * (x * x - 1.0); };
  return obs;
}

inline ProblemSpec<DoubleWell> double_well_smoothing(double horizon = kHorizon, std::int64_t steps = kSteps) {
  return ProblemSpec<DoubleWell>::smoothing(DoubleWell{}, horizon, steps, sign_change_observations(horizon, steps));
}

}  // namespace pmmc::presets
