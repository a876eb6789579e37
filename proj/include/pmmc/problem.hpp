#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmmc/model.hpp"

namespace pmmc {

enum class ProblemKind { bridge, smoothing };

/// Noisy observations H(j) = r(Z(s_j)) + chi(j), chi ~ mu, Z(0) ~ rho.
struct ObservationModel {
  std::vector<std::int64_t> times;  ///< fine-mesh indices of s_j
  std::vector<double> values;       ///< h(j)
  std::function<double(double)> link = [](double x) { return x; };
  std::function<double(double)> noise_log_density;    ///< log mu
  std::function<double(double)> initial_log_density;  ///< log rho

  /// log mu(r(x) - h) for observation j.
  [[nodiscard]] double log_likelihood(std::size_t j, double x) const {
    return noise_log_density(link(x) - values[j]);
  }

  void validate(std::int64_t steps) const {
    if (times.empty() || times.size() != values.size()) {
      throw std::invalid_argument("observation times and values must be non-empty and the same length");
    }
    if (times.front() != 0 || times.back() != steps) {
      throw std::invalid_argument("observations must start at index 0 and end at index N");
    }
    for (std::size_t j = 1; j < times.size(); ++j) {
      if (times[j] <= times[j - 1]) throw std::invalid_argument("observation times must increase strictly");
    }
    if (!noise_log_density || !initial_log_density || !link) {
      throw std::invalid_argument("observation model is missing a density or link function");
    }
  }
};

/// The discretized path-sampling problem on the fine mesh t_n = n * delta, n = 0..steps.
/// Level l of a hierarchy exists only when 2^l divides `steps`.
template <DriftModel Model>
struct ProblemSpec {
  ProblemKind kind = ProblemKind::bridge;
  Model model{};
  double horizon = 0.0;     ///< T
  std::int64_t steps = 0;   ///< N
  double delta = 0.0;       ///< T / N
  double z_minus = 0.0;     ///< bridge start value
  double z_plus = 0.0;      ///< bridge end value
  ObservationModel observations;  ///< smoothing only

  static ProblemSpec bridge(Model model, double horizon, std::int64_t steps, double z_minus, double z_plus) {
    ProblemSpec spec;
    spec.kind = ProblemKind::bridge;
    spec.model = std::move(model);
    spec.horizon = horizon;
    spec.steps = steps;
    spec.z_minus = z_minus;
    spec.z_plus = z_plus;
    spec.finish();
    return spec;
  }

  static ProblemSpec smoothing(Model model, double horizon, std::int64_t steps, ObservationModel observations) {
    ProblemSpec spec;
    spec.kind = ProblemKind::smoothing;
    spec.model = std::move(model);
    spec.horizon = horizon;
    spec.steps = steps;
    spec.observations = std::move(observations);
    spec.finish();
    spec.observations.validate(steps);
    return spec;
  }

  [[nodiscard]] bool is_bridge() const noexcept { return kind == ProblemKind::bridge; }

 private:
  void finish() {
    if (steps < 2) throw std::invalid_argument("N must be at least 2, got " + std::to_string(steps));
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon T must be positive");
    delta = horizon / static_cast<double>(steps);
  }
};

}  // namespace pmmc
