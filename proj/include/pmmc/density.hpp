#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pmmc/errors.hpp"
#include "pmmc/model.hpp"
#include "pmmc/problem.hpp"

namespace pmmc {

/// One chain's state: values on the dyadic mesh S_l = {0, 2^l, 2*2^l, ..., N}.
struct LevelPath {
  int level = 0;
  std::vector<double> values;
  double spacing = 0.0;  ///< 2^l * delta
};

/// Mesh bookkeeping for one level of a problem.
struct LevelGeometry {
  int level = 0;
  std::int64_t stride = 1;  ///< 2^l fine steps per mesh interval
  std::int64_t points = 0;  ///< N / 2^l + 1
  double spacing = 0.0;
  std::vector<int> observation_slot;  ///< per mesh point, -1 when unobserved
  std::int64_t first_free = 0;        ///< bridge ends are pinned, smoothing ends are free
  std::int64_t last_free = 0;
};

template <DriftModel Model>
LevelGeometry level_geometry(const ProblemSpec<Model>& spec, int level) {
  if (level < 0 || level > 62 || (spec.steps >> level) < 1 || ((spec.steps >> level) << level) != spec.steps) {
    throw DivisibilityError("level " + std::to_string(level) + " does not divide N = " + std::to_string(spec.steps));
  }
  LevelGeometry geo;
  geo.level = level;
  geo.stride = std::int64_t{1} << level;
  geo.points = spec.steps / geo.stride + 1;
  geo.spacing = static_cast<double>(geo.stride) * spec.delta;
  geo.observation_slot.assign(static_cast<std::size_t>(geo.points), -1);
  if (spec.is_bridge()) {
    geo.first_free = 1;
    geo.last_free = geo.points - 2;
  } else {
    geo.first_free = 0;
    geo.last_free = geo.points - 1;
    const auto& times = spec.observations.times;
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (times[j] % geo.stride != 0) {
        throw DivisibilityError("observation index " + std::to_string(times[j]) + " is not on the level-" +
                                std::to_string(level) + " mesh");
      }
      geo.observation_slot[static_cast<std::size_t>(times[j] / geo.stride)] = static_cast<int>(j);
    }
  }
  return geo;
}

/// Unnormalized log pi_l on raw level values; no shape checks. Normalization
/// constants are never computed, so only differences are meaningful.
template <DriftModel Model>
double log_level_density(std::span<const double> x, const LevelGeometry& geo, const ProblemSpec<Model>& spec) {
  const double h = geo.spacing;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) total -= v_potential(x[k], x[k + 1], h, spec.model);
  if (!spec.is_bridge()) {
    const auto& obs = spec.observations;
    total += obs.initial_log_density(x.front());
    for (std::size_t j = 0; j < obs.times.size(); ++j) {
      total += obs.log_likelihood(j, x[static_cast<std::size_t>(obs.times[j] / geo.stride)]);
    }
  }
  return total;
}

template <DriftModel Model>
void check_level_path(const LevelPath& path, const ProblemSpec<Model>& spec) {
  if (path.level < 0 || (spec.steps >> path.level) < 1 || ((spec.steps >> path.level) << path.level) != spec.steps) {
    throw MeshMismatch("level " + std::to_string(path.level) + " is not a dyadic coarsening of N");
  }
  const std::int64_t stride = std::int64_t{1} << path.level;
  const auto expected = static_cast<std::size_t>(spec.steps / stride + 1);
  if (path.values.size() != expected) {
    throw MeshMismatch("level-" + std::to_string(path.level) + " path has " + std::to_string(path.values.size()) +
                       " values, expected " + std::to_string(expected));
  }
  const double spacing = static_cast<double>(stride) * spec.delta;
  if (std::abs(path.spacing - spacing) > 1e-12 * spacing) {
    throw MeshMismatch("level-" + std::to_string(path.level) + " spacing disagrees with 2^l * delta");
  }
  if (spec.is_bridge() && (path.values.front() != spec.z_minus || path.values.back() != spec.z_plus)) {
    throw BoundaryViolation("bridge path endpoints differ from (z-, z+)");
  }
}

/// Checked log pi_l of a level path.
template <DriftModel Model>
double log_level_density(const LevelPath& path, const ProblemSpec<Model>& spec) {
  check_level_path(path, spec);
  return log_level_density(std::span<const double>(path.values), level_geometry(spec, path.level), spec);
}

/// The terms of log pi_l that involve site k, evaluated with x[k] replaced by `value`.
template <DriftModel Model>
double site_log_terms(std::span<const double> x, std::size_t k, double value, const LevelGeometry& geo,
                      const ProblemSpec<Model>& spec) {
  const double h = geo.spacing;
  double total = 0.0;
  if (k > 0) total -= v_potential(x[k - 1], value, h, spec.model);
  if (k + 1 < x.size()) total -= v_potential(value, x[k + 1], h, spec.model);
  if (!spec.is_bridge()) {
    if (k == 0) total += spec.observations.initial_log_density(value);
    if (const int slot = geo.observation_slot[k]; slot >= 0) {
      total += spec.observations.log_likelihood(static_cast<std::size_t>(slot), value);
    }
  }
  return total;
}

}  // namespace pmmc
