#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pmmc/density.hpp"
#include "pmmc/errors.hpp"
#include "pmmc/problem.hpp"
#include "pmmc/rng.hpp"

namespace pmmc {

/// Fine-mesh index of position `position` on the level-`level` mesh.
constexpr std::int64_t global_index(int level, std::int64_t position) noexcept { return position << level; }

inline double mesh_time(std::int64_t global, double delta) noexcept { return static_cast<double>(global) * delta; }

struct HatTilde {
  std::vector<double> hat;    ///< even positions; these survive to level l+1
  std::vector<double> tilde;  ///< odd positions
};

inline HatTilde split_values(std::span<const double> values) {
  HatTilde out;
  out.hat.reserve(values.size() / 2 + 1);
  out.tilde.reserve(values.size() / 2);
  for (std::size_t k = 0; k < values.size(); ++k) (k % 2 == 0 ? out.hat : out.tilde).push_back(values[k]);
  return out;
}

inline HatTilde split_level(const LevelPath& path) { return split_values(path.values); }

/// Interleaves hat and tilde into `out`, which must hold hat.size() + tilde.size() values.
inline void merge_into(std::span<const double> hat, std::span<const double> tilde, std::span<double> out) {
  if (hat.size() != tilde.size() + 1 || out.size() != hat.size() + tilde.size()) {
    throw LengthMismatch("merge needs hat.size() == tilde.size() + 1 (got " + std::to_string(hat.size()) + " and " +
                         std::to_string(tilde.size()) + ")");
  }
  for (std::size_t k = 0; k < tilde.size(); ++k) {
    out[2 * k] = hat[k];
    out[2 * k + 1] = tilde[k];
  }
  out[2 * tilde.size()] = hat.back();
}

inline LevelPath merge_level(std::span<const double> hat, std::span<const double> tilde, int level, double delta) {
  if (hat.size() != tilde.size() + 1) {
    throw LengthMismatch("merge needs hat.size() == tilde.size() + 1 (got " + std::to_string(hat.size()) + " and " +
                         std::to_string(tilde.size()) + ")");
  }
  LevelPath path;
  path.level = level;
  path.spacing = std::ldexp(delta, level);
  path.values.resize(hat.size() + tilde.size());
  merge_into(hat, tilde, path.values);
  return path;
}

/// The product-chain state (Y_0, ..., Y_L) with cached per-level mesh data.
template <DriftModel Model>
struct HierarchyState {
  ProblemSpec<Model> spec;
  int coarsest = 0;  ///< L
  std::vector<LevelPath> levels;
  std::vector<LevelGeometry> geometry;

  [[nodiscard]] int level_count() const noexcept { return coarsest + 1; }

  [[nodiscard]] double log_density(int level) const {
    return log_level_density(std::span<const double>(levels[static_cast<std::size_t>(level)].values),
                             geometry[static_cast<std::size_t>(level)], spec);
  }

  /// Throws on any broken invariant.
  void check() const {
    if (levels.size() != static_cast<std::size_t>(coarsest + 1) || geometry.size() != levels.size()) {
      throw MeshMismatch("hierarchy must hold L + 1 levels");
    }
    if ((spec.steps >> coarsest) < 2) throw DivisibilityError("N / 2^L must be at least 2");
    for (int l = 0; l <= coarsest; ++l) {
      const LevelPath& path = levels[static_cast<std::size_t>(l)];
      if (path.level != l) throw MeshMismatch("level index mismatch at position " + std::to_string(l));
      check_level_path(path, spec);
      if (l > 0 && levels[static_cast<std::size_t>(l - 1)].values.size() != 2 * path.values.size() - 1) {
        throw MeshMismatch("adjacent levels must have a 2:1 mesh ratio");
      }
    }
  }
};

/// Starting value at fine index `global`: the end-value line for bridges, the
/// piecewise-linear interpolant of the observations for smoothing.
template <DriftModel Model>
double initial_guess(const ProblemSpec<Model>& spec, std::int64_t global) {
  if (spec.is_bridge()) {
    const double w = static_cast<double>(global) / static_cast<double>(spec.steps);
    return (1.0 - w) * spec.z_minus + w * spec.z_plus;
  }
  const auto& times = spec.observations.times;
  const auto& values = spec.observations.values;
  std::size_t j = 0;
  while (j + 1 < times.size() && times[j + 1] < global) ++j;
  if (j + 1 == times.size()) return values.back();
  const double w = static_cast<double>(global - times[j]) / static_cast<double>(times[j + 1] - times[j]);
  return (1.0 - w) * values[j] + w * values[j + 1];
}

/// Builds levels 0..L independently. Each free point gets the initial guess plus
/// N(0, noise_scale^2 * 2^(l-1) * delta) noise from its level's init stream.
template <DriftModel Model>
HierarchyState<Model> init_hierarchy(const ProblemSpec<Model>& spec, int coarsest, const StreamFactory& streams,
                                     double noise_scale = 1.0) {
  if (coarsest < 0 || coarsest > 62 || ((spec.steps >> coarsest) << coarsest) != spec.steps) {
    throw DivisibilityError("2^L must divide N (L = " + std::to_string(coarsest) + ", N = " +
                            std::to_string(spec.steps) + ")");
  }
  if ((spec.steps >> coarsest) < 2) throw DivisibilityError("N / 2^L must be at least 2");

  HierarchyState<Model> state;
  state.spec = spec;
  state.coarsest = coarsest;
  for (int l = 0; l <= coarsest; ++l) {
    LevelGeometry geo = level_geometry(spec, l);  // rejects off-mesh observations
    LevelPath path;
    path.level = l;
    path.spacing = geo.spacing;
    path.values.resize(static_cast<std::size_t>(geo.points));
    auto rng = streams.stream(StreamRole::init, l, 0);
    std::normal_distribution<double> noise(0.0, noise_scale * std::sqrt(0.5 * geo.spacing));
    for (std::int64_t k = 0; k < geo.points; ++k) {
      double value = initial_guess(spec, global_index(l, k));
      if (k >= geo.first_free && k <= geo.last_free && noise_scale != 0.0) value += noise(rng);
      path.values[static_cast<std::size_t>(k)] = value;
    }
    if (spec.is_bridge()) {
      path.values.front() = spec.z_minus;
      path.values.back() = spec.z_plus;
    }
    state.levels.push_back(std::move(path));
    state.geometry.push_back(std::move(geo));
  }
  return state;
}

}  // namespace pmmc
