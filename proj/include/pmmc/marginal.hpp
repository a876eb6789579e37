#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "pmmc/density.hpp"
#include "pmmc/hierarchy.hpp"
#include "pmmc/model.hpp"
#include "pmmc/problem.hpp"

namespace pmmc {

/// Closed-form log pibar_l(hat) for a zero-drift problem: each tilde variable is
/// a Gaussian integral between its two hat neighbours.
class GaussianBridgeMarginal {
 public:
  explicit GaussianBridgeMarginal(ProblemSpec<ZeroDrift> spec) : spec_(std::move(spec)) {}

  std::optional<double> operator()(int level, std::span<const double> hat) const {
    const double s2h = spec_.model.sigma * spec_.model.sigma * std::ldexp(spec_.delta, level);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < hat.size(); ++k) {
      const double d = hat[k + 1] - hat[k];
      total += 0.5 * std::log(std::numbers::pi * s2h) - d * d / (4.0 * s2h);
    }
    if (!spec_.is_bridge()) {
      const LevelGeometry coarse = level_geometry(spec_, level + 1);
      total += spec_.observations.initial_log_density(hat.front());
      for (std::size_t k = 0; k < hat.size(); ++k) {
        if (const int slot = coarse.observation_slot[k]; slot >= 0) {
          total += spec_.observations.log_likelihood(static_cast<std::size_t>(slot), hat[k]);
        }
      }
    }
    return total;
  }

 private:
  ProblemSpec<ZeroDrift> spec_;
};

/// log pibar_l(hat) by composite Simpson quadrature of exp(log pi_l) over a
/// tensor grid covering every tilde coordinate. Only small problems qualify:
/// returns nullopt when the level has more than `max_dims` tilde variables.
template <DriftModel Model>
class TensorQuadratureMarginal {
 public:
  explicit TensorQuadratureMarginal(ProblemSpec<Model> spec, double lower = -5.0, double upper = 5.0,
                                    int points = 2001, std::size_t max_dims = 2)
      : spec_(std::move(spec)), lower_(lower), upper_(upper), points_(points | 1), max_dims_(max_dims) {
    const double step = (upper_ - lower_) / (points_ - 1);
    nodes_.resize(static_cast<std::size_t>(points_));
    log_weights_.resize(nodes_.size());
    for (int i = 0; i < points_; ++i) {
      nodes_[static_cast<std::size_t>(i)] = lower_ + i * step;
      const double w = (i == 0 || i == points_ - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      log_weights_[static_cast<std::size_t>(i)] = std::log(w * step / 3.0);
    }
  }

  std::optional<double> operator()(int level, std::span<const double> hat) const {
    const std::size_t dims = hat.size() - 1;
    if (dims > max_dims_) return std::nullopt;
    const LevelGeometry geo = level_geometry(spec_, level);
    std::vector<double> path(hat.size() + dims);
    std::vector<double> tilde(dims);
    std::vector<std::size_t> index(dims, 0);

    // Log-sum-exp accumulated over the grid in two passes.
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(std::pow(static_cast<double>(points_), static_cast<double>(dims))));
    while (true) {
      double log_w = 0.0;
      for (std::size_t d = 0; d < dims; ++d) {
        tilde[d] = nodes_[index[d]];
        log_w += log_weights_[index[d]];
      }
      merge_into(hat, tilde, path);
      terms.push_back(log_w + log_level_density<Model>(path, geo, spec_));
      std::size_t d = 0;
      while (d < dims && ++index[d] == nodes_.size()) index[d++] = 0;
      if (d == dims) break;
    }
    const double top = *std::max_element(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - top);
    return top + std::log(sum);
  }

 private:
  ProblemSpec<Model> spec_;
  double lower_;
  double upper_;
  int points_;
  std::size_t max_dims_;
  std::vector<double> nodes_;
  std::vector<double> log_weights_;
};

}  // namespace pmmc
