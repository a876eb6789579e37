#pragma once

#include <cmath>
#include <concepts>
#include <numbers>
#include <random>
#include <span>

#include "pmmc/rng.hpp"

namespace pmmc {

inline double log_normal_pdf(double x, double mean, double variance) noexcept {
  const double d = x - mean;
  return -0.5 * d * d / variance - 0.5 * std::log(2.0 * std::numbers::pi * variance);
}

/// A tractable density p_l(tilde | hat) that can be sampled and evaluated.
template <class R>
concept ReferenceConditional =
    requires(const R& r, std::span<const double> hat, std::span<const double> tilde, std::span<double> out,
             Philox4x32& rng) {
      r.sample(hat, out, rng);
      { r.log_density(tilde, hat) } -> std::convertible_to<double>;
    };

/// Independent Gaussians centred on the midpoint of the two hat neighbours,
/// variance 2^(l-1) * delta. Tilde index k sits between hat k and hat k + 1.
struct MidpointGaussian {
  double variance = 1.0;

  static MidpointGaussian for_level(int level, double delta) { return {std::ldexp(delta, level - 1)}; }

  [[nodiscard]] static double mean(std::span<const double> hat, std::size_t k) noexcept {
    return 0.5 * (hat[k] + hat[k + 1]);
  }

  template <class Rng>
  void sample(std::span<const double> hat, std::span<double> out, Rng& rng) const {
    std::normal_distribution<double> noise(0.0, std::sqrt(variance));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = mean(hat, k) + noise(rng);
  }

  [[nodiscard]] double log_density(std::span<const double> tilde, std::span<const double> hat) const {
    double total = 0.0;
    for (std::size_t k = 0; k < tilde.size(); ++k) total += log_normal_pdf(tilde[k], mean(hat, k), variance);
    return total;
  }
};

}  // namespace pmmc
