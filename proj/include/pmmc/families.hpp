#pragma once

#include <cmath>
#include <concepts>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "pmmc/reference.hpp"
#include "pmmc/rng.hpp"

namespace pmmc {

using PathView = std::span<const double>;
using PathSequence = std::span<const PathView>;

/// Reference transition densities p^j(u^j | (u^0..u^{j-1}), hat) together with a
/// weighting function lambda^j((u^0..u^j), hat_a, hat_b). The swap is exact for
/// any lambda obeying
///   lambda^j((u^0..u^j), a, b) == lambda^j((u^j..u^0), b, a).
template <class F>
concept SequentialKernelFamily =
    requires(const F& f, PathSequence history, PathView u, PathView hat, std::span<double> out, Philox4x32& rng) {
      f.sample(history, hat, out, rng);
      { f.log_step_density(u, history, hat) } -> std::convertible_to<double>;
      { f.log_lambda(history, hat, hat) } -> std::convertible_to<double>;
    };

/// log p^j((s^1..s^j) | s^0, hat) as the product of the step densities.
template <SequentialKernelFamily F>
double log_chain_density(const F& family, PathSequence sequence, PathView hat) {
  double total = 0.0;
  for (std::size_t m = 1; m < sequence.size(); ++m) {
    total += family.log_step_density(sequence[m], sequence.first(m), hat);
  }
  return total;
}

inline std::vector<PathView> reversed(PathSequence sequence) { return {sequence.rbegin(), sequence.rend()}; }

/// Independent draws from p_l(. | hat) with
///   lambda^j = 1 / (p_l(u^j | a) p_l(u^0 | b)).
template <ReferenceConditional Ref>
struct IndependentFamily {
  Ref reference;

  template <class Rng>
  void sample(PathSequence, PathView hat, std::span<double> out, Rng& rng) const {
    reference.sample(hat, out, rng);
  }

  [[nodiscard]] double log_step_density(PathView u, PathSequence, PathView hat) const {
    return reference.log_density(u, hat);
  }

  [[nodiscard]] double log_lambda(PathSequence sequence, PathView hat_a, PathView hat_b) const {
    return -reference.log_density(sequence.back(), hat_a) - reference.log_density(sequence.front(), hat_b);
  }
};

/// Autoregressive kernel reversible with respect to the midpoint Gaussian:
///   u^j = m(hat) + c (u^{j-1} - m(hat)) + sqrt(1 - c^2) N(0, v).
/// lambda has the form q^j / (p^j(reverse | a) p^j(forward | b)) with
/// q^j = prod_{i=1}^{j-1} N(u^i; (m(a) + m(b)) / 2, v), which makes every
/// weight an unbiased estimate of the marginal.
struct AutoregressiveFamily {
  MidpointGaussian reference;
  double correlation = 0.5;

  AutoregressiveFamily(MidpointGaussian ref, double c) : reference(ref), correlation(c) {
    if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("autoregressive correlation must lie in [0, 1)");
  }

  template <class Rng>
  void sample(PathSequence history, PathView hat, std::span<double> out, Rng& rng) const {
    const PathView previous = history.back();
    std::normal_distribution<double> noise(0.0, std::sqrt((1.0 - correlation * correlation) * reference.variance));
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double m = MidpointGaussian::mean(hat, k);
      out[k] = m + correlation * (previous[k] - m) + noise(rng);
    }
  }

  [[nodiscard]] double log_step_density(PathView u, PathSequence history, PathView hat) const {
    const PathView previous = history.back();
    const double var = (1.0 - correlation * correlation) * reference.variance;
    double total = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double m = MidpointGaussian::mean(hat, k);
      total += log_normal_pdf(u[k], m + correlation * (previous[k] - m), var);
    }
    return total;
  }

  [[nodiscard]] double log_bridging_density(PathSequence sequence, PathView hat_a, PathView hat_b) const {
    double total = 0.0;
    for (std::size_t i = 1; i + 1 < sequence.size(); ++i) {
      for (std::size_t k = 0; k < sequence[i].size(); ++k) {
        const double m = 0.5 * (MidpointGaussian::mean(hat_a, k) + MidpointGaussian::mean(hat_b, k));
        total += log_normal_pdf(sequence[i][k], m, reference.variance);
      }
    }
    return total;
  }

  [[nodiscard]] double log_lambda(PathSequence sequence, PathView hat_a, PathView hat_b) const {
    const auto back = reversed(sequence);
    return log_bridging_density(sequence, hat_a, hat_b) - log_chain_density(*this, back, hat_a) -
           log_chain_density(*this, sequence, hat_b);
  }
};

}  // namespace pmmc
