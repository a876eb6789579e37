#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <string>

#include "pmmc/errors.hpp"

namespace pmmc {

/// Scalar SDE dZ = f(Z) dt + sigma(Z) dW with the analytic slope f'.
template <class M>
concept DriftModel = requires(const M& m, double x) {
  { m.drift(x) } -> std::convertible_to<double>;
  { m.drift_derivative(x) } -> std::convertible_to<double>;
  { m.diffusion(x) } -> std::convertible_to<double>;
};

/// f(x) = -4x(x^2 - 1): wells at +-1, barrier at 0.
struct DoubleWell {
  double sigma = 1.0;

  [[nodiscard]] double drift(double x) const noexcept { return -4.0 * x * (x * x - 1.0); }
  [[nodiscard]] double drift_derivative(double x) const noexcept { return 4.0 - 12.0 * x * x; }
  [[nodiscard]] double diffusion(double) const noexcept { return sigma; }
};

struct ZeroDrift {
  double sigma = 1.0;

  [[nodiscard]] double drift(double) const noexcept { return 0.0; }
  [[nodiscard]] double drift_derivative(double) const noexcept { return 0.0; }
  [[nodiscard]] double diffusion(double) const noexcept { return sigma; }
};

/// Ornstein-Uhlenbeck drift -rate * x.
struct LinearDrift {
  double rate = 1.0;
  double sigma = 1.0;

  [[nodiscard]] double drift(double x) const noexcept { return -rate * x; }
  [[nodiscard]] double drift_derivative(double) const noexcept { return -rate; }
  [[nodiscard]] double diffusion(double) const noexcept { return sigma; }
};

/// Type-erased model for callers that only have callables.
struct FunctionDrift {
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
  std::function<double(double)> sigma;

  [[nodiscard]] double drift(double x) const { return f(x); }
  [[nodiscard]] double drift_derivative(double x) const { return f_prime(x); }
  [[nodiscard]] double diffusion(double x) const { return sigma(x); }
};

inline constexpr double kDenominatorFloor = 1e-12;

/// One step of the linearly implicit Euler scheme
///   y = x + f(x) dt + (y - x) f'(x) dt + sigma(x) sqrt(dt) xi,
/// solved for y.
template <DriftModel Model>
double lie_step(double x, double xi, double dt, const Model& model) {
  const double denominator = 1.0 - dt * model.drift_derivative(x);
  if (std::abs(denominator) < kDenominatorFloor) {
    throw DegenerateDenominator("implicit Euler denominator vanished at x = " + std::to_string(x) +
                                ", dt = " + std::to_string(dt));
  }
  return x + (model.drift(x) * dt + model.diffusion(x) * std::sqrt(dt) * xi) / denominator;
}

/// Negative log transition weight of the implicit Euler step x -> y over dt,
/// without the Jacobian prefactor. V(x, lie_step(x, xi, dt)) == xi^2 / 2.
template <DriftModel Model>
double v_potential(double x, double y, double dt, const Model& model) {
  const double s = model.diffusion(x);
  const double r = (1.0 - dt * model.drift_derivative(x)) * (y - x) - dt * model.drift(x);
  return r * r / (2.0 * s * s * dt);
}

}  // namespace pmmc
