#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace pmmc::testing {

/// Covariance of the free points of the discretized zero-drift bridge, the
/// inverse of its tridiagonal precision matrix (2 on the diagonal, -1 off it,
/// scaled by 1 / (sigma^2 delta)).
inline Eigen::MatrixXd discrete_bridge_covariance(std::int64_t steps, double delta, double sigma) {
  const auto n = static_cast<Eigen::Index>(steps - 1);
  Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(n, n);
  const double s = 1.0 / (sigma * sigma * delta);
  for (Eigen::Index i = 0; i < n; ++i) {
    precision(i, i) = 2.0 * s;
    if (i + 1 < n) precision(i, i + 1) = precision(i + 1, i) = -s;
  }
  return precision.inverse();
}

/// Variance of the bridge value at fine index k (1 <= k <= steps - 1).
inline double discrete_bridge_variance(std::int64_t steps, double delta, double sigma, std::int64_t k) {
  return discrete_bridge_covariance(steps, delta, sigma)(k - 1, k - 1);
}

}  // namespace pmmc::testing
