#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "pmmc/errors.hpp"
#include "pmmc/kernels.hpp"

namespace pmmc {

/// A scalar series recorded every `stride` iterations.
struct TraceBuffer {
  std::vector<double> series;
  std::int64_t stride = 1;
  std::string label;

  void push(double value) {
    if (!std::isfinite(value)) throw std::domain_error("non-finite value pushed to trace '" + label + "'");
    series.push_back(value);
  }

  [[nodiscard]] std::size_t size() const noexcept { return series.size(); }
};

/// Attempts and accepts of the swap move for each pair (l, l + 1).
class SwapRateTable {
 public:
  struct Pair {
    std::int64_t attempts = 0;
    std::int64_t accepts = 0;
    std::int64_t degenerate = 0;
  };

  explicit SwapRateTable(int coarsest = 0) : pairs_(static_cast<std::size_t>(std::max(coarsest, 0))) {}

  void record(const SwapOutcome& outcome) {
    Pair& p = pairs_.at(static_cast<std::size_t>(outcome.level));
    ++p.attempts;
    if (outcome.accepted) ++p.accepts;
    if (outcome.degenerate) ++p.degenerate;
  }

  [[nodiscard]] std::size_t size() const noexcept { return pairs_.size(); }
  [[nodiscard]] const Pair& pair(int level) const { return pairs_.at(static_cast<std::size_t>(level)); }

  /// accepts / attempts, or 0 for a pair that was never tried.
  [[nodiscard]] double rate(int level) const {
    const Pair& p = pair(level);
    return p.attempts == 0 ? 0.0 : static_cast<double>(p.accepts) / static_cast<double>(p.attempts);
  }

  [[nodiscard]] std::int64_t total_attempts() const noexcept {
    std::int64_t total = 0;
    for (const Pair& p : pairs_) total += p.attempts;
    return total;
  }

 private:
  std::vector<Pair> pairs_;
};

namespace detail {

inline void check_acf_input(std::span<const double> x, std::size_t max_lag) {
  if (x.size() <= 4 * max_lag || x.size() < 2) {
    throw InsufficientLength("autocorrelation up to lag " + std::to_string(max_lag) + " needs more than " +
                             std::to_string(4 * max_lag) + " samples, got " + std::to_string(x.size()));
  }
}

inline std::vector<double> centred(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v -= mean;
  return out;
}

inline std::vector<double> normalise(std::vector<double> cov) {
  const double c0 = cov.front();
  if (!(c0 > 0.0)) throw InsufficientVariance("series has zero sample variance");
  for (double& c : cov) c /= c0;
  cov.front() = 1.0;
  return cov;
}

}  // namespace detail

/// rho(k) = C(k) / C(0), k = 0..max_lag, with the biased (divide by n)
/// autocovariance, evaluated by zero-padded FFT.
inline std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  detail::check_acf_input(x, max_lag);
  const std::vector<double> d = detail::centred(x);
  const std::size_t n = d.size();
  const std::size_t padded = std::bit_ceil(2 * n);

  std::vector<std::complex<double>> signal(padded), spectrum(padded);
  for (std::size_t i = 0; i < n; ++i) signal[i] = d[i];
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, signal);
  for (auto& c : spectrum) c = std::norm(c);
  fft.inv(signal, spectrum);

  std::vector<double> cov(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) cov[k] = signal[k].real() / static_cast<double>(n);
  return detail::normalise(std::move(cov));
}

inline std::vector<double> autocorrelation(const TraceBuffer& trace, std::size_t max_lag) {
  return autocorrelation(std::span<const double>(trace.series), max_lag);
}

/// Same estimator by direct O(n * max_lag) summation.
inline std::vector<double> autocorrelation_direct(std::span<const double> x, std::size_t max_lag) {
  detail::check_acf_input(x, max_lag);
  const std::vector<double> d = detail::centred(x);
  const std::size_t n = d.size();
  std::vector<double> cov(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) sum += d[i] * d[i + k];
    cov[k] = sum / static_cast<double>(n);
  }
  return detail::normalise(std::move(cov));
}

/// tau_int = -1 + 2 * sum_k Gamma_k, Gamma_k = rho(2k) + rho(2k + 1), summed
/// over Geyer's initial positive sequence.
inline double integrated_act(std::span<const double> x) {
  if (x.size() < 8) throw InsufficientLength("integrated autocorrelation time needs at least 8 samples");
  const std::vector<double> rho = autocorrelation(x, (x.size() - 1) / 4);
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < rho.size(); ++k) {
    const double gamma = rho[2 * k] + rho[2 * k + 1];
    if (!(gamma > 0.0)) break;
    tau += 2.0 * gamma;
  }
  return tau;
}

inline double integrated_act(const TraceBuffer& trace) { return integrated_act(std::span<const double>(trace.series)); }

inline double effective_sample_size(std::span<const double> x) {
  return static_cast<double>(x.size()) / integrated_act(x);
}

struct ComparisonReport {
  double tau_pm = 0.0;
  double tau_mh = 0.0;
  double cost_ratio = 1.0;
  double speedup = 0.0;  ///< tau_mh / (cost_ratio * tau_pm)
};

/// Mixing comparison in which one parallel-marginalization
/// iteration is charged `cost_ratio` single-chain iterations.
inline ComparisonReport cost_normalized_comparison(std::span<const double> pm, std::span<const double> mh,
                                                   double cost_ratio) {
  if (!(cost_ratio > 0.0)) throw std::invalid_argument("cost ratio must be positive");
  ComparisonReport report;
  report.tau_pm = integrated_act(pm);
  report.tau_mh = integrated_act(mh);
  report.cost_ratio = cost_ratio;
  report.speedup = report.tau_mh / (cost_ratio * report.tau_pm);
  return report;
}

inline ComparisonReport cost_normalized_comparison(const TraceBuffer& pm, const TraceBuffer& mh, double cost_ratio) {
  return cost_normalized_comparison(std::span<const double>(pm.series), std::span<const double>(mh.series),
                                    cost_ratio);
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

inline void write_autocorr_csv(std::ostream& os, std::span<const double> rho_pm, std::span<const double> rho_mh) {
  os << "lag,rho_pm,rho_mh\n" << std::setprecision(17);
  const std::size_t rows = std::max(rho_pm.size(), rho_mh.size());
  for (std::size_t k = 0; k < rows; ++k) {
    os << k << ',';
    if (k < rho_pm.size()) os << rho_pm[k];
    os << ',';
    if (k < rho_mh.size()) os << rho_mh[k];
    os << '\n';
  }
}

inline void write_swaprates_csv(std::ostream& os, const SwapRateTable& table) {
  os << "level_low,level_high,attempts,accepts,rate\n" << std::setprecision(17);
  for (std::size_t l = 0; l < table.size(); ++l) {
    const auto& p = table.pair(static_cast<int>(l));
    os << l << ',' << l + 1 << ',' << p.attempts << ',' << p.accepts << ',' << table.rate(static_cast<int>(l))
       << '\n';
  }
}

/// Columns iter, <column>; iter counts recorded iterations from `first_iter`.
inline void write_trace_csv(std::ostream& os, const TraceBuffer& trace, std::int64_t first_iter = 0,
                            const std::string& column = "y_mid") {
  os << "iter," << column << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    os << first_iter + static_cast<std::int64_t>(i) * trace.stride << ',' << trace.series[i] << '\n';
  }
}

/// Columns time, value for a path on mesh spacing `spacing`.
inline void write_path_csv(std::ostream& os, std::span<const double> values, double spacing) {
  os << "time,value\n" << std::setprecision(17);
  for (std::size_t k = 0; k < values.size(); ++k) os << static_cast<double>(k) * spacing << ',' << values[k] << '\n';
}

}  // namespace pmmc
