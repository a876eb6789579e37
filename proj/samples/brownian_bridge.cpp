// Samples a Brownian bridge with a four-level hierarchy and compares the
// midpoint variance with the exact value T/4.

#include <cstdio>

#include "pmmc/pmmc.hpp"

int main() {
  const auto spec = pmmc::ProblemSpec<pmmc::ZeroDrift>::bridge(pmmc::ZeroDrift{1.0}, 1.0, 64, 0.0, 0.0);
  const pmmc::StreamFactory streams(2024);
  auto state = pmmc::init_hierarchy(spec, 3, streams);

  pmmc::PmSettings settings;
  settings.alpha = 0.5;
  pmmc::SwapRateTable rates(state.coarsest);

  const int iterations = 20000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int step = 0; step < iterations; ++step) {
    const auto record = pmmc::pm_step(state, settings, streams, static_cast<std::uint64_t>(step));
    if (record.swap) rates.record(*record.swap);
    const double mid = state.levels[0].values[32];
    sum += mid;
    sum_sq += mid * mid;
  }
  const double mean = sum / iterations;
  std::printf("midpoint mean %.4f, variance %.4f (exact 0.25)\n", mean, sum_sq / iterations - mean * mean);
  for (int l = 0; l < state.coarsest; ++l) std::printf("swap %d/%d rate %.3f\n", l, l + 1, rates.rate(l));
}
