#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pmmc/density.hpp"
#include "pmmc/errors.hpp"
#include "pmmc/families.hpp"
#include "pmmc/hierarchy.hpp"
#include "pmmc/reference.hpp"
#include "pmmc/rng.hpp"

namespace pmmc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(sum(exp(w))) without overflow; -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> log_w) {
  double top = kNegInf;
  for (double w : log_w) top = std::max(top, w);
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double w : log_w) sum += std::exp(w - top);
  return top + std::log(sum);
}

/// Index drawn with probability proportional to exp(log_w) by the Gumbel-max
/// construction. Consumes exactly one draw per entry. Returns log_w.size() when
/// every weight is zero.
template <class Rng>
std::size_t gumbel_select(std::span<const double> log_w, Rng& rng) {
  std::size_t best = log_w.size();
  double best_key = kNegInf;
  for (std::size_t j = 0; j < log_w.size(); ++j) {
    const double key = log_w[j] + gumbel(rng);
    if (key > best_key) {
      best_key = key;
      best = j;
    }
  }
  return best;
}

/// Record of one swap proposal between levels `level` and `level + 1`.
struct SwapOutcome {
  int level = 0;
  std::vector<double> log_weights_u;
  std::vector<double> log_weights_v;
  std::size_t selected = 0;  ///< zero-based J
  double acceptance = 0.0;
  bool accepted = false;
  bool degenerate = false;  ///< every W_U was zero; the swap was rejected
};

struct SwapOptions {
  bool strict = false;  ///< throw DegenerateWeights instead of rejecting
};

// ---------------------------------------------------------------------------
// Per-level Metropolis sweeps
// ---------------------------------------------------------------------------

/// One sweep of single-site random-walk Metropolis over the free sites of a
/// level, visited in a fresh random order. Returns the number of accepted moves.
template <DriftModel Model, class Rng>
std::size_t mh_sweep(std::span<double> x, const LevelGeometry& geo, const ProblemSpec<Model>& spec, double step_scale,
                     Rng& rng) {
  if (!(step_scale >= 0.0)) throw std::invalid_argument("step scale must be non-negative");
  std::vector<std::size_t> order(static_cast<std::size_t>(geo.last_free - geo.first_free + 1));
  std::iota(order.begin(), order.end(), static_cast<std::size_t>(geo.first_free));
  std::shuffle(order.begin(), order.end(), rng);

  std::normal_distribution<double> normal;
  std::size_t accepted = 0;
  for (const std::size_t k : order) {
    const double current = x[k];
    const double proposal = current + step_scale * normal(rng);
    const double change = site_log_terms<Model>(x, k, proposal, geo, spec) - site_log_terms<Model>(x, k, current, geo, spec);
    if (change >= 0.0 || open_unit(rng) < std::exp(change)) {
      x[k] = proposal;
      ++accepted;
    }
  }
  return accepted;
}

template <DriftModel Model, class Rng>
std::size_t mh_sweep(LevelPath& path, const ProblemSpec<Model>& spec, double step_scale, Rng& rng) {
  check_level_path(path, spec);
  return mh_sweep(std::span<double>(path.values), level_geometry(spec, path.level), spec, step_scale, rng);
}

// ---------------------------------------------------------------------------
// Swap moves
// ---------------------------------------------------------------------------

namespace detail {

/// Shared bookkeeping of a swap between levels l and l + 1.
template <DriftModel Model>
struct SwapFrame {
  SwapFrame(const HierarchyState<Model>& s, int l)
      : state(s),
        level(l),
        split(split_level(s.levels[static_cast<std::size_t>(l)])),
        coarse(s.levels[static_cast<std::size_t>(l) + 1].values),
        scratch(s.levels[static_cast<std::size_t>(l)].values.size()) {}

  /// log pi_l of the level-l path assembled from `hat` and `tilde`.
  double joint(PathView hat, PathView tilde) {
    merge_into(hat, tilde, scratch);
    return log_level_density<Model>(scratch, state.geometry[static_cast<std::size_t>(level)], state.spec);
  }

  PathView hat() const { return split.hat; }
  PathView tilde() const { return split.tilde; }

  const HierarchyState<Model>& state;
  int level;
  HatTilde split;
  std::vector<double> coarse;  ///< x_{l+1}
  std::vector<double> scratch;
};

template <DriftModel Model>
void check_swap_args(const HierarchyState<Model>& state, int level, int tries) {
  if (level < 0 || level >= state.coarsest) {
    throw std::invalid_argument("swap level " + std::to_string(level) + " outside [0, L)");
  }
  if (tries < 1) throw std::invalid_argument("swap needs at least one reference draw");
}

/// Acceptance, decision and state update common to every swap variant.
template <DriftModel Model, class Rng>
void settle(HierarchyState<Model>& state, SwapFrame<Model>& frame, SwapOutcome& out, PathView chosen, Rng& rng) {
  const double log_coarse_at_hat =
      log_level_density<Model>(frame.hat(), state.geometry[static_cast<std::size_t>(frame.level) + 1], state.spec);
  const double log_coarse_current = state.log_density(frame.level + 1);
  const double log_ratio = log_coarse_at_hat + log_sum_exp(out.log_weights_u) - log_coarse_current -
                           log_sum_exp(out.log_weights_v);
  out.acceptance = std::isnan(log_ratio) ? 0.0 : std::clamp(std::exp(std::min(0.0, log_ratio)), 0.0, 1.0);
  out.accepted = open_unit(rng) < out.acceptance;
  if (!out.accepted) return;
  auto& fine = state.levels[static_cast<std::size_t>(frame.level)].values;
  auto& coarse = state.levels[static_cast<std::size_t>(frame.level) + 1].values;
  merge_into(frame.coarse, chosen, fine);
  coarse = frame.split.hat;
}

template <DriftModel Model>
bool handle_degenerate(SwapOutcome& out, const SwapOptions& options) {
  if (out.selected < out.log_weights_u.size()) return false;
  if (options.strict) {
    throw DegenerateWeights("all W_U weights vanished in the swap between levels " + std::to_string(out.level) +
                            " and " + std::to_string(out.level + 1));
  }
  out.degenerate = true;
  out.selected = 0;
  out.acceptance = 0.0;
  out.accepted = false;
  return true;
}

}  // namespace detail

/// Swap acceptance A_l with the true marginal of level l supplied by `log_marginal`,
/// a callable (level, hat values) -> std::optional<double> returning log pibar_l.
template <DriftModel Model, class Oracle>
double exact_swap_accept(const HierarchyState<Model>& state, int level, const Oracle& log_marginal) {
  detail::check_swap_args(state, level, 1);
  const HatTilde split = split_level(state.levels[static_cast<std::size_t>(level)]);
  const auto& coarse = state.levels[static_cast<std::size_t>(level) + 1].values;
  const std::optional<double> at_coarse = log_marginal(level, PathView(coarse));
  const std::optional<double> at_hat = log_marginal(level, PathView(split.hat));
  if (!at_coarse || !at_hat) {
    throw OracleUnavailable("no marginal available for level " + std::to_string(level));
  }
  const auto& coarse_geo = state.geometry[static_cast<std::size_t>(level) + 1];
  const double log_ratio = *at_coarse + log_level_density<Model>(split.hat, coarse_geo, state.spec) - *at_hat -
                           state.log_density(level + 1);
  return std::clamp(std::exp(std::min(0.0, log_ratio)), 0.0, 1.0);
}

/// Swap with M independent reference draws (parallel marginalization, first form).
template <DriftModel Model, ReferenceConditional Ref, class Rng>
SwapOutcome swap_pm1(HierarchyState<Model>& state, int level, int tries, const Ref& reference, Rng& rng,
                     SwapOptions options = {}) {
  detail::check_swap_args(state, level, tries);
  detail::SwapFrame<Model> frame(state, level);
  const auto m = static_cast<std::size_t>(tries);
  const std::size_t width = frame.split.tilde.size();

  SwapOutcome out;
  out.level = level;
  std::vector<std::vector<double>> u(m, std::vector<double>(width));
  out.log_weights_u.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    reference.sample(frame.coarse, u[j], rng);
    out.log_weights_u[j] = frame.joint(frame.coarse, u[j]) - reference.log_density(u[j], frame.coarse);
  }
  out.selected = gumbel_select(out.log_weights_u, rng);
  if (detail::handle_degenerate<Model>(out, options)) return out;

  std::vector<double> v(width);
  out.log_weights_v.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (j == out.selected) {
      out.log_weights_v[j] = frame.joint(frame.hat(), frame.tilde()) - reference.log_density(frame.tilde(), frame.hat());
      continue;
    }
    reference.sample(frame.hat(), v, rng);
    out.log_weights_v[j] = frame.joint(frame.hat(), v) - reference.log_density(v, frame.hat());
  }
  detail::settle(state, frame, out, u[out.selected], rng);
  return out;
}

/// Swap with sequentially correlated reference draws (parallel marginalization, second form).
template <DriftModel Model, SequentialKernelFamily Family, class Rng>
SwapOutcome swap_pm2(HierarchyState<Model>& state, int level, int tries, const Family& family, Rng& rng,
                     SwapOptions options = {}) {
  detail::check_swap_args(state, level, tries);
  detail::SwapFrame<Model> frame(state, level);
  const auto m = static_cast<std::size_t>(tries);
  const std::size_t width = frame.split.tilde.size();
  const PathView a = frame.hat();     // hat of level l
  const PathView b = frame.coarse;    // x_{l+1}

  SwapOutcome out;
  out.level = level;

  // u[0] = current tilde, u[j] ~ p^j(. | u[0..j-1], b).
  std::vector<std::vector<double>> u(m + 1, std::vector<double>(width));
  u[0] = frame.split.tilde;
  std::vector<PathView> useq{PathView(u[0])};
  for (std::size_t j = 1; j <= m; ++j) {
    family.sample(useq, b, u[j], rng);
    useq.emplace_back(u[j]);
  }
  out.log_weights_u.resize(m);
  for (std::size_t j = 1; j <= m; ++j) {
    const PathSequence prefix = PathSequence(useq).first(j + 1);
    const auto back = reversed(prefix);
    out.log_weights_u[j - 1] =
        frame.joint(b, u[j]) + log_chain_density(family, back, a) + family.log_lambda(prefix, a, b);
  }
  const std::size_t pick = gumbel_select(out.log_weights_u, rng);
  out.selected = pick;
  if (detail::handle_degenerate<Model>(out, options)) return out;
  const std::size_t big_j = pick + 1;

  // v[0] = u[J], v[k] = u[J - k] for k <= J (so v[J] is the current tilde), fresh draws after.
  std::vector<std::vector<double>> fresh;
  fresh.reserve(m - big_j);
  std::vector<PathView> vseq;
  for (std::size_t k = 0; k <= big_j; ++k) vseq.emplace_back(u[big_j - k]);
  for (std::size_t k = big_j + 1; k <= m; ++k) {
    fresh.emplace_back(width);
    family.sample(vseq, a, fresh.back(), rng);
    vseq.emplace_back(fresh.back());
  }
  out.log_weights_v.resize(m);
  for (std::size_t j = 1; j <= m; ++j) {
    const PathSequence prefix = PathSequence(vseq).first(j + 1);
    const auto back = reversed(prefix);
    out.log_weights_v[j - 1] =
        frame.joint(a, vseq[j]) + log_chain_density(family, back, b) + family.log_lambda(prefix, b, a);
  }
  detail::settle(state, frame, out, u[big_j], rng);
  return out;
}

/// Gaussian noise paths shared between the U and V proposals of a swap.
struct SharedNoise {
  double variance = 0.0;
  std::vector<std::vector<double>> paths;  ///< M rows, one entry per tilde site
};

template <class Rng>
SharedNoise draw_shared_noise(int level, double delta, int tries, std::size_t width, Rng& rng) {
  SharedNoise noise;
  noise.variance = std::ldexp(delta, level - 1);
  std::normal_distribution<double> normal(0.0, std::sqrt(noise.variance));
  noise.paths.assign(static_cast<std::size_t>(tries), std::vector<double>(width));
  for (auto& row : noise.paths) {
    for (double& z : row) z = normal(rng);
  }
  return noise;
}

/// U^m(n) = zeta^m(n) + midpoint of `hat` around n.
inline std::vector<double> recentre(std::span<const double> zeta, PathView hat) {
  std::vector<double> out(zeta.size());
  for (std::size_t k = 0; k < zeta.size(); ++k) out[k] = zeta[k] + MidpointGaussian::mean(hat, k);
  return out;
}

/// The shared-noise swap with the noise supplied by the caller. The remaining
/// randomness (index selection and the accept draw) comes from `rng`.
template <DriftModel Model, class Rng>
SwapOutcome swap_with_shared_noise(HierarchyState<Model>& state, int level, const SharedNoise& noise, Rng& rng,
                                   SwapOptions options = {}) {
  detail::check_swap_args(state, level, static_cast<int>(noise.paths.size()));
  detail::SwapFrame<Model> frame(state, level);
  const std::size_t m = noise.paths.size();
  const MidpointGaussian reference{noise.variance};

  SwapOutcome out;
  out.level = level;
  out.log_weights_u.resize(m);
  std::vector<double> log_noise(m);
  std::vector<std::vector<double>> u(m);
  for (std::size_t j = 0; j < m; ++j) {
    u[j] = recentre(noise.paths[j], frame.coarse);
    log_noise[j] = reference.log_density(u[j], frame.coarse);
    out.log_weights_u[j] = frame.joint(frame.coarse, u[j]) - log_noise[j];
  }
  out.selected = gumbel_select(out.log_weights_u, rng);
  if (detail::handle_degenerate<Model>(out, options)) return out;

  out.log_weights_v.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (j == out.selected) {
      out.log_weights_v[j] = frame.joint(frame.hat(), frame.tilde()) - reference.log_density(frame.tilde(), frame.hat());
    } else {
      // Same zeta, so p_l(V^j | hat) equals p_l(U^j | x_{l+1}).
      out.log_weights_v[j] = frame.joint(frame.hat(), recentre(noise.paths[j], frame.hat())) - log_noise[j];
    }
  }
  detail::settle(state, frame, out, u[out.selected], rng);
  return out;
}

/// Shared-noise swap used for the path-sampling experiments: one set of M noise
/// paths serves both the U and the V proposals.
template <DriftModel Model, class Rng>
SwapOutcome swap_bridge_simplified(HierarchyState<Model>& state, int level, int tries, Rng& rng,
                                   SwapOptions options = {}) {
  detail::check_swap_args(state, level, tries);
  const std::size_t width = state.levels[static_cast<std::size_t>(level)].values.size() / 2;
  const SharedNoise noise = draw_shared_noise(level, state.spec.delta, tries, width, rng);
  return swap_with_shared_noise(state, level, noise, rng, options);
}

// ---------------------------------------------------------------------------
// The mixed transition rule
// ---------------------------------------------------------------------------

enum class SwapVariant { pm1, pm2, simplified };

/// Number of reference draws M for the swap between levels l and l + 1.
struct TrySchedule {
  enum class Kind { linear, dyadic, constant };
  Kind kind = Kind::linear;
  int constant = 1;

  [[nodiscard]] int operator()(int level) const {
    switch (kind) {
      case Kind::linear:
        return level + 1;
      case Kind::dyadic:
        return 1 << level;
      case Kind::constant:
        return constant;
    }
    return 1;
  }
};

inline double default_step_scale(int level, double delta) { return 1.5 * std::sqrt(std::ldexp(delta, level)); }

struct PmSettings {
  double alpha = 0.5;  ///< probability that a step starts with a swap
  TrySchedule tries;
  SwapVariant variant = SwapVariant::simplified;
  std::vector<double> step_scales;  ///< per level; empty means default_step_scale
  double pm2_correlation = 0.5;     ///< autoregressive family used by the pm2 variant
  bool strict = false;
  unsigned threads = 1;  ///< workers for the per-level sweeps
};

struct StepRecord {
  std::optional<SwapOutcome> swap;
  std::vector<std::size_t> sweep_accepts;    ///< per level
  std::vector<std::size_t> sweep_proposals;  ///< per level
};

template <DriftModel Model, class Rng>
SwapOutcome attempt_swap(HierarchyState<Model>& state, int level, const PmSettings& settings, Rng& rng) {
  const int tries = settings.tries(level);
  const SwapOptions options{settings.strict};
  const auto reference = MidpointGaussian::for_level(level, state.spec.delta);
  switch (settings.variant) {
    case SwapVariant::pm1:
      return swap_pm1(state, level, tries, reference, rng, options);
    case SwapVariant::pm2:
      return swap_pm2(state, level, tries, AutoregressiveFamily(reference, settings.pm2_correlation), rng, options);
    case SwapVariant::simplified:
      return swap_bridge_simplified(state, level, tries, rng, options);
  }
  throw std::invalid_argument("unknown swap variant");
}

/// One application of the mixed rule: with probability alpha a swap between a
/// uniformly chosen pair (I, I + 1), then one sweep on every level. Each part
/// draws from its own (role, level, step) stream, so the result does not depend
/// on `settings.threads`.
template <DriftModel Model>
StepRecord pm_step(HierarchyState<Model>& state, const PmSettings& settings, const StreamFactory& streams,
                   std::uint64_t step) {
  if (!(settings.alpha >= 0.0 && settings.alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
  const int levels = state.level_count();
  StepRecord record;

  auto schedule = streams.stream(StreamRole::schedule, 0, step);
  const bool swap_now = open_unit(schedule) < settings.alpha;
  const int pair = std::min(static_cast<int>(open_unit(schedule) * state.coarsest), state.coarsest - 1);
  if (swap_now && state.coarsest > 0) {
    auto rng = streams.stream(StreamRole::swap, pair, step);
    record.swap = attempt_swap(state, pair, settings, rng);
  }

  record.sweep_accepts.assign(static_cast<std::size_t>(levels), 0);
  record.sweep_proposals.assign(static_cast<std::size_t>(levels), 0);
  auto sweep_level = [&](int l) {
    const auto idx = static_cast<std::size_t>(l);
    const double scale =
        settings.step_scales.empty() ? default_step_scale(l, state.spec.delta) : settings.step_scales.at(idx);
    auto rng = streams.stream(StreamRole::sweep, l, step);
    const LevelGeometry& geo = state.geometry[idx];
    record.sweep_accepts[idx] = mh_sweep(std::span<double>(state.levels[idx].values), geo, state.spec, scale, rng);
    record.sweep_proposals[idx] = static_cast<std::size_t>(geo.last_free - geo.first_free + 1);
  };

  const unsigned workers = std::min<unsigned>(std::max(1u, settings.threads), static_cast<unsigned>(levels));
  if (workers <= 1) {
    for (int l = 0; l < levels; ++l) sweep_level(l);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int l = static_cast<int>(w); l < levels; l += static_cast<int>(workers)) sweep_level(l);
      });
    }
  }
  return record;
}

}  // namespace pmmc
