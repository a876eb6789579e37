#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "pmmc/diagnostics.hpp"
#include "pmmc/errors.hpp"
#include "pmmc/hierarchy.hpp"
#include "pmmc/kernels.hpp"
#include "pmmc/model.hpp"
#include "pmmc/presets.hpp"
#include "pmmc/problem.hpp"

namespace pmmc {

enum class ExperimentKind { bridge, smoothing, custom };
enum class DriftKind { double_well, zero, linear };

/// Every knob of a run. `resolve_config` fills the experiment defaults first, so
/// the member initializers here only matter for hand-built configs.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::bridge;
  std::uint64_t seed = 1;
  std::int64_t iters = 0;
  double burn_in_fraction = 0.1;
  bool baseline_mh = false;
  std::int64_t baseline_iters = 0;  ///< 0 means the same count as iters

  ProblemKind problem = ProblemKind::bridge;
  DriftKind drift = DriftKind::double_well;
  double sigma = 1.0;
  double rate = 1.0;  ///< linear drift only
  double horizon = presets::kHorizon;
  std::int64_t steps = presets::kSteps;
  int levels = presets::kBridgeLevels;
  double z_minus = 0.0;
  double z_plus = 0.0;

  double alpha = 0.5;
  TrySchedule tries;
  SwapVariant variant = SwapVariant::simplified;
  std::vector<double> step_scales;  ///< empty means auto
  double pm2_correlation = 0.5;
  bool strict = false;
  unsigned threads = 1;

  std::string output_dir = "pmrun_out";
  std::int64_t trace_stride = 1;
  std::int64_t path_every = 0;  ///< 0 disables path snapshots
  std::int64_t max_lag = 1000;
  std::int64_t mean_window = 1000;
};

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

namespace detail {

template <class Enum>
struct NamedValue {
  const char* name;
  Enum value;
};

inline constexpr NamedValue<ExperimentKind> kExperimentNames[] = {
    {"bridge", ExperimentKind::bridge}, {"smoothing", ExperimentKind::smoothing}, {"custom", ExperimentKind::custom}};
inline constexpr NamedValue<ProblemKind> kProblemNames[] = {{"bridge", ProblemKind::bridge},
                                                            {"smoothing", ProblemKind::smoothing}};
inline constexpr NamedValue<DriftKind> kDriftNames[] = {
    {"double_well", DriftKind::double_well}, {"zero", DriftKind::zero}, {"linear", DriftKind::linear}};
inline constexpr NamedValue<SwapVariant> kVariantNames[] = {
    {"pm1", SwapVariant::pm1}, {"pm2", SwapVariant::pm2}, {"simplified", SwapVariant::simplified}};

template <class Enum, std::size_t N>
Enum parse_name(const NamedValue<Enum> (&table)[N], const std::string& text, const std::string& field) {
  std::string choices;
  for (const auto& entry : table) {
    if (text == entry.name) return entry.value;
    choices += (choices.empty() ? "" : "|") + std::string(entry.name);
  }
  throw ConfigError(field, "unknown value '" + text + "', expected " + choices);
}

template <class Enum, std::size_t N>
std::string name_of(const NamedValue<Enum> (&table)[N], Enum value) {
  for (const auto& entry : table) {
    if (entry.value == value) return entry.name;
  }
  return "?";
}

}  // namespace detail

inline std::string to_string(ExperimentKind k) { return detail::name_of(detail::kExperimentNames, k); }
inline std::string to_string(ProblemKind k) { return detail::name_of(detail::kProblemNames, k); }
inline std::string to_string(DriftKind k) { return detail::name_of(detail::kDriftNames, k); }
inline std::string to_string(SwapVariant k) { return detail::name_of(detail::kVariantNames, k); }

inline std::string to_string(const TrySchedule& s) {
  switch (s.kind) {
    case TrySchedule::Kind::linear:
      return "linear";
    case TrySchedule::Kind::dyadic:
      return "dyadic";
    case TrySchedule::Kind::constant:
      return "constant:" + std::to_string(s.constant);
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parsing and validation
// ---------------------------------------------------------------------------

/// Defaults for a named experiment before any file or flag is applied.
inline ExperimentConfig experiment_defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.iters = 200000;
  switch (kind) {
    case ExperimentKind::bridge:
    case ExperimentKind::custom:
      c.problem = ProblemKind::bridge;
      c.levels = presets::kBridgeLevels;
      c.tries = {TrySchedule::Kind::linear, 1};
      break;
    case ExperimentKind::smoothing:
      c.problem = ProblemKind::smoothing;
      c.levels = presets::kSmoothingLevels;
      c.tries = {TrySchedule::Kind::dyadic, 1};
      break;
  }
  return c;
}

/// Raw `section.key = value` assignments; later assignments win.
using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

/// Reads INI text into ordered assignments. Parse errors carry the line number.
inline ConfigOverrides parse_config_text(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser::ini_parser_error& e) {
    throw ConfigError("syntax", e.message(), static_cast<int>(e.line()));
  }
  ConfigOverrides out;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(section, "key outside of a [section]");
    }
    for (const auto& [key, value] : body) out.emplace_back(section + "." + key, value.data());
  }
  return out;
}

namespace detail {

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline double parse_real(const std::string& text, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(field, "expected a real number, got '" + text + "'");
}

inline std::int64_t parse_integer(const std::string& text, const std::string& field) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(field, "expected an integer, got '" + text + "'");
}

inline std::uint64_t parse_seed(const std::string& text, const std::string& field) {
  try {
    std::size_t used = 0;
    if (!text.empty() && text.front() != '-') {
      const unsigned long long v = std::stoull(text, &used, 0);
      if (trim(text.substr(used)).empty()) return v;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(field, "expected a non-negative 64-bit integer, got '" + text + "'");
}

inline bool parse_bool(const std::string& text, const std::string& field) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(field, "expected true or false, got '" + text + "'");
}

inline TrySchedule parse_schedule(const std::string& text, const std::string& field) {
  if (text == "linear") return {TrySchedule::Kind::linear, 1};
  if (text == "dyadic") return {TrySchedule::Kind::dyadic, 1};
  if (text.rfind("constant:", 0) == 0) {
    return {TrySchedule::Kind::constant, static_cast<int>(parse_integer(text.substr(9), field))};
  }
  throw ConfigError(field, "expected linear, dyadic or constant:<c>, got '" + text + "'");
}

inline std::vector<double> parse_scales(const std::string& text, const std::string& field) {
  if (text == "auto") return {};
  std::vector<double> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) out.push_back(parse_real(trim(item), field));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment.name", [](auto&, auto&, auto&) {}},  // consumed by resolve_config
      {"experiment.seed", [](auto& c, auto& v, auto& f) { c.seed = parse_seed(v, f); }},
      {"experiment.iters", [](auto& c, auto& v, auto& f) { c.iters = parse_integer(v, f); }},
      {"experiment.burn_in_fraction", [](auto& c, auto& v, auto& f) { c.burn_in_fraction = parse_real(v, f); }},
      {"experiment.baseline_mh", [](auto& c, auto& v, auto& f) { c.baseline_mh = parse_bool(v, f); }},
      {"experiment.baseline_iters", [](auto& c, auto& v, auto& f) { c.baseline_iters = parse_integer(v, f); }},
      {"problem.kind", [](auto& c, auto& v, auto& f) { c.problem = parse_name(kProblemNames, v, f); }},
      {"problem.drift", [](auto& c, auto& v, auto& f) { c.drift = parse_name(kDriftNames, v, f); }},
      {"problem.sigma", [](auto& c, auto& v, auto& f) { c.sigma = parse_real(v, f); }},
      {"problem.rate", [](auto& c, auto& v, auto& f) { c.rate = parse_real(v, f); }},
      {"problem.T", [](auto& c, auto& v, auto& f) { c.horizon = parse_real(v, f); }},
      {"problem.N", [](auto& c, auto& v, auto& f) { c.steps = parse_integer(v, f); }},
      {"problem.L", [](auto& c, auto& v, auto& f) { c.levels = static_cast<int>(parse_integer(v, f)); }},
      {"problem.z_minus", [](auto& c, auto& v, auto& f) { c.z_minus = parse_real(v, f); }},
      {"problem.z_plus", [](auto& c, auto& v, auto& f) { c.z_plus = parse_real(v, f); }},
      {"sampler.alpha", [](auto& c, auto& v, auto& f) { c.alpha = parse_real(v, f); }},
      {"sampler.m_schedule", [](auto& c, auto& v, auto& f) { c.tries = parse_schedule(v, f); }},
      {"sampler.variant", [](auto& c, auto& v, auto& f) { c.variant = parse_name(kVariantNames, v, f); }},
      {"sampler.mh_step_scales", [](auto& c, auto& v, auto& f) { c.step_scales = parse_scales(v, f); }},
      {"sampler.pm2_correlation", [](auto& c, auto& v, auto& f) { c.pm2_correlation = parse_real(v, f); }},
      {"sampler.strict", [](auto& c, auto& v, auto& f) { c.strict = parse_bool(v, f); }},
      {"sampler.threads",
       [](auto& c, auto& v, auto& f) {
         const auto n = parse_integer(v, f);
         if (n < 1 || n > 1024) throw ConfigError(f, "must lie in [1, 1024]");
         c.threads = static_cast<unsigned>(n);
       }},
      {"output.dir", [](auto& c, auto& v, auto&) { c.output_dir = v; }},
      {"output.trace_stride", [](auto& c, auto& v, auto& f) { c.trace_stride = parse_integer(v, f); }},
      {"output.path_every", [](auto& c, auto& v, auto& f) { c.path_every = parse_integer(v, f); }},
      {"output.max_lag", [](auto& c, auto& v, auto& f) { c.max_lag = parse_integer(v, f); }},
      {"output.mean_window", [](auto& c, auto& v, auto& f) { c.mean_window = parse_integer(v, f); }},
  };
  return table;
}

inline void require(bool ok, const std::string& field, const std::string& bound) {
  if (!ok) throw ConfigError(field, bound);
}

}  // namespace detail

/// Range checks; throws ConfigError naming the field and the violated bound.
inline void validate_config(const ExperimentConfig& c) {
  using detail::require;
  require(c.iters >= 0, "experiment.iters", "must be >= 0");
  require(c.baseline_iters >= 0, "experiment.baseline_iters", "must be >= 0");
  require(c.burn_in_fraction >= 0.0 && c.burn_in_fraction < 1.0, "experiment.burn_in_fraction",
          "must lie in [0, 1)");
  require(c.sigma > 0.0, "problem.sigma", "must be > 0");
  require(c.horizon > 0.0, "problem.T", "must be > 0");
  require(c.steps >= 2, "problem.N", "must be >= 2");
  require(c.levels >= 0 && c.levels <= 30, "problem.L", "must lie in [0, 30]");
  require(c.steps % (std::int64_t{1} << c.levels) == 0, "problem.N",
          "must be divisible by 2^L = " + std::to_string(std::int64_t{1} << c.levels));
  require(c.steps / (std::int64_t{1} << c.levels) >= 2, "problem.N", "must be at least 2 * 2^L");
  if (c.problem == ProblemKind::smoothing) {
    const double count = std::round(c.horizon);
    require(count >= 1.0 && std::abs(c.horizon - count) < 1e-12, "problem.T",
            "must be a whole number for the integer-time observations");
    const auto n = static_cast<std::int64_t>(count);
    require(c.steps % n == 0 && (c.steps / n) % (std::int64_t{1} << c.levels) == 0, "problem.N",
            "observation spacing N / T must be divisible by 2^L");
  }
  require(c.alpha >= 0.0 && c.alpha < 1.0, "sampler.alpha", "must lie in [0, 1)");
  require(c.tries.kind != TrySchedule::Kind::constant || (c.tries.constant >= 1 && c.tries.constant <= 1000000),
          "sampler.m_schedule", "constant M must lie in [1, 1000000]");
  require(c.tries.kind != TrySchedule::Kind::dyadic || c.levels <= 21, "sampler.m_schedule",
          "dyadic M needs L <= 21");
  require(c.step_scales.empty() || c.step_scales.size() == static_cast<std::size_t>(c.levels + 1),
          "sampler.mh_step_scales", "needs L + 1 = " + std::to_string(c.levels + 1) + " entries or 'auto'");
  for (double s : c.step_scales) require(s > 0.0, "sampler.mh_step_scales", "entries must be > 0");
  require(c.pm2_correlation >= 0.0 && c.pm2_correlation < 1.0, "sampler.pm2_correlation", "must lie in [0, 1)");
  require(c.threads >= 1, "sampler.threads", "must be >= 1");
  require(!c.output_dir.empty(), "output.dir", "must not be empty");
  require(c.trace_stride >= 1, "output.trace_stride", "must be >= 1");
  require(c.path_every >= 0, "output.path_every", "must be >= 0");
  require(c.max_lag >= 1, "output.max_lag", "must be >= 1");
  require(c.mean_window >= 1, "output.mean_window", "must be >= 1");
}

/// Experiment defaults, then `file` assignments, then `flags`, then validation.
inline ExperimentConfig resolve_config(const ConfigOverrides& file, const ConfigOverrides& flags = {}) {
  std::string name = "bridge";
  for (const auto* source : {&file, &flags}) {
    for (const auto& [key, value] : *source) {
      if (key == "experiment.name") name = value;
    }
  }
  ExperimentConfig c = experiment_defaults(detail::parse_name(detail::kExperimentNames, name, "experiment.name"));
  const auto& table = detail::setters();
  for (const auto* source : {&file, &flags}) {
    for (const auto& [key, value] : *source) {
      const auto it = table.find(key);
      if (it == table.end()) throw ConfigError(key, "unknown configuration key");
      it->second(c, detail::trim(value), key);
    }
  }
  if (c.experiment != ExperimentKind::custom) {
    const ProblemKind expected =
        c.experiment == ExperimentKind::smoothing ? ProblemKind::smoothing : ProblemKind::bridge;
    detail::require(c.problem == expected, "problem.kind",
                    "must match the named experiment; use experiment.name = custom to mix them");
  }
  validate_config(c);
  return c;
}

inline ExperimentConfig validate_config(const std::string& text) { return resolve_config(parse_config_text(text)); }

/// The resolved config as INI text that resolve_config reads back unchanged.
inline std::string to_ini_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "[experiment]\n"
     << "name = " << to_string(c.experiment) << "\nseed = " << c.seed << "\niters = " << c.iters
     << "\nburn_in_fraction = " << c.burn_in_fraction << "\nbaseline_mh = " << (c.baseline_mh ? "true" : "false")
     << "\nbaseline_iters = " << c.baseline_iters << "\n\n";
  os << "[problem]\n"
     << "kind = " << to_string(c.problem) << "\ndrift = " << to_string(c.drift) << "\nsigma = " << c.sigma
     << "\nrate = " << c.rate << "\nT = " << c.horizon << "\nN = " << c.steps << "\nL = " << c.levels
     << "\nz_minus = " << c.z_minus << "\nz_plus = " << c.z_plus << "\n\n";
  os << "[sampler]\n"
     << "alpha = " << c.alpha << "\nm_schedule = " << to_string(c.tries) << "\nvariant = " << to_string(c.variant)
     << "\nmh_step_scales = ";
  if (c.step_scales.empty()) os << "auto";
  for (std::size_t i = 0; i < c.step_scales.size(); ++i) os << (i ? "," : "") << c.step_scales[i];
  os << "\npm2_correlation = " << c.pm2_correlation << "\nstrict = " << (c.strict ? "true" : "false")
     << "\nthreads = " << c.threads << "\n\n";
  os << "[output]\n"
     << "dir = " << c.output_dir << "\ntrace_stride = " << c.trace_stride << "\npath_every = " << c.path_every
     << "\nmax_lag = " << c.max_lag << "\nmean_window = " << c.mean_window << "\n";
  return os.str();
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {
      {"experiment", to_string(c.experiment)},
      {"seed", c.seed},
      {"iters", c.iters},
      {"burn_in_fraction", c.burn_in_fraction},
      {"baseline_mh", c.baseline_mh},
      {"baseline_iters", c.baseline_iters},
      {"problem", to_string(c.problem)},
      {"drift", to_string(c.drift)},
      {"sigma", c.sigma},
      {"rate", c.rate},
      {"T", c.horizon},
      {"N", c.steps},
      {"L", c.levels},
      {"z_minus", c.z_minus},
      {"z_plus", c.z_plus},
      {"alpha", c.alpha},
      {"m_schedule", to_string(c.tries)},
      {"variant", to_string(c.variant)},
      {"mh_step_scales", c.step_scales.empty() ? nlohmann::json("auto") : nlohmann::json(c.step_scales)},
      {"pm2_correlation", c.pm2_correlation},
      {"strict", c.strict},
      {"threads", c.threads},
      {"output_dir", c.output_dir},
      {"trace_stride", c.trace_stride},
      {"path_every", c.path_every},
      {"max_lag", c.max_lag},
      {"mean_window", c.mean_window},
  };
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

template <DriftModel Model>
ProblemSpec<Model> make_problem(const ExperimentConfig& c, Model model) {
  if (c.problem == ProblemKind::bridge) {
    return ProblemSpec<Model>::bridge(std::move(model), c.horizon, c.steps, c.z_minus, c.z_plus);
  }
  return ProblemSpec<Model>::smoothing(std::move(model), c.horizon, c.steps,
                                       presets::sign_change_observations(c.horizon, c.steps));
}

using AnyModel = std::variant<DoubleWell, ZeroDrift, LinearDrift>;

inline AnyModel make_model(const ExperimentConfig& c) {
  switch (c.drift) {
    case DriftKind::double_well:
      return DoubleWell{c.sigma};
    case DriftKind::zero:
      return ZeroDrift{c.sigma};
    case DriftKind::linear:
      return LinearDrift{c.rate, c.sigma};
  }
  throw ConfigError("problem.drift", "unknown drift");
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  body(os);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

inline std::optional<std::vector<double>> try_autocorrelation(const TraceBuffer& trace, std::int64_t max_lag) {
  if (trace.size() < 8) return std::nullopt;
  const auto lag = std::min<std::size_t>(static_cast<std::size_t>(max_lag), (trace.size() - 1) / 4);
  try {
    return autocorrelation(trace, lag);
  } catch (const InsufficientVariance&) {
    return std::nullopt;
  }
}

inline nlohmann::json try_act(const TraceBuffer& trace) {
  if (trace.size() < 8) return nullptr;
  try {
    return integrated_act(trace);
  } catch (const InsufficientVariance&) {
    return nullptr;
  }
}

inline nlohmann::json moments(const TraceBuffer& trace) {
  if (trace.size() == 0) return nullptr;
  double mean = 0.0;
  for (double v : trace.series) mean += v;
  mean /= static_cast<double>(trace.size());
  double var = 0.0;
  for (double v : trace.series) var += (v - mean) * (v - mean);
  var /= static_cast<double>(trace.size());
  return {{"mean", mean}, {"variance", var}};
}

template <DriftModel Model>
nlohmann::json run_with(const ExperimentConfig& c, const ProblemSpec<Model>& spec) {
  namespace fs = std::filesystem;
  using clock = std::chrono::steady_clock;
  const fs::path out = c.output_dir;
  fs::create_directories(out);

  const StreamFactory streams(c.seed);
  auto state = init_hierarchy(spec, c.levels, streams);
  PmSettings settings;
  settings.alpha = c.alpha;
  settings.tries = c.tries;
  settings.variant = c.variant;
  settings.step_scales = c.step_scales;
  settings.pm2_correlation = c.pm2_correlation;
  settings.strict = c.strict;
  settings.threads = c.threads;
  const auto scale_at = [&](int l) {
    return c.step_scales.empty() ? default_step_scale(l, spec.delta) : c.step_scales[static_cast<std::size_t>(l)];
  };

  const auto burn_in = static_cast<std::int64_t>(std::floor(c.burn_in_fraction * static_cast<double>(c.iters)));
  const std::size_t mid = static_cast<std::size_t>(spec.steps / 2);
  const int levels = state.level_count();

  SwapRateTable table(c.levels);
  TraceBuffer trace{{}, c.trace_stride, "y_mid"};
  std::vector<std::int64_t> sweep_accepts(static_cast<std::size_t>(levels), 0);
  std::vector<std::int64_t> sweep_proposals(static_cast<std::size_t>(levels), 0);
  std::vector<double> mean_path(state.levels[0].values.size(), 0.0);
  std::int64_t mean_count = 0;
  const std::int64_t mean_start = std::max(burn_in, c.iters - c.mean_window);

  const auto pm_start = clock::now();
  for (std::int64_t step = 0; step < c.iters; ++step) {
    const StepRecord record = pm_step(state, settings, streams, static_cast<std::uint64_t>(step));
    if (step < burn_in) continue;
    if (record.swap) table.record(*record.swap);
    for (int l = 0; l < levels; ++l) {
      sweep_accepts[static_cast<std::size_t>(l)] += static_cast<std::int64_t>(record.sweep_accepts[static_cast<std::size_t>(l)]);
      sweep_proposals[static_cast<std::size_t>(l)] +=
          static_cast<std::int64_t>(record.sweep_proposals[static_cast<std::size_t>(l)]);
    }
    const auto& fine = state.levels[0].values;
    if ((step - burn_in) % c.trace_stride == 0) trace.push(fine[mid]);
    if (step >= mean_start) {
      for (std::size_t k = 0; k < fine.size(); ++k) mean_path[k] += fine[k];
      ++mean_count;
    }
    if (c.path_every > 0 && (step + 1) % c.path_every == 0) {
      write_file(out / ("path_" + std::to_string(step + 1) + ".csv"),
                 [&](std::ostream& os) { write_path_csv(os, fine, spec.delta); });
    }
  }
  const double pm_seconds = std::chrono::duration<double>(clock::now() - pm_start).count();

  TraceBuffer trace_mh{{}, c.trace_stride, "y_mid_mh"};
  double mh_seconds = 0.0;
  const std::int64_t mh_iters = c.baseline_iters > 0 ? c.baseline_iters : c.iters;
  std::optional<LevelPath> mh_path;
  if (c.baseline_mh) {
    mh_path = init_hierarchy(spec, 0, streams).levels[0];
    const auto mh_burn = static_cast<std::int64_t>(std::floor(c.burn_in_fraction * static_cast<double>(mh_iters)));
    const double scale = scale_at(0);
    const auto mh_start = clock::now();
    for (std::int64_t step = 0; step < mh_iters; ++step) {
      auto rng = streams.stream(StreamRole::baseline, 0, static_cast<std::uint64_t>(step));
      mh_sweep(std::span<double>(mh_path->values), state.geometry[0], spec, scale, rng);
      if (step >= mh_burn && (step - mh_burn) % c.trace_stride == 0) trace_mh.push(mh_path->values[mid]);
    }
    mh_seconds = std::chrono::duration<double>(clock::now() - mh_start).count();
  }

  write_file(out / "swaprates.csv", [&](std::ostream& os) { write_swaprates_csv(os, table); });
  write_file(out / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, trace, burn_in); });
  write_file(out / "path_final.csv",
             [&](std::ostream& os) { write_path_csv(os, state.levels[0].values, spec.delta); });
  if (mean_count > 0) {
    for (double& v : mean_path) v /= static_cast<double>(mean_count);
    write_file(out / "mean_path.csv", [&](std::ostream& os) { write_path_csv(os, mean_path, spec.delta); });
  }
  const auto rho_pm = try_autocorrelation(trace, c.max_lag);
  const auto rho_mh = try_autocorrelation(trace_mh, 10 * c.max_lag);
  write_file(out / "autocorr.csv", [&](std::ostream& os) {
    write_autocorr_csv(os, rho_pm.value_or(std::vector<double>{}), rho_mh.value_or(std::vector<double>{}));
  });
  if (c.baseline_mh) {
    const auto mh_burn = static_cast<std::int64_t>(std::floor(c.burn_in_fraction * static_cast<double>(mh_iters)));
    write_file(out / "trace_mh.csv", [&](std::ostream& os) { write_trace_csv(os, trace_mh, mh_burn); });
    write_file(out / "path_final_mh.csv",
               [&](std::ostream& os) { write_path_csv(os, mh_path->values, spec.delta); });
  }

  nlohmann::json summary;
  summary["seed"] = c.seed;
  summary["config"] = to_json(c);
  summary["config_ini"] = to_ini_text(c);
  summary["iterations"] = c.iters;
  summary["burn_in"] = burn_in;
  nlohmann::json rates = nlohmann::json::array();
  for (int l = 0; l < c.levels; ++l) {
    const auto& p = table.pair(l);
    rates.push_back({{"level_low", l},
                     {"level_high", l + 1},
                     {"attempts", p.attempts},
                     {"accepts", p.accepts},
                     {"degenerate", p.degenerate},
                     {"rate", table.rate(l)}});
  }
  summary["swap_rates"] = rates;
  nlohmann::json sweeps = nlohmann::json::array();
  for (int l = 0; l < levels; ++l) {
    const auto i = static_cast<std::size_t>(l);
    sweeps.push_back({{"level", l},
                      {"step_scale", scale_at(l)},
                      {"accept_rate", sweep_proposals[i] == 0 ? 0.0
                                                              : static_cast<double>(sweep_accepts[i]) /
                                                                    static_cast<double>(sweep_proposals[i])}});
  }
  summary["sweeps"] = sweeps;
  summary["y_mid"] = moments(trace);
  summary["tau_int_pm"] = try_act(trace);
  summary["seconds_per_iter_pm"] = c.iters > 0 ? pm_seconds / static_cast<double>(c.iters) : 0.0;
  summary["tau_int_mh"] = nullptr;
  summary["speedup"] = nullptr;
  summary["cost_ratio"] = nullptr;
  if (c.baseline_mh) {
    summary["baseline_iterations"] = mh_iters;
    summary["y_mid_mh"] = moments(trace_mh);
    summary["seconds_per_iter_mh"] = mh_iters > 0 ? mh_seconds / static_cast<double>(mh_iters) : 0.0;
    summary["tau_int_mh"] = try_act(trace_mh);
    if (c.iters > 0 && mh_iters > 0 && mh_seconds > 0.0 && summary["tau_int_pm"].is_number() &&
        summary["tau_int_mh"].is_number()) {
      const double ratio = (pm_seconds / static_cast<double>(c.iters)) / (mh_seconds / static_cast<double>(mh_iters));
      const auto report = cost_normalized_comparison(trace, trace_mh, ratio);
      summary["cost_ratio"] = ratio;
      summary["speedup"] = report.speedup;
    }
  }
  write_file(out / "resolved_config.ini", [&](std::ostream& os) { os << to_ini_text(c); });
  write_file(out / "summary.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
  return summary;
}

}  // namespace detail

/// Runs the configured experiment, writes every artifact into
/// `config.output_dir` and returns the summary that went to summary.json.
inline nlohmann::json run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  return std::visit([&](const auto& model) { return detail::run_with(config, make_problem(config, model)); },
                    make_model(config));
}

}  // namespace pmmc
