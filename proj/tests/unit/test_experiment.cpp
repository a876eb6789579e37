#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pmmc/experiment.hpp"

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pmmc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::size_t line_count(const fs::path& path) {
  const std::string text = slurp(path);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

/// A short, cheap bridge run in `dir`.
pmmc::ExperimentConfig small_bridge(const fs::path& dir) {
  return pmmc::resolve_config({{"experiment.iters", "200"},
                               {"problem.T", "1"},
                               {"problem.N", "64"},
                               {"problem.L", "3"},
                               {"sampler.alpha", "0.5"},
                               {"output.dir", dir.string()},
                               {"output.max_lag", "5"}});
}

int config_error_line(const std::string& text) {
  try {
    pmmc::parse_config_text(text);
  } catch (const pmmc::ConfigError& e) {
    return e.line;
  }
  return -1;
}

std::string config_error_field(const pmmc::ConfigOverrides& file) {
  try {
    pmmc::resolve_config(file);
  } catch (const pmmc::ConfigError& e) {
    return e.field;
  }
  return "";
}

TEST(Config, MinimalFileGivesBridgeDefaults) {
  const auto c = pmmc::validate_config(std::string("[experiment]\nname = bridge\n"));
  EXPECT_EQ(c.problem, pmmc::ProblemKind::bridge);
  EXPECT_EQ(c.levels, 9);
  EXPECT_EQ(c.steps, 10240);
  EXPECT_EQ(c.horizon, 10.0);
  EXPECT_EQ(c.tries.kind, pmmc::TrySchedule::Kind::linear);
  EXPECT_EQ(c.z_minus, 0.0);
  EXPECT_EQ(c.z_plus, 0.0);
  EXPECT_EQ(c.alpha, 0.5);
  EXPECT_EQ(c.iters, 200000);
}

TEST(Config, SmoothingDefaults) {
  const auto c = pmmc::validate_config(std::string("[experiment]\nname = smoothing\n"));
  EXPECT_EQ(c.problem, pmmc::ProblemKind::smoothing);
  EXPECT_EQ(c.levels, 7);
  EXPECT_EQ(c.tries.kind, pmmc::TrySchedule::Kind::dyadic);
}

TEST(Config, AlphaOfOneIsRejected) {
  EXPECT_EQ(config_error_field({{"sampler.alpha", "1.0"}}), "sampler.alpha");
  EXPECT_EQ(config_error_field({{"sampler.alpha", "-0.1"}}), "sampler.alpha");
}

TEST(Config, MeshNotDivisibleByCoarsestSpacingIsRejected) {
  EXPECT_EQ(config_error_field({{"problem.N", "10000"}}), "problem.N");
  EXPECT_EQ(config_error_field({{"problem.N", "10240"}, {"problem.L", "12"}}), "problem.N");
}

TEST(Config, UnknownKeyIsRejected) {
  EXPECT_EQ(config_error_field({{"sampler.temperature", "3"}}), "sampler.temperature");
}

TEST(Config, ExperimentAndProblemKindMustAgree) {
  EXPECT_EQ(config_error_field({{"experiment.name", "bridge"}, {"problem.kind", "smoothing"}}), "problem.kind");
  EXPECT_EQ(config_error_field({{"experiment.name", "custom"}, {"problem.kind", "smoothing"}, {"problem.L", "3"},
                                {"problem.N", "80"}}),
            "");
}

TEST(Config, BadValuesNameTheirField) {
  EXPECT_EQ(config_error_field({{"experiment.seed", "abc"}}), "experiment.seed");
  EXPECT_EQ(config_error_field({{"sampler.variant", "pm3"}}), "sampler.variant");
  EXPECT_EQ(config_error_field({{"sampler.mh_step_scales", "1,2"}}), "sampler.mh_step_scales");
  EXPECT_EQ(config_error_field({{"sampler.pm2_correlation", "1"}}), "sampler.pm2_correlation");
  EXPECT_EQ(config_error_field({{"experiment.name", "smoothing"}, {"problem.T", "9.5"}}), "problem.T");
}

TEST(Config, SyntaxErrorReportsLine) {
  EXPECT_EQ(config_error_line("[experiment]\nname = bridge\n[sampler\nalpha = 0.5\n"), 3);
}

TEST(Config, FlagsOverrideFile) {
  const auto c = pmmc::resolve_config({{"sampler.alpha", "0.3"}, {"experiment.seed", "5"}},
                                      {{"sampler.alpha", "0.7"}});
  EXPECT_EQ(c.alpha, 0.7);
  EXPECT_EQ(c.seed, 5u);
}

TEST(Config, ResolvedTextRoundTrips) {
  const auto c = pmmc::resolve_config({{"experiment.name", "smoothing"},
                                       {"sampler.mh_step_scales", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8"},
                                       {"sampler.m_schedule", "constant:7"},
                                       {"sampler.alpha", "0.123456789012345"}});
  const std::string text = pmmc::to_ini_text(c);
  const auto again = pmmc::validate_config(text);
  EXPECT_EQ(pmmc::to_ini_text(again), text);
  EXPECT_EQ(pmmc::to_json(again), pmmc::to_json(c));
}

TEST(Config, ShippedFilesValidate) {
  const auto bridge = pmmc::validate_config(slurp(fs::path(PMMC_CONFIG_DIR) / "bridge.ini"));
  EXPECT_EQ(bridge.experiment, pmmc::ExperimentKind::bridge);
  EXPECT_EQ(bridge.alpha, 0.9);
  const auto smoothing = pmmc::validate_config(slurp(fs::path(PMMC_CONFIG_DIR) / "smoothing.ini"));
  EXPECT_EQ(smoothing.levels, 7);
  EXPECT_EQ(smoothing.tries.kind, pmmc::TrySchedule::Kind::dyadic);
}

TEST(Run, ZeroIterationsWritesEmptyArtifacts) {
  const auto dir = scratch_dir("zero");
  auto c = small_bridge(dir);
  c.iters = 0;
  const auto summary = pmmc::run_experiment(c);
  EXPECT_EQ(summary["iterations"], 0);
  EXPECT_TRUE(summary["tau_int_pm"].is_null());
  EXPECT_EQ(line_count(dir / "trace.csv"), 1u);
  EXPECT_EQ(line_count(dir / "swaprates.csv"), 4u);
  EXPECT_TRUE(fs::exists(dir / "path_final.csv"));
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
}

TEST(Run, SwapRateRowsMatchLevelCount) {
  const auto bridge_dir = scratch_dir("bridge_rows");
  auto bridge = pmmc::resolve_config({{"experiment.iters", "3"}, {"output.dir", bridge_dir.string()}});
  pmmc::run_experiment(bridge);
  EXPECT_EQ(line_count(bridge_dir / "swaprates.csv"), 10u);

  const auto smoothing_dir = scratch_dir("smoothing_rows");
  auto smoothing = pmmc::resolve_config(
      {{"experiment.name", "smoothing"}, {"experiment.iters", "3"}, {"output.dir", smoothing_dir.string()}});
  pmmc::run_experiment(smoothing);
  EXPECT_EQ(line_count(smoothing_dir / "swaprates.csv"), 8u);
}

TEST(Run, SameSeedReplaysBitForBit) {
  const auto a = scratch_dir("replay_a");
  const auto b = scratch_dir("replay_b");
  auto ca = small_bridge(a);
  auto cb = small_bridge(b);
  ca.threads = 1;
  cb.threads = 3;
  pmmc::run_experiment(ca);
  pmmc::run_experiment(cb);
  for (const char* name : {"trace.csv", "path_final.csv", "swaprates.csv", "mean_path.csv", "autocorr.csv"}) {
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
}

TEST(Run, DifferentSeedsDiffer) {
  const auto a = scratch_dir("seed_a");
  const auto b = scratch_dir("seed_b");
  auto ca = small_bridge(a);
  auto cb = small_bridge(b);
  cb.seed = ca.seed + 1;
  pmmc::run_experiment(ca);
  pmmc::run_experiment(cb);
  EXPECT_NE(slurp(a / "trace.csv"), slurp(b / "trace.csv"));
}

TEST(Run, ResolvedConfigReproducesTheRun) {
  const auto a = scratch_dir("resolved_a");
  const auto b = scratch_dir("resolved_b");
  pmmc::run_experiment(small_bridge(a));
  auto again = pmmc::validate_config(slurp(a / "resolved_config.ini"));
  again.output_dir = b.string();
  pmmc::run_experiment(again);
  EXPECT_EQ(slurp(a / "trace.csv"), slurp(b / "trace.csv"));
}

TEST(Run, BaselineWritesItsOwnTrace) {
  const auto dir = scratch_dir("baseline");
  auto c = small_bridge(dir);
  c.baseline_mh = true;
  c.baseline_iters = 300;
  const auto summary = pmmc::run_experiment(c);
  EXPECT_EQ(summary["baseline_iterations"], 300);
  EXPECT_EQ(line_count(dir / "trace_mh.csv"), 1u + 270u);
  EXPECT_TRUE(fs::exists(dir / "path_final_mh.csv"));
}

TEST(Run, PeriodicPathSnapshots) {
  const auto dir = scratch_dir("snapshots");
  auto c = small_bridge(dir);
  c.path_every = 100;
  pmmc::run_experiment(c);
  EXPECT_TRUE(fs::exists(dir / "path_100.csv"));
  EXPECT_TRUE(fs::exists(dir / "path_200.csv"));
  EXPECT_EQ(line_count(dir / "path_100.csv"), 66u);
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string command = std::string(PMRUN_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, SuccessfulRunExitsZero) {
  const auto dir = scratch_dir("cli_ok");
  const fs::path ini = dir / "run.ini";
  std::ofstream(ini) << "[experiment]\niters = 20\n[problem]\nT = 1\nN = 64\nL = 3\n";
  EXPECT_EQ(run_cli("--config " + ini.string() + " --out " + (dir / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.json"));
}

TEST(Cli, ConfigErrorsExitTwo) {
  const auto dir = scratch_dir("cli_bad");
  EXPECT_EQ(run_cli("--alpha 1.0 --iters 1 --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("--config " + (dir / "missing.ini").string()), 2);
  EXPECT_EQ(run_cli("--no-such-flag"), 2);
  const fs::path ini = dir / "bad.ini";
  std::ofstream(ini) << "[problem]\nN = 10000\n";
  EXPECT_EQ(run_cli("--config " + ini.string()), 2);
}

TEST(Cli, StrictDegenerateSwapExitsThree) {
  const auto dir = scratch_dir("cli_degenerate");
  const fs::path ini = dir / "overflow.ini";
  // Endpoints so large that every path density underflows to zero.
  std::ofstream(ini) << "[experiment]\nname = custom\niters = 5\n[problem]\nT = 1\nN = 64\nL = 3\n"
                        "z_minus = -1e200\nz_plus = 1e200\n[sampler]\nalpha = 0.99\n";
  EXPECT_EQ(run_cli("--config " + ini.string() + " --strict --out " + dir.string()), 3);
}

}  // namespace
