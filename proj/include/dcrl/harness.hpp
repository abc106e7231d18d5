#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dcrl/config.hpp"
#include "dcrl/metrics.hpp"
#include "dcrl/numerics.hpp"

namespace dcrl {

enum class Phase { StableAlignment, StochasticOscillation, ExplosiveDivergence };

std::string to_string(Phase phase);

/// ExplosiveDivergence when the run halted or V ever exceeds 1e6; otherwise
/// StochasticOscillation when the largest dV recorded after tail_start(steps)
/// exceeds 1e-10; otherwise StableAlignment.
Phase classify_phase(const std::vector<MetricsRecord>& records, std::size_t steps, bool halted);
inline constexpr double kExplosiveV = 1e6;
inline constexpr double kStableSlack = 1e-10;

/// Largest dV among records after tail_start(steps); −inf when there are none.
double tail_max_dv(const std::vector<MetricsRecord>& records, std::size_t steps);

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<MetricsRecord> records;
  std::vector<double> disagreement;  // async runs only, aligned with records
  Phase phase = Phase::StableAlignment;
  bool halted = false;
  std::size_t projection_failures = 0;
  double wall_seconds = 0.0;
  double stationarity = 0.0;
  Matrix initial_positions;
  Matrix final_positions;
  Matrix final_w;
};

struct RunSummary {
  std::string config_hash;
  Phase phase = Phase::StableAlignment;
  std::vector<SeedRun> seeds;
  std::vector<std::string> warnings;
  std::string json;  // the summary.json document
};

/// Runs one seed of the configured mode (synchronous, async or averaged_ode).
SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed);

/// Dispatches on experiment.mode. Synchronous, async and averaged_ode runs write
/// seed_<s>.csv per seed plus summary.json into `out` when given.
RunSummary run(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out);

struct SweepResult {
  std::vector<double> ratios;
  std::vector<RunSummary> runs;
  std::string json;
};
/// One synchronous run per ratio with eta_w = ratio · eta_x.
SweepResult sweep(const ExperimentConfig& config, const std::vector<double>& ratios,
                  const std::optional<std::filesystem::path>& out);

struct AblationResult {
  RunSummary coupled, ode_only, sde_only;
  std::string json;
};
/// Coupled, ODE-only (eta_x = 0, D = 0) and SDE-only (eta_w = 0) runs with identical seeds.
AblationResult ablation(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out);

struct GeneratorEntryResult {
  ScheduleEntry entry;
  double diagnostic = 0.0;
  std::vector<double> errors;  // per seed; +inf when the graph has isolated nodes
  std::vector<std::size_t> isolated;
  double median = 0.0;
};
struct GeneratorResult {
  std::string config_hash;
  std::vector<GeneratorEntryResult> entries;
  std::vector<std::string> warnings;
  std::string json;
};
GeneratorResult generator_test(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out);

/// Writes `content` to `path` through a temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

double median(std::vector<double> values);

}  // namespace dcrl
