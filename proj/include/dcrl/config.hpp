#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dcrl/dynamics.hpp"
#include "dcrl/geometry.hpp"
#include "dcrl/gossip.hpp"

namespace dcrl {

enum class Mode { Synchronous, Async, GeneratorTest, AveragedOde, Sweep };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct ScheduleEntry {
  std::size_t agents = 0;
  double epsilon = 0.0;
};

/// Validated experiment description. `values` holds every known key as
/// "section.key" with defaults filled in; the typed fields are derived from it.
struct ExperimentConfig {
  std::map<std::string, std::string> values;
  std::vector<std::string> warnings;

  Mode mode = Mode::Synchronous;
  ManifoldSpec manifold;
  std::size_t agents = 0;
  std::size_t latent_dim = 0;
  std::size_t metrics_every = 100;
  double init_scale = 0.5;
  std::vector<std::uint64_t> seeds;
  DynamicsConfig dynamics;
  std::vector<double> ratios;
  TopologyKind topology = TopologyKind::Ring;
  std::size_t topology_degree = 3;
  std::uint64_t topology_seed = 0;
  bool shared_init = true;
  double ode_step = 1e-3;
  std::vector<ScheduleEntry> schedule;
  std::string test_function;

  /// Canonical "section.key = value" listing of every resolved key, sorted.
  std::string echo() const;
  /// 64-bit FNV-1a of echo().
  std::uint64_t hash() const;
  std::string hash_hex() const;

  /// Overrides one key and re-validates. Throws ConfigError.
  void set(const std::string& section, const std::string& key, const std::string& value);
};

/// The documented default table ("section.key" → value). Keys with an empty
/// default are either required or resolved from other keys.
const std::map<std::string, std::string>& config_defaults();

/// Parses the flat sectioned key-value format. Throws ConfigError carrying the
/// offending line number for syntax errors and the key name for validation errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace dcrl
