#include "dcrl/dcrl.h"

#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "dcrl/config.hpp"
#include "dcrl/error.hpp"
#include "dcrl/harness.hpp"

struct dcrl_config {
  dcrl::ExperimentConfig config;
};

struct dcrl_result {
  std::string json;
  dcrl_phase phase = DCRL_PHASE_NONE;
  std::vector<std::string> warnings;
};

namespace {

thread_local std::string g_last_error;

dcrl_status fail(dcrl_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <class F>
dcrl_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const dcrl::ConfigError& e) {
    return fail(DCRL_ERR_CONFIG, e.what());
  } catch (const dcrl::CapabilityError& e) {
    return fail(DCRL_ERR_CONFIG, e.what());
  } catch (const dcrl::TopologyError& e) {
    return fail(DCRL_ERR_CONFIG, e.what());
  } catch (const dcrl::IoError& e) {
    return fail(DCRL_ERR_IO, e.what());
  } catch (const dcrl::InputError& e) {
    return fail(DCRL_ERR_INVALID_ARGUMENT, e.what());
  } catch (const dcrl::DimensionError& e) {
    return fail(DCRL_ERR_INVALID_ARGUMENT, e.what());
  } catch (const dcrl::Error& e) {
    return fail(DCRL_ERR_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DCRL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DCRL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DCRL_ERR_INTERNAL, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* p = new char[s.size() + 1];
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

dcrl_phase to_c(dcrl::Phase p) {
  switch (p) {
    case dcrl::Phase::StableAlignment: return DCRL_PHASE_STABLE_ALIGNMENT;
    case dcrl::Phase::StochasticOscillation: return DCRL_PHASE_STOCHASTIC_OSCILLATION;
    case dcrl::Phase::ExplosiveDivergence: return DCRL_PHASE_EXPLOSIVE_DIVERGENCE;
  }
  return DCRL_PHASE_NONE;
}

std::optional<std::filesystem::path> out_path(const char* dir) {
  if (!dir || !*dir) return std::nullopt;
  return std::filesystem::path(dir);
}

dcrl_status check_run_args(const dcrl_config* config, dcrl_result** out) {
  if (!config || !out) return fail(DCRL_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return DCRL_OK;
}

dcrl_result* from_summary(const dcrl::RunSummary& s, bool has_phase) {
  auto* r = new dcrl_result;
  r->json = s.json;
  r->phase = has_phase ? to_c(s.phase) : DCRL_PHASE_NONE;
  r->warnings = s.warnings;
  return r;
}

int severity(dcrl_phase p) { return static_cast<int>(p); }

}  // namespace

extern "C" {

const char* dcrl_last_error(void) { return g_last_error.c_str(); }

const char* dcrl_version(void) { return "0.1.0"; }

dcrl_status dcrl_config_load(const char* path, dcrl_config** out) {
  if (!path || !out) return fail(DCRL_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new dcrl_config{dcrl::load_config(path)};
    return DCRL_OK;
  });
}

dcrl_status dcrl_config_parse(const char* text, dcrl_config** out) {
  if (!text || !out) return fail(DCRL_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new dcrl_config{dcrl::parse_config(text)};
    return DCRL_OK;
  });
}

dcrl_status dcrl_config_set(dcrl_config* config, const char* section, const char* key, const char* value) {
  if (!config || !section || !key || !value) return fail(DCRL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    dcrl::ExperimentConfig updated = config->config;
    updated.set(section, key, value);
    config->config = std::move(updated);
    return DCRL_OK;
  });
}

dcrl_status dcrl_config_echo(const dcrl_config* config, char** out) {
  if (!config || !out) return fail(DCRL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup_string(config->config.echo());
    return DCRL_OK;
  });
}

dcrl_status dcrl_config_hash(const dcrl_config* config, char** out) {
  if (!config || !out) return fail(DCRL_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup_string(config->config.hash_hex());
    return DCRL_OK;
  });
}

size_t dcrl_config_warning_count(const dcrl_config* config) { return config ? config->config.warnings.size() : 0; }

const char* dcrl_config_warning(const dcrl_config* config, size_t index) {
  if (!config || index >= config->config.warnings.size()) return nullptr;
  return config->config.warnings[index].c_str();
}

void dcrl_config_free(dcrl_config* config) { delete config; }

dcrl_status dcrl_run(const dcrl_config* config, const char* out_dir, dcrl_result** out) {
  if (auto st = check_run_args(config, out); st != DCRL_OK) return st;
  return guarded([&] {
    const auto s = dcrl::run(config->config, out_path(out_dir));
    *out = from_summary(s, config->config.mode != dcrl::Mode::GeneratorTest);
    return DCRL_OK;
  });
}

dcrl_status dcrl_sweep(const dcrl_config* config, const double* ratios, size_t count, const char* out_dir,
                       dcrl_result** out) {
  if (auto st = check_run_args(config, out); st != DCRL_OK) return st;
  if (count > 0 && !ratios) return fail(DCRL_ERR_INVALID_ARGUMENT, "null ratios");
  return guarded([&] {
    std::vector<double> r = count > 0 ? std::vector<double>(ratios, ratios + count) : config->config.ratios;
    const auto res = dcrl::sweep(config->config, r, out_path(out_dir));
    auto* result = new dcrl_result;
    result->json = res.json;
    result->warnings = config->config.warnings;
    result->phase = DCRL_PHASE_STABLE_ALIGNMENT;
    for (const auto& s : res.runs)
      if (severity(to_c(s.phase)) > severity(result->phase)) result->phase = to_c(s.phase);
    *out = result;
    return DCRL_OK;
  });
}

dcrl_status dcrl_ablation(const dcrl_config* config, const char* out_dir, dcrl_result** out) {
  if (auto st = check_run_args(config, out); st != DCRL_OK) return st;
  return guarded([&] {
    const auto res = dcrl::ablation(config->config, out_path(out_dir));
    auto* result = new dcrl_result;
    result->json = res.json;
    result->phase = to_c(res.coupled.phase);
    result->warnings = res.coupled.warnings;
    *out = result;
    return DCRL_OK;
  });
}

dcrl_status dcrl_generator_test(const dcrl_config* config, const char* out_dir, dcrl_result** out) {
  if (auto st = check_run_args(config, out); st != DCRL_OK) return st;
  return guarded([&] {
    const auto res = dcrl::generator_test(config->config, out_path(out_dir));
    auto* result = new dcrl_result;
    result->json = res.json;
    result->warnings = res.warnings;
    *out = result;
    return DCRL_OK;
  });
}

dcrl_status dcrl_gossip(const dcrl_config* config, const char* out_dir, dcrl_result** out) {
  if (auto st = check_run_args(config, out); st != DCRL_OK) return st;
  return guarded([&] {
    dcrl::ExperimentConfig c = config->config;
    c.set("experiment", "mode", "async");
    *out = from_summary(dcrl::run(c, out_path(out_dir)), true);
    return DCRL_OK;
  });
}

const char* dcrl_result_json(const dcrl_result* result) { return result ? result->json.c_str() : nullptr; }

dcrl_phase dcrl_result_phase(const dcrl_result* result) { return result ? result->phase : DCRL_PHASE_NONE; }

size_t dcrl_result_warning_count(const dcrl_result* result) { return result ? result->warnings.size() : 0; }

const char* dcrl_result_warning(const dcrl_result* result, size_t index) {
  if (!result || index >= result->warnings.size()) return nullptr;
  return result->warnings[index].c_str();
}

void dcrl_result_free(dcrl_result* result) { delete result; }

void dcrl_string_free(char* s) { delete[] s; }

}  // extern "C"
