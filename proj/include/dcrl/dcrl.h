#ifndef DCRL_DCRL_H
#define DCRL_DCRL_H

#include <stddef.h>
#include <stdint.h>

#if defined(DCRL_BUILDING_LIBRARY)
#define DCRL_API __attribute__((visibility("default")))
#else
#define DCRL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dcrl_status {
  DCRL_OK = 0,
  DCRL_ERR_CONFIG = 1,
  DCRL_ERR_IO = 2,
  DCRL_ERR_INVALID_ARGUMENT = 3,
  DCRL_ERR_NUMERIC = 4,
  DCRL_ERR_INTERNAL = 5
} dcrl_status;

typedef enum dcrl_phase {
  DCRL_PHASE_NONE = -1,
  DCRL_PHASE_STABLE_ALIGNMENT = 0,
  DCRL_PHASE_STOCHASTIC_OSCILLATION = 1,
  DCRL_PHASE_EXPLOSIVE_DIVERGENCE = 2
} dcrl_phase;

typedef struct dcrl_config dcrl_config;
typedef struct dcrl_result dcrl_result;

/* Message for the most recent failing call on this thread; never NULL. */
DCRL_API const char* dcrl_last_error(void);
DCRL_API const char* dcrl_version(void);

DCRL_API dcrl_status dcrl_config_load(const char* path, dcrl_config** out);
DCRL_API dcrl_status dcrl_config_parse(const char* text, dcrl_config** out);
DCRL_API dcrl_status dcrl_config_set(dcrl_config* config, const char* section, const char* key, const char* value);
/* Returned strings are owned by the caller; release with dcrl_string_free. */
DCRL_API dcrl_status dcrl_config_echo(const dcrl_config* config, char** out);
DCRL_API dcrl_status dcrl_config_hash(const dcrl_config* config, char** out);
/* Number of warnings raised while validating the config. */
DCRL_API size_t dcrl_config_warning_count(const dcrl_config* config);
DCRL_API const char* dcrl_config_warning(const dcrl_config* config, size_t index);
DCRL_API void dcrl_config_free(dcrl_config* config);

/* out_dir may be NULL to skip writing files. */
DCRL_API dcrl_status dcrl_run(const dcrl_config* config, const char* out_dir, dcrl_result** out);
DCRL_API dcrl_status dcrl_sweep(const dcrl_config* config, const double* ratios, size_t count, const char* out_dir,
                                dcrl_result** out);
DCRL_API dcrl_status dcrl_ablation(const dcrl_config* config, const char* out_dir, dcrl_result** out);
DCRL_API dcrl_status dcrl_generator_test(const dcrl_config* config, const char* out_dir, dcrl_result** out);
/* Runs the configured swarm in async gossip mode. */
DCRL_API dcrl_status dcrl_gossip(const dcrl_config* config, const char* out_dir, dcrl_result** out);

/* JSON document of the result; valid until dcrl_result_free. */
DCRL_API const char* dcrl_result_json(const dcrl_result* result);
DCRL_API dcrl_phase dcrl_result_phase(const dcrl_result* result);
DCRL_API size_t dcrl_result_warning_count(const dcrl_result* result);
DCRL_API const char* dcrl_result_warning(const dcrl_result* result, size_t index);
DCRL_API void dcrl_result_free(dcrl_result* result);

DCRL_API void dcrl_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
