/* Copyright 2026 The slicerl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of libslicerl.
 *
 * Every fallible call returns a slicerl_status. On failure a message is
 * stored per thread and can be read with slicerl_last_error() until the next
 * failing call on the same thread. Strings handed out through `char**`
 * parameters are owned by the caller and released with slicerl_string_free.
 */

#ifndef SLICERL_SLICERL_H_
#define SLICERL_SLICERL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SLICERL_API __declspec(dllexport)
#elif defined(__GNUC__)
#define SLICERL_API __attribute__((visibility("default")))
#else
#define SLICERL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum slicerl_status {
  SLICERL_OK = 0,
  SLICERL_ERR_INVALID_ARGUMENT = 1,
  SLICERL_ERR_CONFIG = 2,
  SLICERL_ERR_IO = 3,
  SLICERL_ERR_CONSTRAINT = 4,
  SLICERL_ERR_DIMENSION = 5,
  SLICERL_ERR_NUMERIC = 6,
  SLICERL_ERR_MISMATCH = 7,
  SLICERL_ERR_INTERNAL = 8
} slicerl_status;

typedef struct slicerl_config slicerl_config;
typedef struct slicerl_env slicerl_env;

SLICERL_API const char* slicerl_version(void);
SLICERL_API const char* slicerl_status_name(slicerl_status status);
/* Message of the last failure on this thread; "" if none. */
SLICERL_API const char* slicerl_last_error(void);
/* JSON pointer of the offending config field for the last SLICERL_ERR_CONFIG; "" if unknown. */
SLICERL_API const char* slicerl_last_error_field(void);
SLICERL_API void slicerl_string_free(char* s);

/* ---- configuration ---- */
SLICERL_API slicerl_status slicerl_config_load(const char* path, slicerl_config** out);
SLICERL_API slicerl_status slicerl_config_parse(const char* text, size_t length, slicerl_config** out);
SLICERL_API void slicerl_config_free(slicerl_config* config);
/* Fully expanded JSON (all defaults filled in). */
SLICERL_API slicerl_status slicerl_config_to_json(const slicerl_config* config, char** out);
SLICERL_API slicerl_status slicerl_config_scheme(const slicerl_config* config, char** out);
SLICERL_API slicerl_status slicerl_config_set_scheme(slicerl_config* config, const char* kind);
SLICERL_API slicerl_status slicerl_config_seed_count(const slicerl_config* config, size_t* out);
SLICERL_API slicerl_status slicerl_config_seed(const slicerl_config* config, size_t index, uint64_t* out);
SLICERL_API slicerl_status slicerl_config_output_dir(const slicerl_config* config, char** out);
SLICERL_API slicerl_status slicerl_config_scenario_hash(const slicerl_config* config, char** out);

/* ---- experiments ---- */
/* Runs one experiment. Writes steps.csv, summary.json and checkpoints/ into
 * `out_dir` (created if missing) unless it is NULL. `summary_json` may be NULL. */
SLICERL_API slicerl_status slicerl_run(const slicerl_config* config, uint64_t seed, const char* out_dir,
                                       char** summary_json);
/* Compares summary.json files (steps.csv next to each is used for curves).
 * SLICERL_ERR_MISMATCH when the runs come from different scenarios. */
SLICERL_API slicerl_status slicerl_compare(const char* const* summary_paths, size_t count, char** report_json);
/* {"allocation": [...], "reward": r, "evaluated": n} */
SLICERL_API slicerl_status slicerl_oracle_grid(const slicerl_config* config, double step, char** result_json);

/* ---- environment ---- */
SLICERL_API slicerl_status slicerl_env_create(const slicerl_config* config, uint64_t seed, slicerl_env** out);
SLICERL_API void slicerl_env_free(slicerl_env* env);
SLICERL_API slicerl_status slicerl_env_dims(const slicerl_env* env, int* cells, int* slices);
/* `allocation` is row-major cells x (slices+1), headroom first. Optional
 * outputs (cells x slices, row-major) may be NULL. */
SLICERL_API slicerl_status slicerl_env_step(slicerl_env* env, const double* allocation, size_t length,
                                            double* reward, double* throughput, double* delay,
                                            double* load, int* users);
SLICERL_API slicerl_status slicerl_env_time(const slicerl_env* env, long* out);

#ifdef __cplusplus
}
#endif

#endif /* SLICERL_SLICERL_H_ */
