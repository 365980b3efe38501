// Copyright 2026 The slicerl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slicerl/slicerl.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>
#include <vector>

#include "slicerl/config.hpp"
#include "slicerl/errors.hpp"
#include "slicerl/harness.hpp"
#include "slicerl/mdp.hpp"
#include "slicerl/netsim.hpp"

struct slicerl_config {
  slicerl::config::ExperimentConfig cfg;
};

struct slicerl_env {
  slicerl::netsim::Environment env;
  std::vector<slicerl::netsim::Slice> slices;
  slicerl::mdp::RewardVariant variant;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_field;

slicerl_status fail(slicerl_status s, std::string msg, std::string field = {}) {
  g_error = std::move(msg);
  g_error_field = std::move(field);
  return s;
}

// Maps the active exception to a status code.
slicerl_status translate() {
  try {
    throw;
  } catch (const slicerl::ConfigError& e) {
    return fail(SLICERL_ERR_CONFIG, e.what(), e.field());
  } catch (const slicerl::IoError& e) {
    return fail(SLICERL_ERR_IO, e.what());
  } catch (const slicerl::ConstraintViolation& e) {
    return fail(SLICERL_ERR_CONSTRAINT, e.what());
  } catch (const slicerl::DimensionError& e) {
    return fail(SLICERL_ERR_DIMENSION, e.what());
  } catch (const slicerl::NumericError& e) {
    return fail(SLICERL_ERR_NUMERIC, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(SLICERL_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(SLICERL_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SLICERL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SLICERL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SLICERL_ERR_INTERNAL, "unknown error");
  }
}

template <class F>
slicerl_status guarded(F&& f) {
  try {
    return f();
  } catch (...) {
    return translate();
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

slicerl_status null_argument(const char* name) {
  return fail(SLICERL_ERR_INVALID_ARGUMENT, std::string(name) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* slicerl_version(void) { return "0.1.0"; }

const char* slicerl_status_name(slicerl_status status) {
  switch (status) {
    case SLICERL_OK: return "ok";
    case SLICERL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SLICERL_ERR_CONFIG: return "configuration error";
    case SLICERL_ERR_IO: return "i/o error";
    case SLICERL_ERR_CONSTRAINT: return "constraint violation";
    case SLICERL_ERR_DIMENSION: return "dimension mismatch";
    case SLICERL_ERR_NUMERIC: return "numeric error";
    case SLICERL_ERR_MISMATCH: return "scenario mismatch";
    case SLICERL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* slicerl_last_error(void) { return g_error.c_str(); }
const char* slicerl_last_error_field(void) { return g_error_field.c_str(); }
void slicerl_string_free(char* s) { std::free(s); }

slicerl_status slicerl_config_load(const char* path, slicerl_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    *out = new slicerl_config{slicerl::config::load_config(path)};
    return SLICERL_OK;
  });
}

slicerl_status slicerl_config_parse(const char* text, size_t length, slicerl_config** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    *out = new slicerl_config{slicerl::config::parse_config(std::string_view(text, length))};
    return SLICERL_OK;
  });
}

void slicerl_config_free(slicerl_config* config) { delete config; }

slicerl_status slicerl_config_to_json(const slicerl_config* config, char** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = duplicate(slicerl::config::to_json(config->cfg).dump(2));
    return SLICERL_OK;
  });
}

slicerl_status slicerl_config_scheme(const slicerl_config* config, char** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = duplicate(std::string(slicerl::schemes::to_string(config->cfg.scheme.kind)));
    return SLICERL_OK;
  });
}

slicerl_status slicerl_config_set_scheme(slicerl_config* config, const char* kind) {
  if (!config) return null_argument("config");
  if (!kind) return null_argument("kind");
  return guarded([&] {
    config->cfg.scheme.kind = slicerl::schemes::parse_scheme_kind(kind);
    return SLICERL_OK;
  });
}

slicerl_status slicerl_config_seed_count(const slicerl_config* config, size_t* out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  *out = config->cfg.seeds.size();
  return SLICERL_OK;
}

slicerl_status slicerl_config_seed(const slicerl_config* config, size_t index, uint64_t* out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  if (index >= config->cfg.seeds.size()) return fail(SLICERL_ERR_INVALID_ARGUMENT, "seed index out of range");
  *out = config->cfg.seeds[index];
  return SLICERL_OK;
}

slicerl_status slicerl_config_output_dir(const slicerl_config* config, char** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = duplicate(config->cfg.output.dir);
    return SLICERL_OK;
  });
}

slicerl_status slicerl_config_scenario_hash(const slicerl_config* config, char** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = duplicate(slicerl::config::scenario_hash(config->cfg));
    return SLICERL_OK;
  });
}

slicerl_status slicerl_run(const slicerl_config* config, uint64_t seed, const char* out_dir,
                           char** summary_json) {
  if (!config) return null_argument("config");
  return guarded([&] {
    slicerl::harness::RunOptions opts;
    if (out_dir) opts.out_dir = std::filesystem::path(out_dir);
    opts.checkpoints = config->cfg.output.checkpoints;
    const auto result = slicerl::harness::run_experiment(config->cfg, seed, opts);
    if (summary_json) *summary_json = duplicate(slicerl::harness::to_json(result.summary).dump(2));
    return SLICERL_OK;
  });
}

slicerl_status slicerl_compare(const char* const* summary_paths, size_t count, char** report_json) {
  if (!summary_paths) return null_argument("summary_paths");
  if (!report_json) return null_argument("report_json");
  if (count == 0) return fail(SLICERL_ERR_INVALID_ARGUMENT, "at least one summary required");
  std::vector<std::filesystem::path> paths;
  for (size_t i = 0; i < count; ++i) {
    if (!summary_paths[i]) return null_argument("summary path");
    paths.emplace_back(summary_paths[i]);
  }
  try {
    *report_json = duplicate(slicerl::harness::compare_files(paths).report.dump(2));
    return SLICERL_OK;
  } catch (const slicerl::ConfigError& e) {
    return fail(SLICERL_ERR_MISMATCH, e.what());
  } catch (...) {
    return translate();
  }
}

slicerl_status slicerl_oracle_grid(const slicerl_config* config, double step, char** result_json) {
  if (!config) return null_argument("config");
  if (!result_json) return null_argument("result_json");
  return guarded([&] {
    const auto r = slicerl::harness::oracle_grid(config->cfg, step);
    nlohmann::json doc = {{"allocation", std::vector<double>(r.allocation.data(), r.allocation.data() + r.allocation.size())},
                          {"reward", r.reward},
                          {"evaluated", r.evaluated},
                          {"step", step}};
    *result_json = duplicate(doc.dump(2));
    return SLICERL_OK;
  });
}

slicerl_status slicerl_env_create(const slicerl_config* config, uint64_t seed, slicerl_env** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto& cfg = config->cfg;
    const auto variant = cfg.scheme.reward.variant == slicerl::mdp::RewardVariant::plain
                             ? slicerl::mdp::RewardVariant::plain
                             : slicerl::mdp::RewardVariant::delay_aware;
    *out = new slicerl_env{slicerl::netsim::Environment(cfg.scenario, seed), cfg.scenario.slices, variant};
    return SLICERL_OK;
  });
}

void slicerl_env_free(slicerl_env* env) { delete env; }

slicerl_status slicerl_env_dims(const slicerl_env* env, int* cells, int* slices) {
  if (!env) return null_argument("env");
  if (cells) *cells = env->env.scenario().cells();
  if (slices) *slices = env->env.scenario().slice_count();
  return SLICERL_OK;
}

slicerl_status slicerl_env_step(slicerl_env* env, const double* allocation, size_t length, double* reward,
                                double* throughput, double* delay, double* load, int* users) {
  if (!env) return null_argument("env");
  if (!allocation) return null_argument("allocation");
  return guarded([&] {
    const int K = env->env.scenario().cells();
    const int N = env->env.scenario().slice_count();
    if (length != static_cast<size_t>(K) * static_cast<size_t>(N + 1))
      throw slicerl::DimensionError("allocation needs " + std::to_string(K * (N + 1)) + " entries, got " +
                                    std::to_string(length));
    slicerl::netsim::Allocation a{Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        allocation, K, N + 1)};
    const auto s = env->env.step(a);
    if (reward) *reward = slicerl::mdp::reward_global(s, env->slices, env->variant);
    auto copy = [&](const Eigen::MatrixXd& m, double* dst) {
      if (!dst) return;
      for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n) dst[k * N + n] = m(k, n);
    };
    copy(s.throughput, throughput);
    copy(s.delay, delay);
    copy(s.load, load);
    if (users)
      for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n) users[k * N + n] = s.users(k, n);
    return SLICERL_OK;
  });
}

slicerl_status slicerl_env_time(const slicerl_env* env, long* out) {
  if (!env) return null_argument("env");
  if (!out) return null_argument("out");
  *out = env->env.time();
  return SLICERL_OK;
}

}  // extern "C"
