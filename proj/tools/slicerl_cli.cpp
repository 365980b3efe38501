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

// Command-line front end. Talks to the library only through the C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slicerl/slicerl.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitInvalidConfig = 2;

struct ConfigDeleter {
  void operator()(slicerl_config* c) const { slicerl_config_free(c); }
};
using ConfigPtr = std::unique_ptr<slicerl_config, ConfigDeleter>;

struct StringDeleter {
  void operator()(char* s) const { slicerl_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

int report(slicerl_status s) {
  std::cerr << "error: " << slicerl_last_error() << "\n";
  return s == SLICERL_ERR_CONFIG ? kExitInvalidConfig : kExitFailure;
}

ConfigPtr load(const std::string& path, int& exit_code) {
  slicerl_config* raw = nullptr;
  if (slicerl_status s = slicerl_config_load(path.c_str(), &raw); s != SLICERL_OK) {
    exit_code = report(s);
    return nullptr;
  }
  return ConfigPtr(raw);
}

std::string fmt(const nlohmann::json& v, int precision = 4) {
  if (v.is_null()) return "-";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v.get<double>());
  return buf;
}

int cmd_run(const std::string& config_path, const std::vector<std::uint64_t>& seeds_arg,
            const std::vector<std::string>& schemes_arg, const std::string& out_arg) {
  int code = 0;
  ConfigPtr cfg = load(config_path, code);
  if (!cfg) return code;

  std::vector<std::uint64_t> seeds = seeds_arg;
  if (seeds.empty()) {
    size_t n = 0;
    slicerl_config_seed_count(cfg.get(), &n);
    for (size_t i = 0; i < n; ++i) {
      std::uint64_t s = 0;
      slicerl_config_seed(cfg.get(), i, &s);
      seeds.push_back(s);
    }
  }
  std::vector<std::string> schemes = schemes_arg;
  if (schemes.empty()) {
    char* kind = nullptr;
    if (slicerl_status s = slicerl_config_scheme(cfg.get(), &kind); s != SLICERL_OK) return report(s);
    schemes.emplace_back(OwnedString(kind).get());
  }
  std::string out = out_arg;
  if (out.empty()) {
    char* dir = nullptr;
    if (slicerl_status s = slicerl_config_output_dir(cfg.get(), &dir); s != SLICERL_OK) return report(s);
    out = OwnedString(dir).get();
  }

  std::cout << "scheme\tseed\tmean_eval_reward\tmean_efficiency\tsummary\n";
  for (const std::string& scheme : schemes) {
    if (slicerl_status s = slicerl_config_set_scheme(cfg.get(), scheme.c_str()); s != SLICERL_OK) return report(s);
    for (std::uint64_t seed : seeds) {
      const auto dir = std::filesystem::path(out) / scheme / ("seed_" + std::to_string(seed));
      char* summary = nullptr;
      if (slicerl_status s = slicerl_run(cfg.get(), seed, dir.string().c_str(), &summary); s != SLICERL_OK)
        return report(s);
      const auto doc = nlohmann::json::parse(OwnedString(summary).get());
      std::cout << scheme << '\t' << seed << '\t' << fmt(doc["mean_eval_reward"]) << '\t'
                << fmt(doc["mean_efficiency"]) << '\t' << (dir / "summary.json").string() << '\n';
    }
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& paths, const std::string& json_out) {
  std::vector<const char*> argv;
  for (const auto& p : paths) argv.push_back(p.c_str());
  char* report_json = nullptr;
  if (slicerl_status s = slicerl_compare(argv.data(), argv.size(), &report_json); s != SLICERL_OK)
    return report(s);
  OwnedString owned(report_json);
  const auto doc = nlohmann::json::parse(owned.get());
  std::cout << "scheme\truns\tmedian_reward\tspread\tmedian_efficiency\tmedian_headroom\tsteps_to_90";
  for (const auto& sl : doc["table"][0]["slices"]) std::cout << "\tratio_" << sl["name"].get<std::string>();
  std::cout << '\n';
  for (const auto& row : doc["table"]) {
    std::cout << row["scheme"].get<std::string>() << '\t' << row["runs"] << '\t' << fmt(row["median_eval_reward"])
              << '\t' << fmt(row["reward_spread"]) << '\t' << fmt(row["median_efficiency"]) << '\t'
              << fmt(row["median_headroom"]) << '\t' << fmt(row["median_steps_to_90"], 0);
    for (const auto& sl : row["slices"]) std::cout << '\t' << fmt(sl["throughput_ratio"]);
    std::cout << '\n';
  }
  if (!json_out.empty()) {
    std::ofstream f(json_out);
    if (!f || !(f << owned.get() << '\n')) {
      std::cerr << "error: cannot write " << json_out << "\n";
      return kExitFailure;
    }
  }
  return 0;
}

int cmd_validate(const std::string& config_path) {
  int code = 0;
  ConfigPtr cfg = load(config_path, code);
  if (!cfg) return code;
  char* hash = nullptr;
  if (slicerl_status s = slicerl_config_scenario_hash(cfg.get(), &hash); s != SLICERL_OK) return report(s);
  std::cout << "ok: " << config_path << " (scenario " << OwnedString(hash).get() << ")\n";
  return 0;
}

int cmd_oracle_grid(const std::string& config_path, double step) {
  int code = 0;
  ConfigPtr cfg = load(config_path, code);
  if (!cfg) return code;
  char* result = nullptr;
  if (slicerl_status s = slicerl_oracle_grid(cfg.get(), step, &result); s != SLICERL_OK) return report(s);
  std::cout << OwnedString(result).get() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cell RAN slicing simulator and TD3 toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(slicerl_version()));

  std::string config_path, out_dir, json_out;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> schemes, summaries;
  double step = 0.01;

  auto* run = app.add_subcommand("run", "Run experiments (every seed x scheme requested)");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seeds, "Seed (repeatable; default: the config's seed list)");
  run->add_option("--scheme", schemes,
                  "cen_pen|cen_soft|dist|dist_comm|baseline|static_default (repeatable; default: config)");
  run->add_option("--out", out_dir, "Output root (default: the config's output.dir)");

  auto* compare = app.add_subcommand("compare", "Median-over-seeds comparison of run summaries");
  compare->add_option("summaries", summaries, "summary.json files")->required()->check(CLI::ExistingFile);
  compare->add_option("--json", json_out, "Also write the full report (table, curves, survival) here");

  auto* validate = app.add_subcommand("validate", "Check a config file");
  validate->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  auto* oracle = app.add_subcommand("oracle", "Reference solutions");
  oracle->require_subcommand(1);
  auto* grid = oracle->add_subcommand("grid", "Exhaustive simplex grid search at the first step");
  grid->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  grid->add_option("--step", step, "Grid spacing (must divide 1)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (*run) return cmd_run(config_path, seeds, schemes, out_dir);
  if (*compare) return cmd_compare(summaries, json_out);
  if (*validate) return cmd_validate(config_path);
  if (*grid) return cmd_oracle_grid(config_path, step);
  return kExitFailure;
}
