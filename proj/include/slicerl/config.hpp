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

// Experiment configuration: a JSON document with the top-level sections
// scenario / scheme / agent / phases / seeds / output. Unknown keys are
// rejected; every error names the offending field as a JSON pointer, and
// syntax errors carry line and column.

#ifndef SLICERL_CONFIG_HPP_
#define SLICERL_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "slicerl/mdp.hpp"
#include "slicerl/netsim.hpp"
#include "slicerl/schemes.hpp"

namespace slicerl::config {

struct Phases {
  long explore = 2500;
  long train = 10000;
  long eval = 2500;

  long total() const { return explore + train + eval; }
};

struct Exploration {
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
};

struct Output {
  std::string dir = "runs";
  bool checkpoints = true;
};

struct ExperimentConfig {
  netsim::Scenario scenario;
  std::string topology_kind = "ring";
  int grid_cols = 0;
  mdp::Normalizers normalizers;
  schemes::SchemeConfig scheme;
  Exploration exploration;
  Phases phases;
  std::vector<std::uint64_t> seeds{1};
  Output output;
};

// Throws ConfigError (with field path) on invalid content.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const nlohmann::json& doc);

// Fully expanded document (every default filled in); parses back to an
// equal configuration.
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json scenario_to_json(const ExperimentConfig& config);

// FNV-1a over the canonical scenario document, as 16 hex digits.
std::string scenario_hash(const ExperimentConfig& config);

}  // namespace slicerl::config

#endif  // SLICERL_CONFIG_HPP_
