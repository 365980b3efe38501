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

// Experiment runner and metrics. A run walks the explore, train and eval
// phases, logs one StepRecord per environment step and condenses the eval
// phase into a Summary. Artifacts are `steps.csv`, `summary.json` and
// `checkpoints/agent_<i>.json`.

#ifndef SLICERL_HARNESS_HPP_
#define SLICERL_HARNESS_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "slicerl/config.hpp"
#include "slicerl/netsim.hpp"

namespace slicerl::harness {

enum class Phase { explore, train, eval };
std::string_view to_string(Phase p);

struct StepRecord {
  long t = 0;
  Phase phase = Phase::explore;
  double epsilon = 0.0;
  double reward = 0.0;            // global reward of the resulting state
  double reward_penalized = 0.0;  // reward minus beta * mean-over-cells violation
  double training_reward = 0.0;   // mean of the rewards stored by the agents
  double penalty = 0.0;           // beta * mean-over-cells |1 - sum| of the proposal
  double policy_penalty = 0.0;    // same for the deterministic actor output
  bool converged = true;
  Eigen::MatrixXd throughput, delay, load;  // K x N
  Eigen::MatrixXi users;                    // K x N
  Eigen::MatrixXd action;                   // K x (N+1), executed
  Eigen::VectorXd efficiency;               // K
  Eigen::VectorXd mask;                     // N
  double critic_loss = 0.0, actor_objective = 0.0, td_error = 0.0;  // NaN when not trained
};

struct SliceSummary {
  std::string name;
  double throughput_ratio = 0.0;  // mean phi/phi* over cells and steps with u > 0
  double mean_delay_s = 0.0;      // mean over cells and steps with u > 0
  std::optional<double> mask_correlation;  // cell-mean allocation vs mask
};

struct Summary {
  std::string scheme;
  std::uint64_t seed = 0;
  std::string scenario_hash;
  config::Phases phases;
  long steps = 0;
  double mean_eval_reward = 0.0;
  double mean_eval_reward_penalized = 0.0;
  double mean_efficiency = 0.0;
  double mean_eval_headroom = 0.0;
  double mean_eval_penalty = 0.0;
  double final_train_penalty = 0.0;         // mean over the last 1000 train steps
  double final_train_policy_penalty = 0.0;  // same, deterministic actor output
  std::optional<long> steps_to_90;          // train steps to 90% of final smoothed reward
  long nonconverged_steps = 0;
  std::size_t parameter_count = 0;
  std::vector<SliceSummary> slices;
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // no files written when empty
  bool checkpoints = true;
};

struct RunResult {
  std::vector<StepRecord> records;
  Summary summary;
};

RunResult run_experiment(const config::ExperimentConfig& config, std::uint64_t seed,
                         const RunOptions& options = {});

// (1/N) sum_n S[k][n] / (a[k][n] B); slices with a = 0 contribute 0.
double resource_efficiency(const netsim::NetState& net, const netsim::Allocation& allocation,
                           const netsim::Topology& topology, int k);

// (x, fraction of samples strictly greater than x) for every x in `grid`.
std::vector<std::pair<double, double>> survival_function(const std::vector<double>& samples,
                                                         const std::vector<double>& grid);

// Pearson coefficient; empty when lengths differ, are below 2, or either
// trace is constant.
std::optional<double> mask_correlation(const std::vector<double>& trace,
                                       const std::vector<double>& mask);

// Trailing moving average (shorter window at the start).
std::vector<double> smooth(const std::vector<double>& values, std::size_t window = 100);

// First index where smooth(values) reaches 90% of its final value (for a
// negative final value: final - 10% of |final|).
std::optional<long> steps_to_fraction_of_final(const std::vector<double>& values,
                                               std::size_t window = 100, double fraction = 0.9);

Summary summarize(const config::ExperimentConfig& config, std::uint64_t seed,
                  const std::vector<StepRecord>& records, std::size_t parameter_count);

// CSV. The header depends only on K and N.
std::string csv_header(int cells, int slices);
std::string csv_row(const StepRecord& r);
void write_csv(const std::filesystem::path& path, const std::vector<StepRecord>& records);
std::vector<StepRecord> read_csv(const std::filesystem::path& path, int cells, int slices);

nlohmann::json to_json(const Summary& s);
Summary summary_from_json(const nlohmann::json& doc);

struct Comparison {
  nlohmann::json report;  // table, curves, survival functions
};

// Median over seeds per scheme. `curves` maps each summary to its per-step
// reward trace (may be empty). Throws ConfigError on mismatched scenarios.
Comparison compare_runs(const std::vector<Summary>& summaries,
                        const std::vector<std::vector<double>>& reward_traces = {});
// Loads summary.json files and the steps.csv next to each one.
Comparison compare_files(const std::vector<std::filesystem::path>& summary_paths);

struct OracleResult {
  Eigen::VectorXd allocation;  // N+1, applied to every cell
  double reward = 0.0;
  long evaluated = 0;
};

// Exhaustive search over the (N+1)-simplex lattice with spacing `step`,
// broadcasting each point to every cell and scoring the global reward of the
// first environment step.
OracleResult oracle_grid(const config::ExperimentConfig& config, double step);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace slicerl::harness

#endif  // SLICERL_HARNESS_HPP_
