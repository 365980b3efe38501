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

// Agent topologies. A Controller turns a NetState into a full K x (N+1)
// allocation and, for learning schemes, routes transitions to its agents:
//
//   cen_pen / cen_soft  one agent, global state (3NK), global action K(N+1)
//   dist                K agents, local state (3N), local action N+1
//   dist_comm           K agents, local state + neighbor-load message (4N)
//   baseline            headroom 0, slices split in proportion to active users
//   static_default      a fixed per-cell vector

#ifndef SLICERL_SCHEMES_HPP_
#define SLICERL_SCHEMES_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "slicerl/mdp.hpp"
#include "slicerl/netsim.hpp"
#include "slicerl/td3.hpp"

namespace slicerl::schemes {

using Rng = std::mt19937_64;

enum class SchemeKind { cen_pen, cen_soft, dist, dist_comm, baseline, static_default };

SchemeKind parse_scheme_kind(std::string_view s);
std::string_view to_string(SchemeKind k);
bool is_learning(SchemeKind k);

struct SchemeConfig {
  SchemeKind kind = SchemeKind::dist_comm;
  // Empty means the per-kind default.
  std::vector<int> actor_hidden;
  std::vector<int> critic_hidden;
  // Length N+1; empty means [0, 0.8, 0.2] for two slices, an even split otherwise.
  Eigen::VectorXd static_default;
  nn::Activation activation = nn::Activation::relu;
  td3::Hyperparameters hp;
  mdp::RewardSpec reward;
  // Give every distributed agent the same initial weights.
  bool shared_init = false;
  // Observation scaling; defaults to the slice requirements and group size.
  std::optional<mdp::Normalizers> normalizers;
};

// Proportional split of cell k's users; all-idle cells get an even split.
Eigen::VectorXd baseline_allocation(const netsim::UserDistribution& users, int k);

struct Decision {
  netsim::Allocation executed;
  Eigen::MatrixXd proposal;  // K x (N+1), raw
  std::vector<Eigen::VectorXd> observations;
  std::vector<Eigen::VectorXd> agent_proposals;
  std::vector<Eigen::VectorXd> agent_executed;
  // Mean |1 - sum| of the deterministic actor output; 0 for softmax agents.
  double policy_violation = 0.0;
};

struct LearnOutcome {
  td3::Diagnostics diagnostics;  // averaged over agents that trained
  std::vector<double> stored_rewards;
};

class Controller {
 public:
  Controller(SchemeConfig config, const netsim::Scenario& scenario, std::uint64_t seed);

  SchemeKind kind() const { return config_.kind; }
  const SchemeConfig& config() const { return config_; }
  int agent_count() const { return static_cast<int>(agents_.size()); }
  const td3::Agent& agent(int i) const { return agents_[i]; }
  td3::Agent& mutable_agent(int i) { return agents_[i]; }
  const td3::ReplayBuffer& buffer(int i) const { return buffers_[i]; }
  int state_dim() const;
  int action_dim() const;
  std::size_t parameter_count() const;
  bool penalized() const;

  // `epsilon` is the probability that a train_noisy agent acts uniformly at
  // random instead.
  Decision act(const netsim::NetState& net, td3::ActMode mode, double epsilon = 0.0);

  // Stores one experience per agent (observations of `decision` -> `next`)
  // and, when `train` is set, runs one TD3 step per agent. No-op for
  // non-learning schemes.
  LearnOutcome learn(const Decision& decision, const netsim::NetState& next, bool train,
                     long train_step);

  // Per-agent observation of `net` (what act() would feed agent i).
  Eigen::VectorXd observe(const netsim::NetState& net, int agent) const;

  void save_checkpoints(const std::filesystem::path& dir) const;

 private:
  SchemeConfig config_;
  netsim::Scenario scenario_;
  mdp::Normalizers norm_;
  std::vector<td3::Agent> agents_;
  std::vector<td3::ReplayBuffer> buffers_;
  Rng rng_;
};

}  // namespace slicerl::schemes

#endif  // SLICERL_SCHEMES_HPP_
