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

// TD3 learner: twin critics with target copies, delayed actor updates and
// target-policy smoothing. Actions are laid out as `block_count` contiguous
// blocks of `block_size` = N+1 entries (headroom first), one block per cell.

#ifndef SLICERL_TD3_HPP_
#define SLICERL_TD3_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "slicerl/nn.hpp"

namespace slicerl::td3 {

using Rng = std::mt19937_64;

enum class ConstraintMode { softmax_embedded, penalty };
enum class ActMode { explore_random, train_noisy, eval };

std::string_view to_string(ConstraintMode m);

struct Hyperparameters {
  double gamma = 0.1;
  int batch_size = 32;
  double actor_lr = 5e-4;
  double critic_lr = 1e-3;
  double tau = 0.005;
  int policy_delay = 2;
  double target_noise = 0.2;
  double target_noise_clip = 0.5;
  double exploration_noise = 0.1;
  std::size_t replay_capacity = 100000;

  void validate() const;
};

struct AgentSpec {
  int state_dim = 1;
  int block_size = 1;
  int block_count = 1;
  std::vector<int> actor_hidden{48, 24};
  std::vector<int> critic_hidden{64, 24};
  nn::Activation activation = nn::Activation::relu;
  ConstraintMode mode = ConstraintMode::softmax_embedded;
  Hyperparameters hp;

  int action_dim() const { return block_size * block_count; }
  nn::MlpSpec actor_spec() const;
  // Critic input is [state ; action].
  nn::MlpSpec critic_spec() const;
};

struct Experience {
  Eigen::VectorXd state;
  Eigen::VectorXd action;    // executed (on the simplex)
  Eigen::VectorXd proposal;  // pre-projection; what the critic is trained on
  double reward = 0.0;
  Eigen::VectorXd next_state;
};

// Column-stacked minibatch.
struct Batch {
  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;
  Eigen::VectorXd rewards;
  Eigen::MatrixXd next_states;

  Eigen::Index size() const { return rewards.size(); }
};

// Fixed-capacity ring; the oldest experience is overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Experience e);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  // 0 = oldest retained experience.
  const Experience& at(std::size_t i) const;
  // Uniform with replacement.
  Batch sample(Rng& rng, int batch_size) const;

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Experience> data_;
};

struct ActionSample {
  Eigen::VectorXd proposal;
  Eigen::VectorXd executed;
};

struct Diagnostics {
  bool trained = false;
  bool actor_updated = false;
  double critic_loss = std::numeric_limits<double>::quiet_NaN();
  double actor_objective = std::numeric_limits<double>::quiet_NaN();
  double td_error = std::numeric_limits<double>::quiet_NaN();  // mean |target - Q1|
};

// Projects each block of a raw action vector onto the simplex.
Eigen::VectorXd project_blocks(const Eigen::VectorXd& raw, int block_size);
// Mean over blocks of |1 - block sum|.
double block_budget_violation(const Eigen::VectorXd& raw, int block_size);

class Agent {
 public:
  Agent(AgentSpec spec, std::uint64_t seed);

  const AgentSpec& spec() const { return spec_; }

  ActionSample select_action(const Eigen::VectorXd& state, ActMode mode);
  // Deterministic actor output before any projection.
  Eigen::VectorXd policy(const Eigen::VectorXd& state) const;

  // Returns the mean of both critics' pre-update MSE; optionally the mean
  // |target - Q1|.
  double critic_update(const Batch& batch, double* td_error = nullptr);
  // Returns the pre-update mean Q1(s, pi(s)).
  double actor_update(const Batch& batch);
  void soft_update();
  Diagnostics train_step(const ReplayBuffer& buffer, long step_index);

  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& actor_target() const { return actor_target_; }
  const nn::Mlp& critic(int i) const { return i == 0 ? critic1_ : critic2_; }
  const nn::Mlp& critic_target(int i) const { return i == 0 ? critic1_target_ : critic2_target_; }
  nn::Mlp& mutable_actor() { return actor_; }
  nn::Mlp& mutable_critic(int i) { return i == 0 ? critic1_ : critic2_; }
  nn::Mlp& mutable_critic_target(int i) { return i == 0 ? critic1_target_ : critic2_target_; }
  nn::Mlp& mutable_actor_target() { return actor_target_; }
  std::size_t parameter_count() const;
  Rng& rng() { return rng_; }

  nlohmann::json checkpoint() const;
  static Agent from_checkpoint(const nlohmann::json& doc, std::uint64_t seed);

 private:
  Eigen::MatrixXd target_actions(const Eigen::MatrixXd& next_states);
  Eigen::MatrixXd random_actions(int columns);

  AgentSpec spec_;
  Rng rng_;
  nn::Mlp actor_, actor_target_;
  nn::Mlp critic1_, critic2_, critic1_target_, critic2_target_;
  nn::AdamState actor_opt_, critic1_opt_, critic2_opt_;
};

void soft_update(const nn::Mlp& online, nn::Mlp& target, double tau);

nlohmann::json to_json(const AgentSpec& spec);
AgentSpec agent_spec_from_json(const nlohmann::json& doc);

}  // namespace slicerl::td3

#endif  // SLICERL_TD3_HPP_
