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

#include "slicerl/td3.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slicerl/errors.hpp"

namespace slicerl::td3 {

std::string_view to_string(ConstraintMode m) {
  return m == ConstraintMode::softmax_embedded ? "softmax_embedded" : "penalty";
}

void Hyperparameters::validate() const {
  if (!(gamma >= 0 && gamma <= 1)) throw ConfigError("must lie in [0,1]", "/agent/gamma");
  if (batch_size < 1) throw ConfigError("must be positive", "/agent/batch_size");
  if (!(actor_lr >= 0)) throw ConfigError("must be non-negative", "/agent/actor_lr");
  if (!(critic_lr >= 0)) throw ConfigError("must be non-negative", "/agent/critic_lr");
  if (!(tau >= 0 && tau <= 1)) throw ConfigError("must lie in [0,1]", "/agent/tau");
  if (policy_delay < 1) throw ConfigError("must be positive", "/agent/policy_delay");
  if (!(target_noise >= 0)) throw ConfigError("must be non-negative", "/agent/target_noise");
  if (!(target_noise_clip >= 0)) throw ConfigError("must be non-negative", "/agent/target_noise_clip");
  if (!(exploration_noise >= 0)) throw ConfigError("must be non-negative", "/agent/exploration_noise");
  if (replay_capacity < 1) throw ConfigError("must be positive", "/agent/replay_capacity");
}

nn::MlpSpec AgentSpec::actor_spec() const {
  nn::MlpSpec s;
  s.sizes.push_back(state_dim);
  s.sizes.insert(s.sizes.end(), actor_hidden.begin(), actor_hidden.end());
  s.sizes.push_back(action_dim());
  s.hidden = activation;
  if (mode == ConstraintMode::softmax_embedded)
    s.head = nn::OutputHead::softmax(block_size, block_count);
  return s;
}

nn::MlpSpec AgentSpec::critic_spec() const {
  nn::MlpSpec s;
  s.sizes.push_back(state_dim + action_dim());
  s.sizes.insert(s.sizes.end(), critic_hidden.begin(), critic_hidden.end());
  s.sizes.push_back(1);
  s.hidden = activation;
  return s;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay capacity must be positive", "/agent/replay_capacity");
  data_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(Experience e) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(e));
  } else {
    data_[cursor_] = std::move(e);
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

const Experience& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw std::out_of_range("replay index out of range");
  if (data_.size() < capacity_) return data_[i];
  return data_[(cursor_ + i) % capacity_];
}

Batch ReplayBuffer::sample(Rng& rng, int batch_size) const {
  if (data_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  const auto& first = data_.front();
  Batch b;
  b.states.resize(first.state.size(), batch_size);
  b.actions.resize(first.proposal.size(), batch_size);
  b.rewards.resize(batch_size);
  b.next_states.resize(first.next_state.size(), batch_size);
  for (int i = 0; i < batch_size; ++i) {
    const Experience& e = data_[pick(rng)];
    b.states.col(i) = e.state;
    b.actions.col(i) = e.proposal;
    b.rewards(i) = e.reward;
    b.next_states.col(i) = e.next_state;
  }
  return b;
}

Eigen::VectorXd project_blocks(const Eigen::VectorXd& raw, int block_size) {
  if (!raw.allFinite()) throw NumericError("non-finite action proposal");
  Eigen::VectorXd out = raw;
  for (Eigen::Index at = 0; at < out.size(); at += block_size) {
    auto block = out.segment(at, block_size);
    if ((block.array() >= 0.0).all() && std::abs(block.sum() - 1.0) <= 1e-12) continue;
    block = block.cwiseMax(0.0);
    const double sum = block.sum();
    if (sum <= 0.0) block.setConstant(1.0 / block_size);
    else block /= sum;
  }
  return out;
}

double block_budget_violation(const Eigen::VectorXd& raw, int block_size) {
  const Eigen::Index blocks = raw.size() / block_size;
  if (blocks == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index b = 0; b < blocks; ++b)
    total += std::abs(1.0 - raw.segment(b * block_size, block_size).sum());
  return total / static_cast<double>(blocks);
}

void soft_update(const nn::Mlp& online, nn::Mlp& target, double tau) {
  if (tau == 0.0) return;
  nn::polyak_update(online, target, tau);
}

Agent::Agent(AgentSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.hp.validate();
  if (spec_.state_dim < 1 || spec_.block_size < 1 || spec_.block_count < 1)
    throw ConfigError("agent dimensions must be positive");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x74643321u};
  rng_.seed(seq);
  actor_ = nn::Mlp::init(rng_, spec_.actor_spec());
  critic1_ = nn::Mlp::init(rng_, spec_.critic_spec());
  critic2_ = nn::Mlp::init(rng_, spec_.critic_spec());
  actor_target_ = actor_;
  critic1_target_ = critic1_;
  critic2_target_ = critic2_;
  actor_opt_ = nn::AdamState::for_network(actor_, spec_.hp.actor_lr);
  critic1_opt_ = nn::AdamState::for_network(critic1_, spec_.hp.critic_lr);
  critic2_opt_ = nn::AdamState::for_network(critic2_, spec_.hp.critic_lr);
}

std::size_t Agent::parameter_count() const {
  return actor_.parameter_count() + critic1_.parameter_count() + critic2_.parameter_count();
}

Eigen::VectorXd Agent::policy(const Eigen::VectorXd& state) const {
  Eigen::VectorXd out = actor_(state);
  if (!out.allFinite()) throw NumericError("actor produced a non-finite action");
  return out;
}

Eigen::MatrixXd Agent::random_actions(int columns) {
  const int dim = spec_.action_dim();
  Eigen::MatrixXd a(dim, columns);
  if (spec_.mode == ConstraintMode::penalty) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index c = 0; c < columns; ++c)
      for (int i = 0; i < dim; ++i) a(i, c) = unit(rng_);
    return a;
  }
  // Normalized Exp(1) draws: uniform on each simplex block.
  std::exponential_distribution<double> expo(1.0);
  for (Eigen::Index c = 0; c < columns; ++c) {
    for (int i = 0; i < dim; ++i) a(i, c) = expo(rng_);
    for (int b = 0; b < spec_.block_count; ++b) {
      auto block = a.col(c).segment(b * spec_.block_size, spec_.block_size);
      block /= block.sum();
    }
  }
  return a;
}

ActionSample Agent::select_action(const Eigen::VectorXd& state, ActMode mode) {
  if (state.size() != spec_.state_dim)
    throw DimensionError("state has " + std::to_string(state.size()) + " entries, agent expects " +
                         std::to_string(spec_.state_dim));
  ActionSample out;
  switch (mode) {
    case ActMode::explore_random:
      out.proposal = random_actions(1).col(0);
      break;
    case ActMode::train_noisy: {
      Eigen::MatrixXd offset = Eigen::MatrixXd::Zero(spec_.action_dim(), 1);
      if (spec_.hp.exploration_noise > 0) {
        std::normal_distribution<double> noise(0.0, spec_.hp.exploration_noise);
        for (Eigen::Index i = 0; i < offset.rows(); ++i) offset(i, 0) = noise(rng_);
      }
      // Softmax head: noise perturbs the logits. Linear head: the outputs.
      out.proposal = actor_.forward(Eigen::MatrixXd(state), nullptr, &offset).col(0);
      break;
    }
    case ActMode::eval:
      out.proposal = actor_(state);
      break;
  }
  if (!out.proposal.allFinite()) throw NumericError("actor produced a non-finite action");
  out.executed = spec_.mode == ConstraintMode::penalty ? project_blocks(out.proposal, spec_.block_size)
                                                      : out.proposal;
  return out;
}

Eigen::MatrixXd Agent::target_actions(const Eigen::MatrixXd& next_states) {
  const double clip = spec_.hp.target_noise_clip;
  Eigen::MatrixXd offset = Eigen::MatrixXd::Zero(spec_.action_dim(), next_states.cols());
  if (spec_.hp.target_noise > 0) {
    std::normal_distribution<double> noise(0.0, spec_.hp.target_noise);
    for (Eigen::Index c = 0; c < offset.cols(); ++c)
      for (Eigen::Index i = 0; i < offset.rows(); ++i)
        offset(i, c) = std::clamp(noise(rng_), -clip, clip);
  }
  return actor_target_.forward(next_states, nullptr, &offset);
}

namespace {

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

}  // namespace

double Agent::critic_update(const Batch& batch, double* td_error) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw std::logic_error("critic_update on an empty batch");
  const double inv = 1.0 / static_cast<double>(n);

  const Eigen::MatrixXd next_in = stack(batch.next_states, target_actions(batch.next_states));
  const Eigen::RowVectorXd q1_next = critic1_target_.forward(next_in).row(0);
  const Eigen::RowVectorXd q2_next = critic2_target_.forward(next_in).row(0);
  const Eigen::RowVectorXd target =
      batch.rewards.transpose() + spec_.hp.gamma * q1_next.cwiseMin(q2_next);

  const Eigen::MatrixXd in = stack(batch.states, batch.actions);
  double loss = 0.0;
  for (int i = 0; i < 2; ++i) {
    nn::Mlp& critic = i == 0 ? critic1_ : critic2_;
    nn::AdamState& opt = i == 0 ? critic1_opt_ : critic2_opt_;
    nn::ForwardCache cache;
    const Eigen::RowVectorXd q = critic.forward(in, &cache).row(0);
    const Eigen::RowVectorXd err = q - target;
    loss += 0.5 * err.squaredNorm() * inv;
    if (i == 0 && td_error) *td_error = err.cwiseAbs().mean();
    const Eigen::MatrixXd grad = 2.0 * inv * err;
    adam_step(critic, critic.backward(cache, grad), opt);
  }
  return loss;
}

double Agent::actor_update(const Batch& batch) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw std::logic_error("actor_update on an empty batch");
  const double inv = 1.0 / static_cast<double>(n);

  nn::ForwardCache actor_cache, critic_cache;
  const Eigen::MatrixXd actions = actor_.forward(batch.states, &actor_cache);
  const Eigen::MatrixXd q =
      critic1_.forward(stack(batch.states, actions), &critic_cache);
  const double objective = q.mean();

  Eigen::MatrixXd grad_in;
  critic1_.backward(critic_cache, Eigen::MatrixXd::Constant(1, n, inv), &grad_in);
  // Ascend J: descend on -dJ/da.
  const Eigen::MatrixXd grad_actions = -grad_in.bottomRows(spec_.action_dim());
  adam_step(actor_, actor_.backward(actor_cache, grad_actions), actor_opt_);
  return objective;
}

void Agent::soft_update() {
  const double tau = spec_.hp.tau;
  td3::soft_update(actor_, actor_target_, tau);
  td3::soft_update(critic1_, critic1_target_, tau);
  td3::soft_update(critic2_, critic2_target_, tau);
}

Diagnostics Agent::train_step(const ReplayBuffer& buffer, long step_index) {
  Diagnostics d;
  if (buffer.size() < static_cast<std::size_t>(spec_.hp.batch_size)) return d;
  const Batch batch = buffer.sample(rng_, spec_.hp.batch_size);
  d.trained = true;
  d.critic_loss = critic_update(batch, &d.td_error);
  if (step_index % spec_.hp.policy_delay == 0) {
    d.actor_objective = actor_update(batch);
    soft_update();
    d.actor_updated = true;
  }
  return d;
}

nlohmann::json to_json(const AgentSpec& spec) {
  const auto& hp = spec.hp;
  return {{"state_dim", spec.state_dim},
          {"block_size", spec.block_size},
          {"block_count", spec.block_count},
          {"actor_hidden", spec.actor_hidden},
          {"critic_hidden", spec.critic_hidden},
          {"activation", nn::to_string(spec.activation)},
          {"mode", to_string(spec.mode)},
          {"hyperparameters",
           {{"gamma", hp.gamma}, {"batch_size", hp.batch_size}, {"actor_lr", hp.actor_lr},
            {"critic_lr", hp.critic_lr}, {"tau", hp.tau}, {"policy_delay", hp.policy_delay},
            {"target_noise", hp.target_noise}, {"target_noise_clip", hp.target_noise_clip},
            {"exploration_noise", hp.exploration_noise}, {"replay_capacity", hp.replay_capacity}}}};
}

AgentSpec agent_spec_from_json(const nlohmann::json& doc) {
  AgentSpec s;
  s.state_dim = doc.at("state_dim").get<int>();
  s.block_size = doc.at("block_size").get<int>();
  s.block_count = doc.at("block_count").get<int>();
  s.actor_hidden = doc.at("actor_hidden").get<std::vector<int>>();
  s.critic_hidden = doc.at("critic_hidden").get<std::vector<int>>();
  s.activation = nn::parse_activation(doc.at("activation").get<std::string>());
  s.mode = doc.at("mode").get<std::string>() == "penalty" ? ConstraintMode::penalty
                                                          : ConstraintMode::softmax_embedded;
  const auto& hp = doc.at("hyperparameters");
  s.hp.gamma = hp.at("gamma").get<double>();
  s.hp.batch_size = hp.at("batch_size").get<int>();
  s.hp.actor_lr = hp.at("actor_lr").get<double>();
  s.hp.critic_lr = hp.at("critic_lr").get<double>();
  s.hp.tau = hp.at("tau").get<double>();
  s.hp.policy_delay = hp.at("policy_delay").get<int>();
  s.hp.target_noise = hp.at("target_noise").get<double>();
  s.hp.target_noise_clip = hp.at("target_noise_clip").get<double>();
  s.hp.exploration_noise = hp.at("exploration_noise").get<double>();
  s.hp.replay_capacity = hp.at("replay_capacity").get<std::size_t>();
  return s;
}

nlohmann::json Agent::checkpoint() const {
  return {{"format", "slicerl.td3"},
          {"version", nn::kCheckpointVersion},
          {"spec", to_json(spec_)},
          {"actor", nn::to_json(actor_)},
          {"actor_target", nn::to_json(actor_target_)},
          {"critic1", nn::to_json(critic1_)},
          {"critic2", nn::to_json(critic2_)},
          {"critic1_target", nn::to_json(critic1_target_)},
          {"critic2_target", nn::to_json(critic2_target_)},
          {"adam",
           {{"actor", nn::to_json(actor_opt_)},
            {"critic1", nn::to_json(critic1_opt_)},
            {"critic2", nn::to_json(critic2_opt_)}}}};
}

Agent Agent::from_checkpoint(const nlohmann::json& doc, std::uint64_t seed) {
  try {
    if (doc.value("format", "") != "slicerl.td3" || doc.value("version", 0) != nn::kCheckpointVersion)
      throw IoError("not a version-" + std::to_string(nn::kCheckpointVersion) + " TD3 checkpoint");
    Agent a(agent_spec_from_json(doc.at("spec")), seed);
    a.actor_ = nn::mlp_from_json(doc.at("actor"));
    a.actor_target_ = nn::mlp_from_json(doc.at("actor_target"));
    a.critic1_ = nn::mlp_from_json(doc.at("critic1"));
    a.critic2_ = nn::mlp_from_json(doc.at("critic2"));
    a.critic1_target_ = nn::mlp_from_json(doc.at("critic1_target"));
    a.critic2_target_ = nn::mlp_from_json(doc.at("critic2_target"));
    a.actor_opt_ = nn::adam_from_json(doc.at("adam").at("actor"));
    a.critic1_opt_ = nn::adam_from_json(doc.at("adam").at("critic1"));
    a.critic2_opt_ = nn::adam_from_json(doc.at("adam").at("critic2"));
    if (!(a.actor_.spec() == a.spec_.actor_spec()) || !(a.critic1_.spec() == a.spec_.critic_spec()))
      throw IoError("checkpoint networks do not match the stored agent spec");
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed TD3 checkpoint: ") + e.what());
  }
}

}  // namespace slicerl::td3
